#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sfio/estimation.hpp"
#include "sfio/fio_solver.hpp"
#include "sfio/medium.hpp"
#include "sfio/spectrum.hpp"

using namespace sfio;

namespace {

double max_abs(const std::vector<SignalRecord>& s) {
    double m = 0.0;
    for (const SignalRecord& r : s)
        for (std::size_t n = 0; n < r.size(); ++n) m = std::max({m, std::abs(r.ux[n]), std::abs(r.uy[n])});
    return m;
}

double max_abs_x(const SignalRecord& r) {
    double m = 0.0;
    for (double v : r.ux) m = std::max(m, std::abs(v));
    return m;
}

const std::vector<SignalRecord>& reference_signals() {
    static const std::vector<SignalRecord> s =
        solve_deterministic(MaterialParams{}, Excitation{}, QuadratureGrid{}, reference_sensors());
    return s;
}

double bin_phase_deg(const std::vector<double>& v, const std::vector<double>& t, std::size_t k) {
    return std::arg(dft_bin(v, t, k)) * 180.0 / std::numbers::pi;
}

double wrap_deg(double d) {
    while (d > 180.0) d -= 360.0;
    while (d <= -180.0) d += 360.0;
    return d;
}

}  // namespace

TEST(WaveSpeeds, AluminiumDefaults) {
    const WaveSpeeds w = wave_speeds(MaterialParams{70.0, 0.35, 2.70});
    EXPECT_NEAR(w.c_l, 0.6450543445734879, 1e-12);
    EXPECT_NEAR(w.c_s, 0.30987408390150945, 1e-12);
    EXPECT_NEAR(w.c_l, 0.65, 0.01);
    EXPECT_NEAR(w.c_s, 0.31, 0.01);
}

TEST(WaveSpeeds, SoftScenarioMaterial) {
    const WaveSpeeds w = wave_speeds(60.0, 0.35, 2.70);
    EXPECT_NEAR(w.c_l, 0.5972042776517443, 1e-12);
    EXPECT_NEAR(w.c_s, 0.28688765527462345, 1e-12);
}

TEST(WaveSpeeds, ZeroPoissonCollapses) {
    const WaveSpeeds w = wave_speeds(70.0, 0.0, 2.70);
    EXPECT_NEAR(w.c_l, std::sqrt(0.7 / 2.7), 1e-14);
    EXPECT_NEAR(w.c_s, w.c_l / std::sqrt(2.0), 1e-14);
}

TEST(WaveSpeeds, RejectsIncompressibleAndInvalid) {
    EXPECT_THROW(wave_speeds(70.0, 0.5, 2.7), std::invalid_argument);
    EXPECT_THROW(wave_speeds(-1.0, 0.3, 2.7), std::invalid_argument);
    EXPECT_THROW(wave_speeds(70.0, 0.3, 0.0), std::invalid_argument);
}

TEST(QuadratureGrid, DefaultTimeAxis) {
    const QuadratureGrid q;
    EXPECT_EQ(q.n_t(), 140u);
    const auto t = q.times();
    EXPECT_DOUBLE_EQ(t.front(), 0.05);
    EXPECT_NEAR(t.back(), 7.0, 1e-12);
    QuadratureGrid bad;
    bad.n_xi = 1;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(FioSolver, EmptySensorListRejected) {
    EXPECT_THROW(solve_deterministic(MaterialParams{}, Excitation{}, QuadratureGrid{}, {}), std::invalid_argument);
}

TEST(FioSolver, ZeroForcingGivesZeroSignals) {
    Excitation ex;
    ex.profile = TimeProfile::zero();
    const auto s = solve_deterministic(MaterialParams{}, ex, QuadratureGrid{}, reference_sensors());
    EXPECT_EQ(max_abs(s), 0.0);
}

TEST(FioSolver, ZeroFrequencyNodeIsDoubleTimeIntegral) {
    // A very wide source suppresses every node but xi = eta = 0, whose
    // contribution is u1 = 0 and u2 = (d_xi d_eta / 4 pi^2) int_0^t int_0^s h.
    Excitation ex;
    ex.eps_cm = 1000.0;
    QuadratureGrid q;
    q.n_xi = q.n_eta = 8;
    const auto s = solve_deterministic(MaterialParams{}, ex, q, {{1, 0.3, -0.2}});
    const double scale = q.d_xi() * q.d_eta() / (4.0 * std::numbers::pi * std::numbers::pi);
    for (std::size_t n = 1; n <= q.n_t(); ++n) {
        const double t = static_cast<double>(n) * q.dt;
        double acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const double sm = static_cast<double>(m) * q.dt;
            acc += (t - sm) * std::sin(2.0 * std::numbers::pi * sm) * q.dt;
        }
        EXPECT_NEAR(s[0].uy[n - 1], scale * acc, 1e-12 * (1.0 + std::abs(scale * acc)));
        EXPECT_NEAR(s[0].ux[n - 1], 0.0, 1e-15);
    }
}

TEST(FioSolver, OutputIsReal) {
    const FioPlan plan(Excitation{}, QuadratureGrid{}, reference_sensors());
    EXPECT_LT(plan.imaginary_residue(MaterialParams{}), 1e-8);
}

TEST(FioSolver, MirrorSymmetryAboutYAxis) {
    const auto s = solve_deterministic(MaterialParams{}, Excitation{}, QuadratureGrid{},
                                       {{1, 1.17, -1.17}, {2, -1.17, -1.17}, {3, 0.8, 0.5}, {4, -0.8, 0.5}});
    const double tol = 1e-9 * max_abs(s);
    for (std::size_t p : {0u, 2u})
        for (std::size_t n = 0; n < s[p].size(); ++n) {
            EXPECT_NEAR(s[p].ux[n], -s[p + 1].ux[n], tol);
            EXPECT_NEAR(s[p].uy[n], s[p + 1].uy[n], tol);
        }
}

TEST(FioSolver, HorizontalDisplacementVanishesOnAxes) {
    const auto& s = reference_signals();
    const double global = max_abs(s);
    for (int id : {2, 4, 5, 7}) EXPECT_LT(max_abs_x(s[sensor_index(reference_sensors(), id)]), 0.05 * global) << id;
    for (int id : {1, 3, 6, 8}) EXPECT_GT(max_abs_x(s[sensor_index(reference_sensors(), id)]), 0.05 * global) << id;
}

// Largest |u| / max|u| before `window(d)` over all sensors.
static double precursor(double eps, double (*window)(double d, double eps, double c_l)) {
    Excitation ex;
    ex.eps_cm = eps;
    const auto s = solve_deterministic(MaterialParams{}, ex, QuadratureGrid{}, reference_sensors());
    const double global = max_abs(s);
    const double c_l = wave_speeds(MaterialParams{}).c_l;
    double worst = 0.0;
    for (const Sensor& sensor : reference_sensors()) {
        const SignalRecord& r = s[sensor_index(reference_sensors(), sensor.id)];
        const double t_end = window(std::hypot(sensor.x, sensor.y), eps, c_l);
        for (std::size_t n = 0; n < r.size() && r.t[n] < t_end; ++n)
            worst = std::max({worst, std::abs(r.ux[n]) / global, std::abs(r.uy[n]) / global});
    }
    return worst;
}

TEST(FioSolver, CausalForNarrowSource) {
    const double worst = precursor(0.03, [](double d, double, double c_l) { return 0.8 * d / c_l; });
    EXPECT_LT(worst, 1e-3);
}

TEST(FioSolver, CausalOutsideSourceFootprint) {
    // The load exp(-r^2 / 4 eps^2) itself exceeds 1e-3 out to r = 2 eps sqrt(ln 1000),
    // so the pressure front is advanced by that radius.
    const double worst = precursor(0.1, [](double d, double eps, double c_l) {
        return (d - 2.0 * eps * std::sqrt(std::log(1000.0))) / c_l;
    });
    EXPECT_LT(worst, 1e-3);
}

TEST(FioSolver, QuadratureConverged) {
    const auto& coarse = reference_signals();
    const FitWeights w = weights_from_measured(coarse);
    const double base = weighted_norm(coarse, w);
    QuadratureGrid fine;
    fine.n_xi = fine.n_eta = 512;
    const auto doubled = solve_deterministic(MaterialParams{}, Excitation{}, fine, reference_sensors());
    EXPECT_LT(weighted_norm(difference(doubled, coarse), w), 0.01 * base);
    // Finer frequency spacing: twice the box, twice the nodes.
    QuadratureGrid wide;
    wide.n_xi = wide.n_eta = 512;
    wide.size_x = wide.size_y = 20.0;
    const auto widened = solve_deterministic(MaterialParams{}, Excitation{}, wide, reference_sensors());
    EXPECT_LT(weighted_norm(difference(widened, coarse), w), 0.01 * base);
}

TEST(FioSolver, ThreadCountDoesNotChangeResults) {
    FioOptions one, three;
    three.threads = 3;
    const FioPlan a(Excitation{}, QuadratureGrid{}, reference_sensors(), one);
    const FioPlan b(Excitation{}, QuadratureGrid{}, reference_sensors(), three);
    const auto sa = a.solve(MaterialParams{});
    const auto sb = b.solve(MaterialParams{});
    for (std::size_t j = 0; j < sa.size(); ++j) {
        EXPECT_EQ(sa[j].ux, sb[j].ux);
        EXPECT_EQ(sa[j].uy, sb[j].uy);
    }
}

TEST(StochasticFio, ZeroVarianceEqualsDeterministic) {
    MediumSpec spec;
    spec.E.sigma = 0.0;
    spec.nu.sigma = 0.0;
    const StochasticMedium m = sample_medium(spec, 5);
    const auto st = solve_stochastic(m, Excitation{}, QuadratureGrid{}, reference_sensors());
    const auto& det = reference_signals();
    for (std::size_t j = 0; j < st.size(); ++j) {
        EXPECT_EQ(st[j].ux, det[j].ux);
        EXPECT_EQ(st[j].uy, det[j].uy);
    }
}

TEST(StochasticFio, SameSeedSameSignals) {
    const MediumSpec spec;
    const auto a = solve_stochastic(sample_medium(spec, 77), Excitation{}, QuadratureGrid{}, reference_sensors());
    const auto b = solve_stochastic(sample_medium(spec, 77), Excitation{}, QuadratureGrid{}, reference_sensors());
    const auto c = solve_stochastic(sample_medium(spec, 78), Excitation{}, QuadratureGrid{}, reference_sensors());
    EXPECT_EQ(a[2].uy, b[2].uy);
    EXPECT_NE(a[2].uy, c[2].uy);
}

TEST(StochasticFio, StifferMaterialAdvancesPhase) {
    const GridSpec grid = MediumSpec::default_field_grid();
    StochasticMedium base{constant_field(grid, 70.0, "GPa"), constant_field(grid, 0.35), 2.70};
    StochasticMedium stiff = base;
    const std::size_t i = 39, j = 24;  // a node near sensor 3 at (1.17, -1.17)
    for (std::size_t dj = 0; dj < 2; ++dj)
        for (std::size_t di = 0; di < 2; ++di) stiff.E_field.values[grid.index(i + di, j + dj)] = 72.0;
    const SensorArray sensor{{3, grid.x(i) + 0.5 * grid.dx, grid.y(j) + 0.5 * grid.dy}};
    const auto a = solve_stochastic(base, Excitation{}, QuadratureGrid{}, sensor);
    const auto b = solve_stochastic(stiff, Excitation{}, QuadratureGrid{}, sensor);
    const double shift = wrap_deg(bin_phase_deg(b[0].uy, b[0].t, 1) - bin_phase_deg(a[0].uy, a[0].t, 1));
    EXPECT_GT(shift, 0.0);
}

TEST(StochasticFio, SensorOutsideFieldThrows) {
    const MediumSpec spec;
    const StochasticMedium m = sample_medium(spec, 1);
    EXPECT_THROW(solve_stochastic(m, Excitation{}, QuadratureGrid{}, {{1, 6.0, 0.0}}), std::out_of_range);
}

TEST(Dft, ZeroSignalZeroSpectrum) {
    SignalRecord r{1, QuadratureGrid{}.times(), std::vector<double>(140, 0.0), std::vector<double>(140, 0.0)};
    const Spectrum s = dft_spectrum(r);
    for (const auto& c : s.ux) EXPECT_EQ(std::abs(c), 0.0);
}

TEST(Dft, CosineAtBinOneConcentrates) {
    const auto t = QuadratureGrid{}.times();
    SignalRecord r{1, t, {}, {}};
    for (double tn : t) {
        r.ux.push_back(std::cos(2.0 * std::numbers::pi * tn / 7.0));
        r.uy.push_back(0.0);
    }
    const Spectrum s = dft_spectrum(r);
    EXPECT_NEAR(s.period, 7.0, 1e-12);
    EXPECT_NEAR(s.angular_frequency(1), 2.0 * std::numbers::pi / 7.0, 1e-12);
    for (std::size_t k = 0; k < s.ux.size(); ++k) {
        if (k == 1 || k == s.ux.size() - 1)
            EXPECT_NEAR(std::abs(s.ux[k]), 70.0, 1e-9);
        else
            EXPECT_LT(std::abs(s.ux[k]), 1e-9);
    }
}

TEST(Dft, RealSignalHermitian) {
    const auto& r = reference_signals()[2];
    const Spectrum s = dft_spectrum(r);
    const std::size_t n = s.uy.size();
    for (std::size_t k = 1; k < n; ++k) {
        EXPECT_NEAR(s.uy[k].real(), s.uy[n - k].real(), 1e-12 * std::abs(s.uy[k]) + 1e-30);
        EXPECT_NEAR(s.uy[k].imag(), -s.uy[n - k].imag(), 1e-12 * std::abs(s.uy[k]) + 1e-30);
    }
}

TEST(Dft, AmplitudeAndPhaseOfShiftedCosine) {
    // A cos(w1 t + phi) has amplitude A and phase +phi.
    const auto t = QuadratureGrid{}.times();
    const double A = 2.5, phi = 0.7, w = 2.0 * std::numbers::pi / 7.0;
    std::vector<double> v;
    for (double tn : t) v.push_back(A * std::cos(w * tn + phi));
    const auto X = dft_bin(v, t, 1);
    EXPECT_NEAR(2.0 * std::abs(X) / static_cast<double>(t.size()), A, 1e-12);
    EXPECT_NEAR(std::arg(X), phi, 1e-12);
}

TEST(Dft, TimeShiftRotatesPhase) {
    // Circularly delaying by m samples multiplies bin k by exp(-i w_k m dt).
    const auto& r = reference_signals()[2];
    const std::size_t n = r.size(), m = 9;
    std::vector<double> delayed(n);
    for (std::size_t i = 0; i < n; ++i) delayed[(i + m) % n] = r.uy[i];
    for (std::size_t k : {1u, 2u}) {
        const auto a = dft_bin(r.uy, r.t, k);
        const auto b = dft_bin(delayed, r.t, k);
        const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / 7.0;
        const auto expected = a * std::polar(1.0, -w * static_cast<double>(m) * 0.05);
        EXPECT_NEAR(std::abs(b - expected), 0.0, 1e-10 * std::abs(a));
        EXPECT_LT(wrap_deg(std::arg(b) * 180 / std::numbers::pi - std::arg(a) * 180 / std::numbers::pi), 0.0);
    }
}

TEST(Dft, RejectsShortOrIrregularSampling) {
    EXPECT_THROW(uniform_step(std::vector<double>{0.1, 0.2, 0.3}), std::invalid_argument);
    EXPECT_THROW(uniform_step(std::vector<double>{0.1, 0.2, 0.3, 0.5}), std::invalid_argument);
}
