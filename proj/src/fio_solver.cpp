#include "sfio/fio_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sfio/parallel.hpp"

namespace sfio {

void QuadratureGrid::validate() const {
    if (n_xi < 2 || n_eta < 2)
        throw std::invalid_argument("quadrature grid: need at least 2 frequency nodes per axis");
    if (!(size_x > 0.0) || !(size_y > 0.0))
        throw std::invalid_argument("quadrature grid: domain size must be > 0");
    if (!std::isfinite(dt) || !(dt > 0.0)) throw std::invalid_argument("quadrature grid: dt must be > 0");
    if (!std::isfinite(t_max) || t_max < dt)
        throw std::invalid_argument("quadrature grid: t_max must be >= dt");
}

std::size_t QuadratureGrid::n_t() const {
    return static_cast<std::size_t>(std::llround(t_max / dt));
}

std::vector<double> QuadratureGrid::times() const {
    std::vector<double> t(n_t());
    for (std::size_t n = 0; n < t.size(); ++n) t[n] = static_cast<double>(n + 1) * dt;
    return t;
}

double QuadratureGrid::d_xi() const { return 2.0 * M_PI / size_x; }
double QuadratureGrid::d_eta() const { return 2.0 * M_PI / size_y; }

namespace {

struct Node {
    double xi, eta, k2;
};

}  // namespace

FioPlan::FioPlan(const Excitation& excitation, const QuadratureGrid& grid,
                 const SensorArray& sensors, FioOptions options)
    : grid_(grid), sensors_(sensors), options_(options) {
    excitation.validate();
    grid.validate();
    validate_sensors(sensors);

    times_ = grid.times();
    const std::size_t nt = times_.size();
    forcing_.resize(nt);
    for (std::size_t m = 0; m < nt; ++m) forcing_[m] = excitation.profile(static_cast<double>(m) * grid.dt);

    // Collect the frequency nodes that carry weight, sorted by |xi|^2.
    const double dxi = grid.d_xi(), deta = grid.d_eta();
    const double eps2 = excitation.eps_cm * excitation.eps_cm;
    const auto half_x = static_cast<long>(grid.n_xi / 2);
    const auto half_y = static_cast<long>(grid.n_eta / 2);
    std::vector<Node> nodes;
    nodes.reserve(grid.n_xi * grid.n_eta);
    for (long b = -half_y; b < static_cast<long>(grid.n_eta) - half_y; ++b) {
        for (long a = -half_x; a < static_cast<long>(grid.n_xi) - half_x; ++a) {
            const double xi = static_cast<double>(a) * dxi;
            const double eta = static_cast<double>(b) * deta;
            const double k2 = xi * xi + eta * eta;
            if (std::exp(-eps2 * k2) < options.spectrum_cutoff) continue;
            nodes.push_back({xi, eta, k2});
        }
    }
    std::stable_sort(nodes.begin(), nodes.end(),
                     [](const Node& l, const Node& r) { return l.k2 < r.k2; });

    // Group equal |xi|. Distinct lattice radii differ by far more than the tolerance.
    std::vector<std::size_t> group_of(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i == 0 || nodes[i].k2 - nodes[i - 1].k2 > 1e-12 * nodes[i].k2 + 1e-300 ||
            (nodes[i - 1].k2 == 0.0) != (nodes[i].k2 == 0.0)) {
            wavenumbers_.push_back(std::sqrt(nodes[i].k2));
        }
        group_of[i] = wavenumbers_.size() - 1;
    }

    const double cell = dxi * deta / (4.0 * M_PI * M_PI);
    const std::size_t ng = wavenumbers_.size();
    weights_.resize(sensors_.size());
    for (std::size_t s = 0; s < sensors_.size(); ++s) {
        Weights& w = weights_[s];
        for (auto* v : {&w.w1, &w.w2l, &w.w2s, &w.w1_im, &w.w2l_im, &w.w2s_im}) v->assign(ng, 0.0);
        const double x = sensors_[s].x, y = sensors_[s].y;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const Node& nd = nodes[i];
            const double phase = x * nd.xi + y * nd.eta;
            const double amp = std::exp(-eps2 * nd.k2) * cell;
            const double re = std::cos(phase) * amp;
            const double im = std::sin(phase) * amp;
            double f1 = 0.0, f2l = 1.0, f2s = 0.0;  // |xi| = 0: u1_hat = 0, u2_hat = int int h
            if (nd.k2 > 0.0) {
                f1 = nd.xi * nd.eta / nd.k2;
                f2l = nd.eta * nd.eta / nd.k2;
                f2s = nd.xi * nd.xi / nd.k2;
            }
            const std::size_t g = group_of[i];
            w.w1[g] += re * f1;
            w.w2l[g] += re * f2l;
            w.w2s[g] += re * f2s;
            w.w1_im[g] += im * f1;
            w.w2l_im[g] += im * f2l;
            w.w2s_im[g] += im * f2s;
        }
    }
}

void FioPlan::kernel(double c, std::size_t group, std::span<double> out) const {
    const std::size_t nt = times_.size();
    const double dt = grid_.dt;
    const double k = wavenumbers_[group];

    if (k == 0.0) {
        // Limit c k -> 0: dt * sum (t_n - s_m) h(s_m).
        double sum_h = 0.0, sum_sh = 0.0;
        for (std::size_t n = 1; n <= nt; ++n) {
            const double s = static_cast<double>(n - 1) * dt;
            sum_h += forcing_[n - 1];
            sum_sh += s * forcing_[n - 1];
            out[n - 1] = dt * (times_[n - 1] * sum_h - sum_sh);
        }
        return;
    }

    // Rectangular rule for int_0^t sin(w (t - s)) / w h(s) ds, as
    // Im(e^{i w t_n} sum_{m<n} e^{-i w s_m} h_m) dt / w with a rotation recurrence.
    const double omega = c * k;
    const double rot_re = std::cos(omega * dt), rot_im = std::sin(omega * dt);
    double z_re = 1.0, z_im = 0.0;  // e^{i w s_{n-1}}
    double a_re = 0.0, a_im = 0.0;
    const double scale = dt / omega;
    for (std::size_t n = 1; n <= nt; ++n) {
        const double h = forcing_[n - 1];
        a_re += z_re * h;
        a_im -= z_im * h;
        const double nz_re = z_re * rot_re - z_im * rot_im;
        const double nz_im = z_re * rot_im + z_im * rot_re;
        z_re = nz_re;
        z_im = nz_im;
        out[n - 1] = scale * (z_re * a_im + z_im * a_re);
    }
}

void FioPlan::accumulate(std::size_t sensor_idx, const WaveSpeeds& speeds, SignalRecord& rec) const {
    const std::size_t nt = times_.size();
    std::vector<double> kl(nt), ks(nt);
    const Weights& w = weights_[sensor_idx];
    rec.sensor_id = sensors_[sensor_idx].id;
    rec.t = times_;
    rec.ux.assign(nt, 0.0);
    rec.uy.assign(nt, 0.0);
    for (std::size_t g = 0; g < wavenumbers_.size(); ++g) {
        kernel(speeds.c_l, g, kl);
        kernel(speeds.c_s, g, ks);
        const double w1 = w.w1[g], w2l = w.w2l[g], w2s = w.w2s[g];
        for (std::size_t n = 0; n < nt; ++n) {
            rec.ux[n] += w1 * (kl[n] - ks[n]);
            rec.uy[n] += w2l * kl[n] + w2s * ks[n];
        }
    }
}

SignalRecord FioPlan::solve_sensor(std::size_t sensor_idx, const WaveSpeeds& speeds) const {
    if (sensor_idx >= sensors_.size()) throw std::out_of_range("fio: sensor index out of range");
    SignalRecord rec;
    accumulate(sensor_idx, speeds, rec);
    return rec;
}

std::vector<SignalRecord> FioPlan::solve(std::span<const WaveSpeeds> speeds) const {
    if (speeds.size() != sensors_.size())
        throw std::invalid_argument("fio: need one speed pair per sensor");
    for (const WaveSpeeds& c : speeds)
        if (!(c.c_l > 0.0) || !(c.c_s > 0.0) || !std::isfinite(c.c_l) || !std::isfinite(c.c_s))
            throw std::invalid_argument("fio: wave speeds must be positive and finite");

    std::vector<SignalRecord> out(sensors_.size());
    const bool shared = std::all_of(speeds.begin(), speeds.end(), [&](const WaveSpeeds& c) {
        return c.c_l == speeds[0].c_l && c.c_s == speeds[0].c_s;
    });
    if (!shared) {
        parallel_for(sensors_.size(), options_.threads,
                     [&](std::size_t s) { accumulate(s, speeds[s], out[s]); });
        return out;
    }

    // Same speeds everywhere: evaluate each kernel once and reuse it for all
    // sensors. Per sensor the update sequence matches accumulate() exactly.
    const std::size_t nt = times_.size();
    for (std::size_t s = 0; s < sensors_.size(); ++s) {
        out[s].sensor_id = sensors_[s].id;
        out[s].t = times_;
        out[s].ux.assign(nt, 0.0);
        out[s].uy.assign(nt, 0.0);
    }
    std::vector<double> kl(nt), ks(nt);
    for (std::size_t g = 0; g < wavenumbers_.size(); ++g) {
        kernel(speeds[0].c_l, g, kl);
        kernel(speeds[0].c_s, g, ks);
        for (std::size_t s = 0; s < sensors_.size(); ++s) {
            const Weights& w = weights_[s];
            const double w1 = w.w1[g], w2l = w.w2l[g], w2s = w.w2s[g];
            auto& ux = out[s].ux;
            auto& uy = out[s].uy;
            for (std::size_t n = 0; n < nt; ++n) {
                ux[n] += w1 * (kl[n] - ks[n]);
                uy[n] += w2l * kl[n] + w2s * ks[n];
            }
        }
    }
    return out;
}

std::vector<SignalRecord> FioPlan::solve(const MaterialParams& mp) const {
    mp.validate();
    std::vector<WaveSpeeds> speeds(sensors_.size(), wave_speeds(mp));
    return solve(speeds);
}

WaveSpeeds local_speeds(const StochasticMedium& medium, double x, double y) {
    const double E = field_at(medium.E_field, x, y);
    const double nu = field_at(medium.nu_field, x, y);
    if (!(E > 0.0) || !(nu > 0.0 && nu < 0.5))
        throw std::invalid_argument("stochastic medium: invalid local parameters at sensor");
    return wave_speeds(E, nu, medium.rho);
}

std::vector<SignalRecord> FioPlan::solve(const StochasticMedium& medium) const {
    std::vector<WaveSpeeds> speeds;
    speeds.reserve(sensors_.size());
    for (const Sensor& s : sensors_) speeds.push_back(local_speeds(medium, s.x, s.y));
    return solve(speeds);
}

double FioPlan::imaginary_residue(const MaterialParams& mp) const {
    const WaveSpeeds c = wave_speeds(mp);
    const std::size_t nt = times_.size();
    std::vector<double> kl(nt), ks(nt);
    double max_re = 0.0, max_im = 0.0;
    for (std::size_t s = 0; s < sensors_.size(); ++s) {
        const Weights& w = weights_[s];
        std::vector<double> re1(nt, 0.0), re2(nt, 0.0), im1(nt, 0.0), im2(nt, 0.0);
        for (std::size_t g = 0; g < wavenumbers_.size(); ++g) {
            kernel(c.c_l, g, kl);
            kernel(c.c_s, g, ks);
            for (std::size_t n = 0; n < nt; ++n) {
                re1[n] += w.w1[g] * (kl[n] - ks[n]);
                re2[n] += w.w2l[g] * kl[n] + w.w2s[g] * ks[n];
                im1[n] += w.w1_im[g] * (kl[n] - ks[n]);
                im2[n] += w.w2l_im[g] * kl[n] + w.w2s_im[g] * ks[n];
            }
        }
        for (std::size_t n = 0; n < nt; ++n) {
            max_re = std::max({max_re, std::abs(re1[n]), std::abs(re2[n])});
            max_im = std::max({max_im, std::abs(im1[n]), std::abs(im2[n])});
        }
    }
    return max_re > 0.0 ? max_im / max_re : max_im;
}

std::vector<SignalRecord> solve_deterministic(const MaterialParams& mp, const Excitation& ex,
                                              const QuadratureGrid& q, const SensorArray& sensors) {
    return FioPlan(ex, q, sensors).solve(mp);
}

std::vector<SignalRecord> solve_stochastic(const StochasticMedium& medium, const Excitation& ex,
                                           const QuadratureGrid& q, const SensorArray& sensors) {
    return FioPlan(ex, q, sensors).solve(medium);
}

}  // namespace sfio
