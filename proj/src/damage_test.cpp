#include "sfio/damage_test.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sfio/parallel.hpp"
#include "sfio/rng.hpp"
#include "sfio/spectrum.hpp"

namespace sfio {

namespace {
constexpr double kRadToDeg = 180.0 / M_PI;
}

std::vector<int> FeatureLayout::sensor_ids() const {
    std::vector<int> ids;
    for (const FeatureSpec& f : features)
        if (std::find(ids.begin(), ids.end(), f.sensor_id) == ids.end()) ids.push_back(f.sensor_id);
    return ids;
}

std::size_t FeatureLayout::active_signals() const {
    std::set<std::pair<int, int>> s;
    for (const FeatureSpec& f : features) s.emplace(f.sensor_id, f.direction);
    return s.size();
}

std::vector<std::pair<int, int>> reference_signal_mask() { return {{2, 1}, {4, 1}, {5, 1}, {7, 1}}; }

FeatureLayout make_layout(const SensorArray& sensors, const std::vector<std::pair<int, int>>& masked,
                          const std::vector<std::size_t>& bins) {
    validate_sensors(sensors);
    if (bins.empty()) throw std::invalid_argument("layout: no DFT bins selected");
    FeatureLayout layout;
    for (const Sensor& s : sensors)
        for (int d = 1; d <= 2; ++d) {
            if (std::find(masked.begin(), masked.end(), std::make_pair(s.id, d)) != masked.end()) continue;
            for (std::size_t k : bins) {
                if (k == 0) throw std::invalid_argument("layout: bin 0 carries no phase");
                layout.features.push_back({s.id, d, k, Quantity::Amplitude});
                layout.features.push_back({s.id, d, k, Quantity::Phase});
            }
        }
    return layout;
}

double center_phase(double phase_deg, double center_deg) {
    const double d = phase_deg - center_deg;
    return center_deg + d - 360.0 * std::floor((d + 180.0) / 360.0);
}

double circular_mean_deg(std::span<const double> phases_deg) {
    double s = 0.0, c = 0.0;
    for (double p : phases_deg) {
        s += std::sin(p / kRadToDeg);
        c += std::cos(p / kRadToDeg);
    }
    return std::atan2(s, c) * kRadToDeg;
}

FeatureVector extract_features(const std::vector<SignalRecord>& signals, const FeatureLayout& layout,
                               std::span<const double> centers) {
    if (!centers.empty() && centers.size() != layout.size())
        throw std::invalid_argument("features: need one center per feature");
    FeatureVector fv;
    fv.values.resize(layout.size());
    fv.undefined.assign(layout.size(), false);
    for (std::size_t f = 0; f < layout.size(); ++f) {
        const FeatureSpec& spec = layout.features[f];
        auto it = std::find_if(signals.begin(), signals.end(),
                               [&](const SignalRecord& s) { return s.sensor_id == spec.sensor_id; });
        if (it == signals.end())
            throw std::invalid_argument("features: missing signal for sensor " + std::to_string(spec.sensor_id));
        if (spec.bin >= it->size()) throw std::invalid_argument("features: DFT bin beyond the record length");
        const auto X = dft_bin(spec.direction == 1 ? it->ux : it->uy, it->t, spec.bin);
        if (spec.quantity == Quantity::Amplitude) {
            fv.values[f] = 2.0 * std::abs(X) / static_cast<double>(it->size());
        } else if (std::abs(X) == 0.0) {
            fv.values[f] = centers.empty() ? 0.0 : centers[f];
            fv.undefined[f] = true;
        } else {
            const double phase = std::arg(X) * kRadToDeg;
            fv.values[f] = centers.empty() || std::isnan(centers[f]) ? phase : center_phase(phase, centers[f]);
        }
    }
    return fv;
}

NullSample::NullSample(FeatureLayout layout, std::vector<double> values, NullManifest manifest)
    : layout_(std::move(layout)), raw_(std::move(values)), manifest_(std::move(manifest)) {
    const std::size_t nf = layout_.size();
    if (nf == 0) throw std::invalid_argument("null sample: empty layout");
    if (raw_.empty() || raw_.size() % nf != 0) throw std::invalid_argument("null sample: raw size mismatch");
    n_ = raw_.size() / nf;
    centers_.assign(nf, std::numeric_limits<double>::quiet_NaN());
    sorted_.resize(nf);
    std::vector<double> column(n_);
    for (std::size_t f = 0; f < nf; ++f) {
        for (std::size_t k = 0; k < n_; ++k) column[k] = raw(k, f);
        if (layout_.features[f].quantity == Quantity::Phase) {
            centers_[f] = circular_mean_deg(column);
            for (double& v : column) v = center_phase(v, centers_[f]);
        }
        sorted_[f] = column;
        std::sort(sorted_[f].begin(), sorted_[f].end());
    }
}

NullSample build_null_sample(const MediumSpec& medium, const Excitation& excitation, const QuadratureGrid& quadrature,
                             const SensorArray& sensors, std::size_t n_mc, std::uint64_t root_seed,
                             const FeatureLayout& layout, unsigned threads, std::size_t min_samples) {
    if (n_mc < min_samples) {
        std::ostringstream msg;
        msg << "null sample: N_MC = " << n_mc << " is below the minimum of " << min_samples;
        throw std::invalid_argument(msg.str());
    }
    medium.validate();
    const FioPlan plan(excitation, quadrature, sensors);
    const std::size_t nf = layout.size();
    std::vector<double> raw(n_mc * nf);
    parallel_for(n_mc, threads, [&](std::size_t k) {
        try {
            const StochasticMedium sm = sample_medium(medium, derive_seed(root_seed, k));
            const FeatureVector fv = extract_features(plan.solve(sm), layout);
            std::copy(fv.values.begin(), fv.values.end(), raw.begin() + static_cast<std::ptrdiff_t>(k * nf));
        } catch (const std::exception& e) {
            throw std::runtime_error("null sample " + std::to_string(k) + ": " + e.what());
        }
    });
    NullManifest manifest{root_seed, n_mc, medium, excitation, quadrature, sensors};
    return NullSample(layout, std::move(raw), std::move(manifest));
}

double p_value(double x, std::span<const double> null_sorted, Sidedness side) {
    const double n = static_cast<double>(null_sorted.size());
    const auto below = static_cast<double>(std::upper_bound(null_sorted.begin(), null_sorted.end(), x) -
                                           null_sorted.begin());
    const auto above = static_cast<double>(null_sorted.end() -
                                           std::lower_bound(null_sorted.begin(), null_sorted.end(), x));
    const double left = (below + 1.0) / (n + 1.0);
    const double right = (above + 1.0) / (n + 1.0);
    switch (side) {
        case Sidedness::Left: return left;
        case Sidedness::Right: return right;
        case Sidedness::Two: return std::min(1.0, 2.0 * std::min(left, right));
    }
    return 1.0;
}

std::string to_string(TestKind kind) {
    switch (kind) {
        case TestKind::I: return "I";
        case TestKind::II: return "II";
        case TestKind::III: return "III";
    }
    return "?";
}

TestKind test_kind_from_string(const std::string& tag) {
    if (tag == "I") return TestKind::I;
    if (tag == "II") return TestKind::II;
    if (tag == "III") return TestKind::III;
    throw std::invalid_argument("unknown test kind '" + tag + "' (expected I, II or III)");
}

Quantity test_quantity(TestKind kind) { return kind == TestKind::III ? Quantity::Amplitude : Quantity::Phase; }

Sidedness test_sidedness(TestKind kind) {
    switch (kind) {
        case TestKind::I: return Sidedness::Left;
        case TestKind::II: return Sidedness::Right;
        case TestKind::III: return Sidedness::Two;
    }
    return Sidedness::Two;
}

TestReport run_test(TestKind kind, const FeatureVector& measured, const NullSample& null,
                    std::span<const double> alphas) {
    const FeatureLayout& layout = null.layout();
    if (measured.values.size() != layout.size() || measured.undefined.size() != layout.size())
        throw std::invalid_argument("test: measured features do not match the null layout");
    if (null.size() == 0) throw std::invalid_argument("test: empty null sample");

    TestReport rep;
    rep.kind = kind;
    rep.alphas.assign(alphas.begin(), alphas.end());
    const Quantity q = test_quantity(kind);
    const Sidedness side = test_sidedness(kind);
    for (std::size_t f = 0; f < layout.size(); ++f) {
        if (layout.features[f].quantity != q) continue;
        rep.features.push_back(f);
        rep.feature_values.push_back(measured.values[f]);
        const bool flag = measured.undefined[f];
        rep.flagged.push_back(flag);
        rep.feature_p.push_back(flag ? 1.0 : p_value(measured.values[f], null.sorted(f), side));
    }
    if (rep.features.empty()) throw std::invalid_argument("test: layout has no features for test " + to_string(kind));

    rep.sensor_ids = layout.sensor_ids();
    rep.sensor_p.assign(rep.sensor_ids.size(), 0.0);
    std::vector<std::size_t> count(rep.sensor_ids.size(), 0);
    for (std::size_t m = 0; m < rep.features.size(); ++m) {
        const int id = layout.features[rep.features[m]].sensor_id;
        const auto s = static_cast<std::size_t>(
            std::find(rep.sensor_ids.begin(), rep.sensor_ids.end(), id) - rep.sensor_ids.begin());
        rep.sensor_p[s] += rep.feature_p[m];
        ++count[s];
    }
    rep.overall_p = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < rep.sensor_ids.size(); ++s) {
        if (count[s] == 0) {
            rep.sensor_p[s] = 1.0;
            continue;
        }
        rep.sensor_p[s] /= static_cast<double>(count[s]);
        if (rep.sensor_p[s] < rep.overall_p) {
            rep.overall_p = rep.sensor_p[s];
            rep.critical_sensor = rep.sensor_ids[s];
        }
    }
    for (double a : rep.alphas) rep.reject.push_back(rep.overall_p < a);
    return rep;
}

std::vector<TestReport> run_all_tests(const std::vector<SignalRecord>& measured, const NullSample& null,
                                      std::span<const double> alphas) {
    const FeatureVector fv = extract_features(measured, null.layout(), null.centers());
    return {run_test(TestKind::I, fv, null, alphas), run_test(TestKind::II, fv, null, alphas),
            run_test(TestKind::III, fv, null, alphas)};
}

std::vector<std::vector<TestReport>> scenario_trials(const DamageScenario& scenario, const MediumSpec& medium,
                                                     std::size_t repetitions, std::uint64_t root_seed,
                                                     const NullSample& null, std::span<const double> alphas,
                                                     const SpecimenOptions& options) {
    std::vector<std::vector<TestReport>> reports(repetitions);
    parallel_for(repetitions, options.threads, [&](std::size_t r) {
        const auto signals = simulate_specimen(scenario, medium, derive_seed(root_seed, r), options.excitation,
                                               options.sensors, options.fd, options.fd_grid);
        reports[r] = run_all_tests(signals, null, alphas);
    });
    return reports;
}

SweepTable sensitivity_sweep(const std::string& parameter, const std::vector<double>& values,
                             std::size_t repetitions, const NullSample& null, const MediumSpec& base,
                             std::uint64_t root_seed, const SpecimenOptions& options, std::vector<double> alphas) {
    if (parameter != "sigma_E" && parameter != "L_E")
        throw std::invalid_argument("sweep: parameter must be sigma_E or L_E, got '" + parameter + "'");
    SweepTable table;
    table.parameter = parameter;
    table.values = values;
    table.alphas = alphas;
    table.repetitions = repetitions;
    for (std::size_t v = 0; v < values.size(); ++v) {
        MediumSpec spec = base;
        if (parameter == "sigma_E") spec.E.sigma = values[v];
        else spec.E.corr_length = values[v];
        const auto reports = scenario_trials(DamageScenario::standard(ScenarioKind::S1), spec, repetitions,
                                             derive_seed(root_seed, v), null, alphas, options);
        std::vector<std::vector<std::size_t>> counts(3, std::vector<std::size_t>(alphas.size(), 0));
        for (const auto& rep : reports)
            for (std::size_t t = 0; t < 3; ++t)
                for (std::size_t a = 0; a < alphas.size(); ++a) counts[t][a] += rep[t].reject[a] ? 1 : 0;
        table.counts.push_back(std::move(counts));
    }
    return table;
}

}  // namespace sfio
