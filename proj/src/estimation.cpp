#include "sfio/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sfio/material.hpp"
#include "sfio/parallel.hpp"

namespace sfio {

void FitWeights::validate() const {
    if (!(w1 > 0.0) || !(w2 > 0.0) || !std::isfinite(w1) || !std::isfinite(w2))
        throw std::invalid_argument("fit weights must be positive and finite");
}

FitWeights weights_from_measured(const std::vector<SignalRecord>& measured) {
    double m1 = 0.0, m2 = 0.0;
    for (const SignalRecord& s : measured) {
        for (double v : s.ux) m1 = std::max(m1, std::abs(v));
        for (double v : s.uy) m2 = std::max(m2, std::abs(v));
    }
    FitWeights w;
    w.w1 = m1 > 0.0 ? 1.0 / (m1 * m1) : 1.0;
    w.w2 = m2 > 0.0 ? 1.0 / (m2 * m2) : 1.0;
    return w;
}

namespace {

double sample_step(const SignalRecord& s) {
    if (s.size() < 2) throw std::invalid_argument("signal needs at least two samples");
    return (s.t.back() - s.t.front()) / static_cast<double>(s.size() - 1);
}

void require_same_grid(const SignalRecord& a, const SignalRecord& b) {
    if (a.sensor_id != b.sensor_id) {
        std::ostringstream msg;
        msg << "signals: sensor id mismatch (" << a.sensor_id << " vs " << b.sensor_id << ")";
        throw std::invalid_argument(msg.str());
    }
    if (a.size() != b.size()) {
        std::ostringstream msg;
        msg << "signals: length mismatch at sensor " << a.sensor_id << " (" << a.size() << " vs " << b.size()
            << ")";
        throw std::invalid_argument(msg.str());
    }
    for (std::size_t n = 0; n < a.size(); ++n)
        if (std::abs(a.t[n] - b.t[n]) > 1e-9 * std::max(1.0, std::abs(a.t[n])))
            throw std::invalid_argument("signals: time grids differ at sensor " + std::to_string(a.sensor_id));
}

double squared_norm(const SignalRecord& a, const SignalRecord* b, const FitWeights& w) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        const double d1 = b ? a.ux[n] - b->ux[n] : a.ux[n];
        const double d2 = b ? a.uy[n] - b->uy[n] : a.uy[n];
        s1 += d1 * d1;
        s2 += d2 * d2;
    }
    return sample_step(a) * (w.w1 * s1 + w.w2 * s2);
}

/// Measured records reordered to follow plan.sensors().
std::vector<const SignalRecord*> align(const std::vector<SignalRecord>& measured, const FioPlan& plan) {
    std::vector<const SignalRecord*> out;
    for (const Sensor& s : plan.sensors()) {
        auto it = std::find_if(measured.begin(), measured.end(),
                               [&](const SignalRecord& r) { return r.sensor_id == s.id; });
        if (it == measured.end())
            throw std::invalid_argument("estimation: no measured signal for sensor " + std::to_string(s.id));
        it->validate();
        if (it->size() != plan.times().size())
            throw std::invalid_argument("estimation: measured signal length does not match the solver grid");
        for (std::size_t n = 0; n < it->size(); ++n)
            if (std::abs(it->t[n] - plan.times()[n]) > 1e-9 * std::max(1.0, plan.times()[n]))
                throw std::invalid_argument("estimation: measured times do not match the solver grid");
        out.push_back(&*it);
    }
    return out;
}

bool feasible(const FitOptions& o, double E, double nu) {
    return E > o.E_min && E < o.E_max && nu > o.nu_min && nu < o.nu_max;
}

}  // namespace

double sensor_norm(const SignalRecord& diff, const FitWeights& w) {
    w.validate();
    diff.validate();
    return std::sqrt(squared_norm(diff, nullptr, w));
}

double weighted_norm(const std::vector<SignalRecord>& diff, const FitWeights& w) {
    double total = 0.0;
    for (const SignalRecord& s : diff) total += sensor_norm(s, w);
    return total;
}

std::vector<SignalRecord> difference(const std::vector<SignalRecord>& a, const std::vector<SignalRecord>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("signals: sensor count mismatch");
    std::vector<SignalRecord> out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        a[j].validate();
        b[j].validate();
        require_same_grid(a[j], b[j]);
        out[j] = a[j];
        for (std::size_t n = 0; n < a[j].size(); ++n) {
            out[j].ux[n] -= b[j].ux[n];
            out[j].uy[n] -= b[j].uy[n];
        }
    }
    return out;
}

void FitOptions::validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("fit: rho must be > 0");
    if (!(E_min < E_max) || !(nu_min < nu_max)) throw std::invalid_argument("fit: empty feasible box");
    if (!feasible(*this, E_init, nu_init))
        throw std::invalid_argument("fit: initial point lies outside the feasible box");
    if (!(E_step > 0.0) || !(nu_step > 0.0)) throw std::invalid_argument("fit: simplex steps must be > 0");
    if (max_iterations == 0) throw std::invalid_argument("fit: max_iterations must be > 0");
    for (double E : scan_E)
        if (!(E > E_min && E < E_max)) throw std::invalid_argument("fit: scan_E values must lie in (E_min, E_max)");
    for (double nu : scan_nu)
        if (!(nu > nu_min && nu < nu_max)) throw std::invalid_argument("fit: scan_nu values must lie in (nu_min, nu_max)");
}

NelderMeadOptions FitOptions::nelder_mead() const {
    NelderMeadOptions o;
    o.initial_step = {E_step, nu_step};
    o.x_tolerance = {E_tolerance, nu_tolerance};
    o.f_rel_tolerance = f_rel_tolerance;
    o.max_iterations = max_iterations;
    return o;
}

EstimationResult estimate_nominal(const std::vector<SignalRecord>& measured, const FioPlan& plan,
                                  const FitOptions& options) {
    options.validate();
    const auto data = align(measured, plan);
    EstimationResult res;
    res.weights = weights_from_measured(measured);

    const Objective objective = [&](std::span<const double> x) {
        if (!feasible(options, x[0], x[1])) return kInfeasiblePenalty;
        const auto model = plan.solve(MaterialParams{x[0], x[1], options.rho});
        double total = 0.0;
        for (std::size_t j = 0; j < model.size(); ++j)
            total += std::sqrt(squared_norm(*data[j], &model[j], res.weights));
        return total;
    };
    NelderMeadResult nm = nelder_mead(objective, {options.E_init, options.nu_init}, options.nelder_mead());
    std::size_t evaluations = nm.evaluations;

    // Cycle skipping can trap the simplex in a neighbouring basin. A global
    // minimum is never beaten by a scan node, so a good fit is left untouched.
    double best_f = nm.f, best_E = 0.0, best_nu = 0.0;
    for (double E : options.scan_E)
        for (double nu : options.scan_nu) {
            const double x[2] = {E, nu};
            const double f = objective(x);
            ++evaluations;
            if (f < best_f) {
                best_f = f;
                best_E = E;
                best_nu = nu;
            }
        }
    if (best_f < nm.f) {
        NelderMeadResult again = nelder_mead(objective, {best_E, best_nu}, options.nelder_mead());
        evaluations += again.evaluations;
        if (again.f < nm.f) {
            nm = std::move(again);
            res.restarted = true;
        }
    }
    res.E_opt = nm.x[0];
    res.nu_opt = nm.x[1];
    res.objective = nm.f;
    res.iterations = nm.iterations;
    res.evaluations = evaluations;
    res.converged = nm.converged;
    return res;
}

std::vector<SensorFit> estimate_per_sensor(const std::vector<SignalRecord>& measured, const FioPlan& plan,
                                           const FitOptions& options, const FitWeights& weights,
                                           double E_start, double nu_start) {
    FitOptions start = options;
    start.E_init = E_start;
    start.nu_init = nu_start;
    start.validate();
    weights.validate();
    const auto data = align(measured, plan);

    std::vector<SensorFit> fits(data.size());
    for (std::size_t j = 0; j < data.size(); ++j) {
        const Objective objective = [&](std::span<const double> x) {
            if (!feasible(options, x[0], x[1])) return kInfeasiblePenalty;
            const SignalRecord model = plan.solve_sensor(j, wave_speeds(x[0], x[1], options.rho));
            return std::sqrt(squared_norm(*data[j], &model, weights));
        };
        const NelderMeadResult nm = nelder_mead(objective, {E_start, nu_start}, start.nelder_mead());
        fits[j] = {plan.sensors()[j].id, nm.x[0], nm.x[1], nm.f, nm.iterations, nm.converged};
    }
    return fits;
}

EstimationResult estimate_with_sensors(const std::vector<SignalRecord>& measured, const FioPlan& plan,
                                       const FitOptions& options) {
    EstimationResult res = estimate_nominal(measured, plan, options);
    const bool warm = options.warm_start_sensors && feasible(options, res.E_opt, res.nu_opt);
    res.per_sensor = estimate_per_sensor(measured, plan, options, res.weights, warm ? res.E_opt : options.E_init,
                                         warm ? res.nu_opt : options.nu_init);
    return res;
}

NominalEstimate pooled_means(std::span<const EstimationResult> results) {
    if (results.empty()) throw std::invalid_argument("pooled_means: no results");
    NominalEstimate m;
    for (const EstimationResult& r : results) {
        m.E += r.E_opt;
        m.nu += r.nu_opt;
    }
    m.E /= static_cast<double>(results.size());
    m.nu /= static_cast<double>(results.size());
    return m;
}

void PerSensorOptima::validate() const {
    if (E.size() != nu.size()) throw std::invalid_argument("optima: E and nu sample counts differ");
    for (std::size_t k = 0; k < E.size(); ++k)
        if (E[k].size() != sensor_ids.size() || nu[k].size() != sensor_ids.size())
            throw std::invalid_argument("optima: sample " + std::to_string(k) + " has the wrong sensor count");
}

PerSensorOptima PerSensorOptima::from_results(std::span<const EstimationResult> results) {
    PerSensorOptima o;
    if (results.empty()) return o;
    for (const SensorFit& f : results.front().per_sensor) o.sensor_ids.push_back(f.sensor_id);
    for (const EstimationResult& r : results) {
        std::vector<double> e, n;
        if (r.per_sensor.size() != o.sensor_ids.size())
            throw std::invalid_argument("optima: inconsistent per-sensor fits");
        for (std::size_t j = 0; j < r.per_sensor.size(); ++j) {
            if (r.per_sensor[j].sensor_id != o.sensor_ids[j])
                throw std::invalid_argument("optima: sensor order differs between samples");
            e.push_back(r.per_sensor[j].E_opt);
            n.push_back(r.per_sensor[j].nu_opt);
        }
        o.E.push_back(std::move(e));
        o.nu.push_back(std::move(n));
    }
    return o;
}

SigmaEstimate estimate_sigmas(const PerSensorOptima& optima, const NominalEstimate& pooled) {
    optima.validate();
    const std::size_t count = optima.samples() * optima.sensor_ids.size();
    if (count < 2) throw std::invalid_argument("estimate_sigmas: need N * n >= 2 optima");
    double se = 0.0, sn = 0.0;
    for (std::size_t k = 0; k < optima.samples(); ++k)
        for (std::size_t j = 0; j < optima.sensor_ids.size(); ++j) {
            se += (optima.E[k][j] - pooled.E) * (optima.E[k][j] - pooled.E);
            sn += (optima.nu[k][j] - pooled.nu) * (optima.nu[k][j] - pooled.nu);
        }
    const double denom = static_cast<double>(count - 1);
    return {std::sqrt(se / denom), std::sqrt(sn / denom)};
}

std::vector<PairGroup> reference_pair_groups() {
    constexpr double a = 1.17;
    return {
        {0.0, {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {7, 7}, {8, 8}}},
        {a, {{1, 2}, {1, 4}, {2, 3}, {3, 5}, {4, 6}, {5, 8}, {6, 7}, {7, 8}}},
        {a * std::sqrt(2.0), {{2, 4}, {2, 5}, {4, 7}, {5, 7}}},
        {2.0 * a, {{1, 3}, {1, 6}, {3, 8}, {6, 8}}},
        {a * std::sqrt(5.0), {{1, 5}, {1, 7}, {2, 6}, {2, 8}, {3, 4}, {3, 7}, {4, 8}, {5, 6}}},
        {2.0 * a * std::sqrt(2.0), {{1, 8}, {3, 6}}},
    };
}

std::vector<PairGroup> pair_groups_by_distance(const SensorArray& sensors, double tolerance) {
    validate_sensors(sensors);
    std::vector<PairGroup> groups;
    for (std::size_t a = 0; a < sensors.size(); ++a)
        for (std::size_t b = a; b < sensors.size(); ++b) {
            const double r = std::hypot(sensors[a].x - sensors[b].x, sensors[a].y - sensors[b].y);
            auto it = std::find_if(groups.begin(), groups.end(),
                                   [&](const PairGroup& g) { return std::abs(g.distance - r) <= tolerance; });
            if (it == groups.end()) {
                groups.push_back({r, {}});
                it = std::prev(groups.end());
            }
            it->pairs.emplace_back(sensors[a].id, sensors[b].id);
        }
    std::sort(groups.begin(), groups.end(),
              [](const PairGroup& x, const PairGroup& y) { return x.distance < y.distance; });
    return groups;
}

std::vector<CovariogramPoint> empirical_covariogram(const PerSensorOptima& optima, double E_star,
                                                    const std::vector<PairGroup>& groups,
                                                    const SensorArray& sensors) {
    optima.validate();
    if (groups.empty()) throw std::invalid_argument("covariogram: no pair groups");
    std::map<int, std::size_t> column;
    for (std::size_t j = 0; j < optima.sensor_ids.size(); ++j) column[optima.sensor_ids[j]] = j;
    auto lookup = [&](int id) {
        auto it = column.find(id);
        if (it == column.end()) throw std::invalid_argument("covariogram: unknown sensor id " + std::to_string(id));
        return it->second;
    };
    auto position = [&](int id) -> const Sensor& {
        auto it = std::find_if(sensors.begin(), sensors.end(), [&](const Sensor& s) { return s.id == id; });
        if (it == sensors.end()) throw std::invalid_argument("covariogram: unknown sensor id " + std::to_string(id));
        return *it;
    };

    std::vector<CovariogramPoint> out;
    for (const PairGroup& g : groups) {
        if (g.pairs.empty()) throw std::invalid_argument("covariogram: empty pair group");
        double lag = -1.0;
        for (const auto& [p, q] : g.pairs) {
            const Sensor& sp = position(p);
            const Sensor& sq = position(q);
            const double r = std::hypot(sp.x - sq.x, sp.y - sq.y);
            if (lag < 0.0) lag = r;
            else if (std::abs(r - lag) > 1e-6 * std::max(1.0, lag))
                throw std::invalid_argument("covariogram: pairs in one group have different distances");
        }
        const double denom = static_cast<double>(optima.samples() * g.pairs.size()) - 1.0;
        if (!(denom > 0.0)) throw std::invalid_argument("covariogram: need N |P| >= 2");
        double sum = 0.0;
        for (std::size_t k = 0; k < optima.samples(); ++k)
            for (const auto& [p, q] : g.pairs)
                sum += (optima.E[k][lookup(p)] - E_star) * (optima.E[k][lookup(q)] - E_star);
        out.push_back({lag, sum / denom, g.pairs.size()});
    }
    return out;
}

CorrLengthEstimate estimate_corr_length(std::span<const CovariogramPoint> covariogram, double sigma_E0,
                                        double L_min, double L_max) {
    if (!(sigma_E0 > 0.0)) throw std::invalid_argument("corr length: sigma_E0 must be > 0");
    if (!(L_min > 0.0 && L_min < L_max)) throw std::invalid_argument("corr length: need 0 < L_min < L_max");
    if (covariogram.empty()) throw std::invalid_argument("corr length: empty covariogram");
    const double var = sigma_E0 * sigma_E0;
    auto objective = [&](double L) {
        double s = 0.0;
        for (const CovariogramPoint& c : covariogram) s += std::abs(c.covariance - var * std::exp(-c.lag / L));
        return s;
    };
    const ScalarMinimum m = golden_section([&](double logL) { return objective(std::exp(logL)); },
                                           std::log(L_min), std::log(L_max), 1e-10);
    CorrLengthEstimate est;
    est.L = std::exp(m.x);
    est.objective = m.f;
    est.degenerate = std::all_of(covariogram.begin(), covariogram.end(),
                                 [](const CovariogramPoint& c) { return c.covariance == 0.0; });
    return est;
}

std::string to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::F: return "f";
        case CurveKind::G: return "g";
        case CurveKind::H: return "h";
    }
    return "?";
}

CurveKind curve_kind_from_string(const std::string& tag) {
    if (tag == "f") return CurveKind::F;
    if (tag == "g") return CurveKind::G;
    if (tag == "h") return CurveKind::H;
    throw std::invalid_argument("unknown calibration curve kind '" + tag + "'");
}

double CalibrationCurve::operator()(double L) const {
    if (!(L > 0.0)) throw std::invalid_argument("calibration curve: L must be > 0");
    return c0 * std::pow(L, c1);
}

double CalibrationCurve::inverse(double y) const {
    if (c1 == 0.0) throw std::invalid_argument("calibration curve: exponent 0 is not invertible");
    if (!(y > 0.0)) throw std::invalid_argument("calibration curve: value must be > 0 to invert");
    return std::pow(y / c0, 1.0 / c1);
}

void CalibrationCurve::validate() const {
    if (!(c0 > 0.0) || !std::isfinite(c0) || !std::isfinite(c1))
        throw std::invalid_argument("calibration curve: need c0 > 0 and finite coefficients");
}

CalibrationCurve fit_power_curve(CurveKind kind, std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw std::invalid_argument("power fit: need at least two points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [L, y] : points) {
        if (!(L > 0.0) || !(y > 0.0))
            throw std::invalid_argument("power fit: data must be positive (log undefined)");
        sx += std::log(L);
        sy += std::log(y);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [L, y] : points) {
        sxx += (std::log(L) - mx) * (std::log(L) - mx);
        sxy += (std::log(L) - mx) * (std::log(y) - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("power fit: need at least two distinct L values");
    CalibrationCurve c;
    c.kind = kind;
    c.c1 = sxy / sxx;
    c.c0 = std::exp(my - c.c1 * mx);
    double rss = 0.0;
    for (const auto& [L, y] : points) {
        const double r = std::log(y) - std::log(c.c0) - c.c1 * std::log(L);
        rss += r * r;
    }
    c.residual = std::sqrt(rss / n);
    c.support.assign(points.begin(), points.end());
    return c;
}

BiasCorrected correct_bias(double L_E0, double sigma_E0, const CalibrationCurve& f, const CalibrationCurve& g,
                           double sigma_ref) {
    if (!(L_E0 > 0.0)) throw std::invalid_argument("correct_bias: L_E0 must be > 0");
    if (!(sigma_ref > 0.0)) throw std::invalid_argument("correct_bias: sigma_ref must be > 0");
    f.validate();
    g.validate();
    BiasCorrected out;
    out.L_star = g.inverse(L_E0);
    out.sigma_star = sigma_E0 * sigma_ref / f(out.L_star);
    return out;
}

StatisticsEstimate summarize_fits(std::vector<EstimationResult> fits, const SensorArray& sensors,
                                  const std::vector<PairGroup>& groups) {
    StatisticsEstimate s;
    s.fits = std::move(fits);
    s.pooled = pooled_means(s.fits);
    const PerSensorOptima optima = PerSensorOptima::from_results(s.fits);
    s.sigmas = estimate_sigmas(optima, s.pooled);
    s.covariogram = empirical_covariogram(optima, s.pooled.E, groups, sensors);
    if (s.sigmas.sigma_E0 > 0.0) s.corr_length = estimate_corr_length(s.covariogram, s.sigmas.sigma_E0);
    else s.corr_length.degenerate = true;
    return s;
}

StatisticsEstimate estimate_statistics(const std::vector<std::vector<SignalRecord>>& specimens,
                                       const FioPlan& plan, const FitOptions& options,
                                       const std::vector<PairGroup>& groups) {
    if (specimens.empty()) throw std::invalid_argument("estimate_statistics: no specimens");
    std::vector<EstimationResult> fits(specimens.size());
    parallel_for(specimens.size(), options.threads,
                 [&](std::size_t k) { fits[k] = estimate_with_sensors(specimens[k], plan, options); });
    return summarize_fits(std::move(fits), plan.sensors(), groups);
}

}  // namespace sfio
