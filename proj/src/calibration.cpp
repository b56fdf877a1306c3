#include "sfio/calibration.hpp"

#include <stdexcept>

#include "sfio/parallel.hpp"
#include "sfio/rng.hpp"

namespace sfio {

std::vector<std::vector<SignalRecord>> simulate_specimens(const DamageScenario& scenario, const MediumSpec& medium,
                                                          std::size_t count, std::uint64_t root_seed,
                                                          const SpecimenOptions& options) {
    std::vector<std::vector<SignalRecord>> out(count);
    // Factor the correlation matrices once before the workers start.
    if (count > 0) {
        shared_correlation_factor(medium.field_grid, medium.E.corr_length);
        shared_correlation_factor(medium.field_grid, medium.nu.corr_length);
    }
    parallel_for(count, options.threads, [&](std::size_t k) {
        out[k] = simulate_specimen(scenario, medium, derive_seed(root_seed, k), options.excitation, options.sensors,
                                   options.fd, options.fd_grid);
    });
    return out;
}

CalibrationPoint calibration_point(const MediumSpec& base, double sigma_E, double L_E, std::size_t samples,
                                   std::uint64_t seed, const FioPlan& plan, const FitOptions& fit,
                                   const SpecimenOptions& specimens, const std::vector<PairGroup>& groups) {
    if (samples < 1) throw std::invalid_argument("calibration: samples must be >= 1");
    MediumSpec medium = base;
    medium.E.sigma = sigma_E;
    medium.E.corr_length = L_E;
    medium.validate();
    const auto data = simulate_specimens(DamageScenario::standard(ScenarioKind::S1), medium, samples, seed, specimens);
    const StatisticsEstimate est = estimate_statistics(data, plan, fit, groups);
    CalibrationPoint p;
    p.sigma_E = sigma_E;
    p.L_E = L_E;
    p.sigma_E0 = est.sigmas.sigma_E0;
    p.sigma_nu0 = est.sigmas.sigma_nu0;
    p.L_E0 = est.corr_length.L;
    p.L_degenerate = est.corr_length.degenerate;
    p.pooled = est.pooled;
    return p;
}

CalibrationRun calibrate_curves(const MediumSpec& base, const CalibrationOptions& options, const FioPlan& plan,
                                const FitOptions& fit, const SpecimenOptions& specimens,
                                const std::vector<PairGroup>& groups) {
    if (options.L_values.size() < 2) throw std::invalid_argument("calibration: need at least 2 L values");
    if (!(options.sigma_ref > 0.0)) throw std::invalid_argument("calibration: sigma_ref must be > 0");
    CalibrationRun run;
    run.sigma_ref = options.sigma_ref;
    for (std::size_t p = 0; p < options.L_values.size(); ++p)
        run.L_sweep.push_back(calibration_point(base, options.sigma_ref, options.L_values[p], options.samples,
                                                derive_seed(options.seed, p), plan, fit, specimens, groups));
    for (std::size_t p = 0; p < options.sigma_values.size(); ++p)
        run.sigma_sweep.push_back(calibration_point(base, options.sigma_values[p], options.L_sigma_sweep,
                                                    options.samples, derive_seed(options.seed, 1000 + p), plan,
                                                    fit, specimens, groups));

    std::vector<std::pair<double, double>> f_pts, g_pts;
    for (const CalibrationPoint& p : run.L_sweep) {
        f_pts.emplace_back(p.L_E, p.sigma_E0);
        if (!p.L_degenerate) g_pts.emplace_back(p.L_E, p.L_E0);
    }
    run.f = fit_power_curve(CurveKind::F, f_pts);
    if (g_pts.size() < 2) throw std::runtime_error("calibration: fewer than 2 usable correlation-length estimates");
    run.g = fit_power_curve(CurveKind::G, g_pts);

    if (run.sigma_sweep.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        const double n = static_cast<double>(run.sigma_sweep.size());
        for (const CalibrationPoint& p : run.sigma_sweep) {
            sx += p.sigma_E;
            sy += p.sigma_E0;
            sxx += p.sigma_E * p.sigma_E;
            sxy += p.sigma_E * p.sigma_E0;
            syy += p.sigma_E0 * p.sigma_E0;
        }
        const double vxx = sxx - sx * sx / n, vxy = sxy - sx * sy / n, vyy = syy - sy * sy / n;
        run.linear_slope = vxy / vxx;
        run.linear_intercept = (sy - run.linear_slope * sx) / n;
        run.linear_r2 = vyy > 0.0 ? vxy * vxy / (vxx * vyy) : 1.0;
    }
    return run;
}

}  // namespace sfio
