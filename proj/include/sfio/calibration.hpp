#pragma once

#include <cstdint>
#include <vector>

#include "sfio/damage_test.hpp"
#include "sfio/estimation.hpp"
#include "sfio/fio_solver.hpp"
#include "sfio/medium.hpp"

namespace sfio {

/// `count` FD specimens of `scenario`; specimen k uses derive_seed(root_seed, k).
std::vector<std::vector<SignalRecord>> simulate_specimens(const DamageScenario& scenario, const MediumSpec& medium,
                                                          std::size_t count, std::uint64_t root_seed,
                                                          const SpecimenOptions& options);

struct CalibrationOptions {
    std::vector<double> L_values = {0.5, 1.0, 2.0, 3.0, 5.0};  // cm, for f and g
    std::vector<double> sigma_values;                          // GPa, linearity sweep at L_sigma_sweep; may be empty
    double L_sigma_sweep = 3.0;                                // cm
    double sigma_ref = 3.5;                                    // GPa, sigma_E of the L sweep
    std::size_t samples = 20;                                  // specimens per point
    std::uint64_t seed = 0;
};

struct CalibrationPoint {
    double sigma_E = 0.0;  // generating values
    double L_E = 0.0;
    double sigma_E0 = 0.0;  // raw estimators
    double L_E0 = 0.0;
    bool L_degenerate = false;
    NominalEstimate pooled;
    double sigma_nu0 = 0.0;
};

struct CalibrationRun {
    std::vector<CalibrationPoint> L_sweep;
    std::vector<CalibrationPoint> sigma_sweep;
    CalibrationCurve f;  // sigma_E0 against L_E at sigma_ref
    CalibrationCurve g;  // L_E0 against L_E
    double sigma_ref = 3.5;
    /// Least-squares line sigma_E0 = a + b sigma_E over sigma_sweep, with R^2.
    double linear_intercept = 0.0;
    double linear_slope = 0.0;
    double linear_r2 = 0.0;
};

/// One sweep point: simulate specimens at (sigma_E, L_E) with the other
/// hyperparameters from `base`, fit them, and reduce to the raw estimators.
CalibrationPoint calibration_point(const MediumSpec& base, double sigma_E, double L_E, std::size_t samples,
                                   std::uint64_t seed, const FioPlan& plan, const FitOptions& fit,
                                   const SpecimenOptions& specimens, const std::vector<PairGroup>& groups);

/// L sweep point p seeds from derive_seed(seed, p); sigma sweep point p from
/// derive_seed(seed, 1000 + p). Points with a degenerate L estimate are left out of g.
CalibrationRun calibrate_curves(const MediumSpec& base, const CalibrationOptions& options, const FioPlan& plan,
                                const FitOptions& fit, const SpecimenOptions& specimens,
                                const std::vector<PairGroup>& groups);

}  // namespace sfio
