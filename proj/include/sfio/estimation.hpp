#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sfio/fio_solver.hpp"
#include "sfio/optimize.hpp"
#include "sfio/signals.hpp"

namespace sfio {

/// Per-direction weights of the fit norm.
struct FitWeights {
    double w1 = 1.0;
    double w2 = 1.0;
    void validate() const;
};

/// w_d = 1 / (max_{j,t} |g_{d,j}(t)|)^2, so that both directions carry equal
/// weight regardless of their amplitude. A direction that is identically zero
/// gets weight 1.
FitWeights weights_from_measured(const std::vector<SignalRecord>& measured);

/// sqrt(sum_d w_d * int f_d^2 dt) for one sensor, rectangle rule at the sample step.
double sensor_norm(const SignalRecord& diff, const FitWeights& w);

/// Sum of sensor_norm over sensors.
double weighted_norm(const std::vector<SignalRecord>& diff, const FitWeights& w);

/// a - b, matched by position; ids and time grids must agree.
std::vector<SignalRecord> difference(const std::vector<SignalRecord>& a, const std::vector<SignalRecord>& b);

struct FitOptions {
    double E_init = 50.0;  // GPa
    double nu_init = 0.3;
    double rho = 2.70;     // g/cm^3, known
    double E_step = 5.0;
    double nu_step = 0.02;
    double E_tolerance = 0.01;
    double nu_tolerance = 1e-4;
    double f_rel_tolerance = 1e-6;
    std::size_t max_iterations = 200;
    // Feasible region; outside it the objective returns kInfeasiblePenalty.
    double E_min = 1.0, E_max = 500.0;
    double nu_min = 0.01, nu_max = 0.49;
    /// Per-sensor fits start from the all-sensor optimum instead of (E_init, nu_init).
    bool warm_start_sensors = true;
    /// Global-basin check for the all-sensor fit: the objective is evaluated on
    /// scan_E x scan_nu, and if some node beats the optimum found from
    /// (E_init, nu_init), Nelder-Mead is rerun from the best node. Empty disables.
    std::vector<double> scan_E = {40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0};
    std::vector<double> scan_nu = {0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
    unsigned threads = 1;

    void validate() const;
    NelderMeadOptions nelder_mead() const;
};

inline constexpr double kInfeasiblePenalty = 1e30;

struct SensorFit {
    int sensor_id = 0;
    double E_opt = 0.0;
    double nu_opt = 0.0;
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct EstimationResult {
    double E_opt = 0.0;
    double nu_opt = 0.0;
    double objective = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;  // including the basin scan
    bool converged = false;
    bool restarted = false;  // the result comes from the rerun at the best scan node
    FitWeights weights;
    std::vector<SensorFit> per_sensor;  // filled by estimate_with_sensors
};

/// Nelder-Mead fit of a constant-coefficient FIO solution to all sensors.
/// measured is matched to plan.sensors() by id.
EstimationResult estimate_nominal(const std::vector<SignalRecord>& measured, const FioPlan& plan,
                                  const FitOptions& options = {});

/// Separate fit per sensor using that sensor's norm only.
std::vector<SensorFit> estimate_per_sensor(const std::vector<SignalRecord>& measured, const FioPlan& plan,
                                           const FitOptions& options, const FitWeights& weights,
                                           double E_start, double nu_start);

/// estimate_nominal followed by estimate_per_sensor.
EstimationResult estimate_with_sensors(const std::vector<SignalRecord>& measured, const FioPlan& plan,
                                       const FitOptions& options = {});

struct NominalEstimate {
    double E = 0.0;
    double nu = 0.0;
};

/// Arithmetic means of the per-repetition optima.
NominalEstimate pooled_means(std::span<const EstimationResult> results);

/// Per-sensor optima over N repetitions: E[k][j], nu[k][j] for sample k, sensor j.
struct PerSensorOptima {
    std::vector<int> sensor_ids;
    std::vector<std::vector<double>> E;
    std::vector<std::vector<double>> nu;

    std::size_t samples() const { return E.size(); }
    void validate() const;
    static PerSensorOptima from_results(std::span<const EstimationResult> results);
};

struct SigmaEstimate {
    double sigma_E0 = 0.0;   // GPa, biased; see correct_bias
    double sigma_nu0 = 0.0;  // also the final estimate of sigma_nu
};

/// Pooled standard deviations about the pooled means with a (N n - 1) divisor.
SigmaEstimate estimate_sigmas(const PerSensorOptima& optima, const NominalEstimate& pooled);

/// Sensor pairs sharing one separation distance.
struct PairGroup {
    double distance = 0.0;  // cm
    std::vector<std::pair<int, int>> pairs;
};

/// The six groups used with the eight-sensor layout, lags 0 to 2 sqrt(2) * 1.17 cm.
std::vector<PairGroup> reference_pair_groups();

/// Every unordered pair (self-pairs included) grouped by distance.
std::vector<PairGroup> pair_groups_by_distance(const SensorArray& sensors, double tolerance = 1e-6);

struct CovariogramPoint {
    double lag = 0.0;  // cm
    double covariance = 0.0;
    std::size_t pairs = 0;
};

/// C(r_l) = (N |P_l| - 1)^-1 sum_k sum_{(a,b) in P_l} (E_a^k - E*)(E_b^k - E*).
/// Lags are measured from the sensor coordinates.
std::vector<CovariogramPoint> empirical_covariogram(const PerSensorOptima& optima, double E_star,
                                                    const std::vector<PairGroup>& groups,
                                                    const SensorArray& sensors);

struct CorrLengthEstimate {
    double L = 0.0;  // cm
    double objective = 0.0;
    bool degenerate = false;  // every covariance was zero
};

/// argmin_L sum_l |C(r_l) - sigma^2 exp(-r_l / L)| by golden-section search on
/// log L over [L_min, L_max].
CorrLengthEstimate estimate_corr_length(std::span<const CovariogramPoint> covariogram, double sigma_E0,
                                        double L_min = 0.01, double L_max = 100.0);

enum class CurveKind { F, G, H };
std::string to_string(CurveKind kind);
CurveKind curve_kind_from_string(const std::string& tag);

/// Power law c0 * L^c1.
struct CalibrationCurve {
    CurveKind kind = CurveKind::F;
    double c0 = 1.0;
    double c1 = 1.0;
    double residual = 0.0;  // RMS of the log-space residuals
    std::vector<std::pair<double, double>> support;

    double operator()(double L) const;
    /// Solves c0 * L^c1 = y for L. Throws if c1 == 0 or y <= 0.
    double inverse(double y) const;
    void validate() const;
};

/// Least-squares line through (log L, log y).
CalibrationCurve fit_power_curve(CurveKind kind, std::span<const std::pair<double, double>> points);

struct BiasCorrected {
    double L_star = 0.0;
    double sigma_star = 0.0;
};

/// L* = g^-1(L_E0); sigma* = sigma_E0 * sigma_ref / f(L*).
BiasCorrected correct_bias(double L_E0, double sigma_E0, const CalibrationCurve& f, const CalibrationCurve& g,
                           double sigma_ref);

/// Everything the estimation pipeline derives from N measured specimens.
struct StatisticsEstimate {
    std::vector<EstimationResult> fits;
    NominalEstimate pooled;
    SigmaEstimate sigmas;
    std::vector<CovariogramPoint> covariogram;
    CorrLengthEstimate corr_length;
};

StatisticsEstimate estimate_statistics(const std::vector<std::vector<SignalRecord>>& specimens,
                                       const FioPlan& plan, const FitOptions& options,
                                       const std::vector<PairGroup>& groups);

/// Same as estimate_statistics, reusing fits computed earlier.
StatisticsEstimate summarize_fits(std::vector<EstimationResult> fits, const SensorArray& sensors,
                                  const std::vector<PairGroup>& groups);

}  // namespace sfio
