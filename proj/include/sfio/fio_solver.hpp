#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sfio/excitation.hpp"
#include "sfio/material.hpp"
#include "sfio/random_field.hpp"
#include "sfio/signals.hpp"

namespace sfio {

/// Frequency lattice and time sampling for the FIO quadrature.
///
/// The (xi, eta) nodes are the DFT dual of an n_xi x n_eta spatial grid on a
/// size_x x size_y box: xi_a = 2 pi a / size_x for a in [-n_xi/2, n_xi/2).
/// Output times are t_n = n dt for n = 1 .. round(t_max / dt).
struct QuadratureGrid {
    std::size_t n_xi = 256;
    std::size_t n_eta = 256;
    double size_x = 10.0;  // cm
    double size_y = 10.0;  // cm
    double dt = 0.05;      // us
    double t_max = 7.0;    // us

    void validate() const;
    std::size_t n_t() const;
    std::vector<double> times() const;
    double d_xi() const;
    double d_eta() const;
};

/// Random E and nu fields plus constant density. Both fields must cover every sensor.
struct StochasticMedium {
    FieldRealization E_field;   // GPa
    FieldRealization nu_field;  // 1
    double rho = 2.70;
};

struct FioOptions {
    /// Frequency nodes whose source spectrum exp(-eps^2 |xi|^2) falls below this
    /// are skipped. The default drops only terms below double resolution.
    double spectrum_cutoff = 1e-16;
    unsigned threads = 1;
};

/// Precomputed quadrature for a fixed excitation, frequency grid and sensor set.
///
/// Nodes sharing |xi| are grouped: the time kernel
///   K(c, k, t) = dt * sum_{s_m < t} sin(c k (t - s_m)) / (c k) * h(s_m)
/// depends only on c*k, while the geometric factors e^{i(x xi + y eta)} g(xi)
/// {xi eta, eta^2, xi^2}/|xi|^2 depend only on the sensor. Each sensor stores
/// one weight triple per group, so a solve costs O(groups * n_t) per sensor.
///
/// Wave speeds enter only through c_l and c_s at the evaluation point (frozen
/// coefficients): spatial derivatives of the material parameters are neglected,
/// and a random medium perturbs phase and amplitude through the local speeds only.
class FioPlan {
public:
    FioPlan(const Excitation& excitation, const QuadratureGrid& grid, const SensorArray& sensors,
            FioOptions options = {});

    const SensorArray& sensors() const { return sensors_; }
    const std::vector<double>& times() const { return times_; }
    const QuadratureGrid& grid() const { return grid_; }
    std::size_t group_count() const { return wavenumbers_.size(); }

    std::vector<SignalRecord> solve(const MaterialParams& mp) const;
    std::vector<SignalRecord> solve(const StochasticMedium& medium) const;
    /// One set of speeds per sensor, in sensor order.
    std::vector<SignalRecord> solve(std::span<const WaveSpeeds> speeds) const;
    SignalRecord solve_sensor(std::size_t sensor_idx, const WaveSpeeds& speeds) const;

    /// max |Im u| / max |Re u| over all sensors, components and times.
    double imaginary_residue(const MaterialParams& mp) const;

private:
    struct Weights {
        // Real and imaginary parts of the inverse-transform weights per group.
        std::vector<double> w1, w2l, w2s;
        std::vector<double> w1_im, w2l_im, w2s_im;
    };

    void kernel(double c, std::size_t group, std::span<double> out) const;
    void accumulate(std::size_t sensor_idx, const WaveSpeeds& speeds, SignalRecord& rec) const;

    QuadratureGrid grid_;
    SensorArray sensors_;
    FioOptions options_;
    std::vector<double> times_;
    std::vector<double> forcing_;      // h(s_m), m = 0 .. n_t - 1
    std::vector<double> wavenumbers_;  // |xi| per group, ascending; first may be 0
    std::vector<Weights> weights_;     // per sensor
};

std::vector<SignalRecord> solve_deterministic(const MaterialParams& mp, const Excitation& ex,
                                              const QuadratureGrid& q, const SensorArray& sensors);

std::vector<SignalRecord> solve_stochastic(const StochasticMedium& medium, const Excitation& ex,
                                           const QuadratureGrid& q, const SensorArray& sensors);

/// Local speeds at (x, y) from the medium's fields. Throws std::out_of_range
/// outside the field support.
WaveSpeeds local_speeds(const StochasticMedium& medium, double x, double y);

}  // namespace sfio
