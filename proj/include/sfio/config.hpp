#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sfio/damage_test.hpp"
#include "sfio/estimation.hpp"
#include "sfio/excitation.hpp"
#include "sfio/fio_solver.hpp"
#include "sfio/material.hpp"
#include "sfio/medium.hpp"
#include "sfio/reference_solver.hpp"
#include "sfio/signals.hpp"

namespace sfio {

/// Everything a CLI run needs. Defaults reproduce the reference setup: 10 x 10 cm
/// domain, 256 nodes per axis, dt 0.05 us, 7 us horizon, eps 0.1 cm,
/// E 70 GPa, nu 0.35, rho 2.70 g/cm^3, eight sensors at +-1.17 cm.
struct RunConfig {
    double domain_size_cm = 10.0;
    std::size_t grid_n = 256;
    double dt_us = 0.05;
    double tmax_us = 7.0;
    double eps_cm = 0.1;
    double source_freq_mhz = 1.0;
    MaterialParams material;
    SensorArray sensors = reference_sensors();

    // Random-field hyperparameters; the means come from `material`.
    double sigma_E_gpa = 3.5;
    double L_E_cm = 3.0;
    double sigma_nu = 0.005;
    double L_nu_cm = 3.0;
    std::size_t field_grid_n = 64;

    // Reference solver.
    TimeScheme fd_scheme = TimeScheme::CentralDifference;
    double fd_dt_us = 0.0;      // 0 = automatic
    double fd_source_eps = -1;  // < 0 = same as eps_cm, 0 = point load
    CrackRegion crack;

    // Estimation.
    double E_init_gpa = 50.0;
    double nu_init = 0.3;
    std::size_t estimation_samples = 10;
    std::vector<double> calibration_L_cm = {0.5, 1.0, 2.0, 3.0, 5.0};
    std::vector<double> calibration_sigma_rel = {0.01, 0.03, 0.05, 0.10};
    std::size_t calibration_samples = 20;
    double sigma_ref_gpa = 3.5;

    // Testing.
    std::size_t n_mc = 10000;
    std::vector<double> alphas = {0.05, 0.01};
    std::size_t repetitions = 100;
    std::vector<double> sweep_sigma_rel = {0.001, 0.01, 0.05, 0.10, 0.15, 0.20, 0.40};
    std::vector<double> sweep_L_cm = {0.5, 3.0, 10.0};

    std::uint64_t seed = 20240601;
    unsigned threads = 1;
    std::string output_dir = "out";

    /// Throws std::invalid_argument naming the offending field and constraint.
    void validate() const;

    QuadratureGrid quadrature() const;
    Excitation excitation() const;
    GridSpec fd_grid() const;
    FdOptions fd_options() const;
    MediumSpec medium_spec() const;
    FitOptions fit_options() const;
    SpecimenOptions specimen_options() const;
};

RunConfig reference_config();

/// Parses a JSON document. Keys absent from the document keep their defaults;
/// `"defaults": "reference"` is the only accepted preset. Unknown keys are errors.
RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& config);
RunConfig load_config(const std::string& path);

/// FNV-1a hash of the canonical JSON form, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace sfio
