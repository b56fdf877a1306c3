#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sfio/excitation.hpp"
#include "sfio/grid.hpp"
#include "sfio/material.hpp"
#include "sfio/medium.hpp"
#include "sfio/random_field.hpp"
#include "sfio/signals.hpp"

namespace sfio {

/// Lame fields on the finite-difference grid, in g / (cm us^2).
struct HeterogeneousMedium {
    GridSpec grid;
    std::vector<double> lambda;
    std::vector<double> mu;
    double rho = 2.70;

    /// Throws unless mu > 0 and lambda + 2 mu > 0 everywhere.
    void validate() const;

    void set_material(std::size_t i, std::size_t j, double E_gpa, double nu);

    static HeterogeneousMedium homogeneous(const GridSpec& grid, const MaterialParams& mp);
    /// Samples E and nu at every grid node by bilinear interpolation of the fields.
    static HeterogeneousMedium from_fields(const GridSpec& grid, const FieldRealization& E,
                                           const FieldRealization& nu, double rho);
};

/// 256 x 256 nodes at 10/256 cm spacing with the source node at the origin.
GridSpec default_fd_grid(double size_cm = 10.0, std::size_t n = 256);

enum class TimeScheme {
    CentralDifference,  // explicit leapfrog, second order, conserves discrete energy
    BackwardEuler,      // implicit first order, dissipative, CG solve per step
};

struct FdOptions {
    TimeScheme scheme = TimeScheme::CentralDifference;
    double dt = 0.0;          // internal step, us; 0 picks one automatically
    double output_dt = 0.05;  // us
    double t_max = 7.0;       // us
    double cfl_safety = 0.9;  // fraction of the stable step used when dt == 0
    double cg_tolerance = 1e-9;
    /// Width of the Gaussian load whose transform is exp(-eps^2 |xi|^2). Unset uses
    /// the excitation's eps so both solvers see the same source; 0 is a point load.
    std::optional<double> source_eps;  // cm
    unsigned threads = 1;
};

struct FdResult {
    std::vector<SignalRecord> signals;  // t = output_dt, 2 output_dt, ..., t_max
    SensorArray snapped_sensors;        // actual node coordinates sampled
    double dt = 0.0;
    std::size_t steps = 0;
};

/// Upper bound on the stable explicit step from a Gershgorin estimate of the
/// spectral radius of the discrete elastic operator.
double max_stable_dt(const HeterogeneousMedium& medium);

/// Plane-strain elastodynamics in divergence form, second-order central
/// differences on a collocated grid, homogeneous Dirichlet boundary. The force
/// is a y-directed point load h(t) / (dx dy) at the node nearest the origin.
FdResult fd_solve(const HeterogeneousMedium& medium, const Excitation& excitation,
                  const SensorArray& sensors, const FdOptions& options = {});

/// Low-level stepper, exposed for energy and time-of-flight checks.
class ElasticFd {
public:
    explicit ElasticFd(const HeterogeneousMedium& medium, unsigned threads = 1);

    const GridSpec& grid() const { return grid_; }

    /// a = rho^{-1} div(sigma(u)) on interior nodes, zero on the boundary.
    void acceleration(const std::vector<double>& u1, const std::vector<double>& u2,
                      std::vector<double>& a1, std::vector<double>& a2) const;

    /// u^T K u with K the stiffness (-rho * acceleration operator), cell-weighted.
    double strain_energy(const std::vector<double>& u1, const std::vector<double>& u2,
                         const std::vector<double>& v1, const std::vector<double>& v2) const;

    /// Solves (I - dt^2 A) x = rhs by Jacobi-preconditioned CG.
    std::size_t solve_implicit(double dt, const std::vector<double>& rhs1,
                               const std::vector<double>& rhs2, std::vector<double>& x1,
                               std::vector<double>& x2, double tolerance) const;

    double rho() const { return rho_; }

private:
    GridSpec grid_;
    double rho_;
    unsigned threads_;
    // Coefficients pre-divided by rho and the grid spacings.
    std::vector<double> pxf_, mxf_;  // (lambda+2mu) and mu on x-faces i+1/2
    std::vector<double> pyf_, myf_;  // (lambda+2mu) and mu on y-faces j+1/2
    std::vector<double> lam_, mu_;   // node values / (4 dx dy rho)
};

// ---------------------------------------------------------------------------
// Damage scenarios

enum class ScenarioKind { S1, S2, S3, S4 };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_from_string(const std::string& tag);

/// Soft rectangular inclusion standing in for a crack.
struct CrackRegion {
    double center_x = 0.7;    // cm
    double center_y = -0.7;   // cm
    double width = 0.5;       // cm, along the rotated x axis
    double height = 0.1;      // cm, along the rotated y axis
    double E_gpa = 0.7;
    double angle_deg = 45.0;  // counter-clockwise rotation of the width axis from +x; 45 lies across the source-to-sensor-3 path

    /// True if (x, y) lies in the (rotated) rectangle, boundary included.
    bool contains(double x, double y) const;
};

struct DamageScenario {
    ScenarioKind kind = ScenarioKind::S1;
    double E_mean_gpa = 70.0;  // used by S2 / S3
    CrackRegion crack;         // used by S4

    /// S1: base; S2: E_mean 60; S3: E_mean 80; S4: base plus crack.
    static DamageScenario standard(ScenarioKind kind);
    void validate(const GridSpec& grid) const;
};

struct ScenarioMedium {
    HeterogeneousMedium medium;
    StochasticMedium fields;  // the sampled E / nu fields before the crack overwrite
    std::uint64_t seed = 0;
    std::size_t crack_nodes = 0;
};

ScenarioMedium make_scenario(const DamageScenario& scenario, const MediumSpec& base,
                             std::uint64_t seed, const GridSpec& fd_grid = default_fd_grid());

/// make_scenario followed by fd_solve: one synthetic "measured" specimen.
std::vector<SignalRecord> simulate_specimen(const DamageScenario& scenario, const MediumSpec& base,
                                            std::uint64_t seed, const Excitation& excitation,
                                            const SensorArray& sensors, const FdOptions& options = {},
                                            const GridSpec& fd_grid = default_fd_grid());

}  // namespace sfio
