#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfio/grid.hpp"

namespace sfio {

/// Hyperparameters of a homogeneous Gaussian field with covariance
/// sigma^2 * exp(-r / corr_length).
struct RandomFieldSpec {
    double mean = 0.0;
    double sigma = 0.0;        // same units as mean
    double corr_length = 1.0;  // cm
    std::uint64_t seed = 0;

    void validate() const;
};

struct FieldRealization {
    GridSpec grid;
    std::vector<double> values;
    std::string units;

    double at(std::size_t i, std::size_t j) const { return values[grid.index(i, j)]; }
};

/// Raised when the jittered covariance matrix is not numerically positive definite.
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(const std::string& what, double min_eigenvalue)
        : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

/// Bounds applied to sampled Poisson-ratio fields.
inline constexpr double kPoissonClampLow = 0.05;
inline constexpr double kPoissonClampHigh = 0.45;

/// Relative diagonal jitter added before factorizing the correlation matrix.
inline constexpr double kCovarianceJitter = 1e-10;

double exp_autocov(double r, double sigma, double corr_length);

/// Lower Cholesky factor of the unit-variance correlation matrix on a grid.
/// Factorizing is O(n^3) in the node count; keep one around per (grid, L).
class CorrelationFactor {
public:
    CorrelationFactor(const GridSpec& grid, double corr_length);
    ~CorrelationFactor();
    CorrelationFactor(CorrelationFactor&&) noexcept;
    CorrelationFactor& operator=(CorrelationFactor&&) noexcept;

    const GridSpec& grid() const { return grid_; }
    double corr_length() const { return corr_length_; }

    /// Writes L*z into out, with z drawn from a NormalGenerator seeded by seed.
    void correlated_normals(std::uint64_t seed, std::vector<double>& out) const;

private:
    struct Impl;
    GridSpec grid_;
    double corr_length_;
    std::unique_ptr<Impl> impl_;
};

/// Process-wide memo of factors, keyed by (grid, corr_length). Thread-safe.
std::shared_ptr<const CorrelationFactor> shared_correlation_factor(const GridSpec& grid,
                                                                   double corr_length);

FieldRealization sample_field(const RandomFieldSpec& spec, const GridSpec& grid,
                              const std::string& units = "");

/// sample_field followed by clamping into [kPoissonClampLow, kPoissonClampHigh].
FieldRealization sample_poisson_field(const RandomFieldSpec& spec, const GridSpec& grid);

FieldRealization constant_field(const GridSpec& grid, double value, const std::string& units = "");

/// Bilinear interpolation; exact at nodes. Throws std::out_of_range outside the grid box.
double field_at(const FieldRealization& field, double x, double y);

}  // namespace sfio
