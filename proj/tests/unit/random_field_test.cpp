#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <vector>

#include "sfio/io.hpp"
#include "sfio/random_field.hpp"

using namespace sfio;

namespace {

// Draws `n` realizations and returns them row-major (sample, node).
std::vector<double> draw(const RandomFieldSpec& base, const GridSpec& grid, std::size_t n) {
    std::vector<double> out;
    out.reserve(n * grid.size());
    RandomFieldSpec spec = base;
    for (std::size_t k = 0; k < n; ++k) {
        spec.seed = 1000 + k;
        const FieldRealization f = sample_field(spec, grid);
        out.insert(out.end(), f.values.begin(), f.values.end());
    }
    return out;
}

}  // namespace

TEST(ExpAutocov, VarianceAtZeroLag) { EXPECT_DOUBLE_EQ(exp_autocov(0.0, 3.5, 3.0), 12.25); }

TEST(ExpAutocov, OneCorrelationLengthGivesFactorOneOverE) {
    EXPECT_NEAR(exp_autocov(3.0, 3.5, 3.0), 4.506523154350169, 1e-12);
}

TEST(ExpAutocov, NearestSensorLag) {
    // 12.25 * exp(-1.17 / 3), evaluated independently.
    EXPECT_NEAR(exp_autocov(1.17, 3.5, 3.0), 8.293946712602517, 1e-12);
}

TEST(ExpAutocov, RejectsInvalidInput) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(exp_autocov(-1.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(exp_autocov(1.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(exp_autocov(nan, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(exp_autocov(1.0, nan, 1.0), std::invalid_argument);
}

TEST(RandomFieldSpec, ValidatesRanges) {
    EXPECT_THROW((RandomFieldSpec{0.0, -1.0, 1.0, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((RandomFieldSpec{0.0, 1.0, 0.0, 0}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((RandomFieldSpec{0.0, 0.0, 1.0, 0}.validate()));
}

TEST(SampleField, ZeroSigmaIsConstantMean) {
    const GridSpec grid = GridSpec::spanning(16, 16, -5, 5, -5, 5);
    const FieldRealization f = sample_field({70.0, 0.0, 3.0, 42}, grid, "GPa");
    ASSERT_EQ(f.values.size(), grid.size());
    for (double v : f.values) EXPECT_EQ(v, 70.0);
    EXPECT_EQ(f.units, "GPa");
}

TEST(SampleField, SameSeedIsBitIdentical) {
    const GridSpec grid = GridSpec::spanning(20, 20, -5, 5, -5, 5);
    const FieldRealization a = sample_field({70.0, 3.5, 3.0, 7}, grid);
    const FieldRealization b = sample_field({70.0, 3.5, 3.0, 7}, grid);
    const FieldRealization c = sample_field({70.0, 3.5, 3.0, 8}, grid);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
    for (double v : a.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(SampleField, CovarianceRecoveredAtLags) {
    // 25 x 25 nodes at 0.5 cm; lags L/2, L, 2L are 3, 6 and 12 node steps.
    const double sigma = 3.5, L = 3.0, mean = 70.0;
    const GridSpec grid = GridSpec::spanning(25, 25, -6, 6, -6, 6);
    const std::size_t n = 10000;
    const std::vector<double> s = draw({mean, sigma, L, 0}, grid, n);
    for (std::size_t step : {0u, 3u, 6u, 12u}) {
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double* row = &s[k * grid.size()];
            for (std::size_t j = 0; j < grid.ny; ++j)
                for (std::size_t i = 0; i + step < grid.nx; ++i) {
                    acc += (row[grid.index(i, j)] - mean) * (row[grid.index(i + step, j)] - mean);
                    acc += (row[grid.index(j, i)] - mean) * (row[grid.index(j, i + step)] - mean);
                    count += 2;
                }
        }
        const double r = static_cast<double>(step) * grid.dx;
        const double expected = exp_autocov(r, sigma, L);
        EXPECT_NEAR(acc / static_cast<double>(count), expected, 0.10 * expected) << "lag " << r;
    }
}

TEST(SampleField, NodesAreGaussianAndHomogeneous) {
    const GridSpec grid = GridSpec::spanning(12, 12, -5, 5, -5, 5);
    const std::size_t n = 10000;
    const std::vector<double> s = draw({70.0, 3.5, 3.0, 0}, grid, n);
    auto moments = [&](std::size_t node) {
        double m = 0.0;
        for (std::size_t k = 0; k < n; ++k) m += s[k * grid.size() + node];
        m /= static_cast<double>(n);
        double m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double d = s[k * grid.size() + node] - m;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        m2 /= static_cast<double>(n);
        m3 /= static_cast<double>(n);
        m4 /= static_cast<double>(n);
        return std::array<double, 4>{m, m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
    };
    const auto a = moments(grid.index(0, 0));
    const auto b = moments(grid.index(6, 7));
    for (const auto& m : {a, b}) {
        EXPECT_LT(std::abs(m[2]), 0.1) << "skewness";
        EXPECT_LT(std::abs(m[3]), 0.2) << "excess kurtosis";
    }
    const double se_mean = std::sqrt(12.25 / n);
    EXPECT_LT(std::abs(a[0] - b[0]), 3.0 * std::sqrt(2.0) * se_mean);
    const double se_var = 12.25 * std::sqrt(2.0 / n);
    EXPECT_LT(std::abs(a[1] - b[1]), 3.0 * std::sqrt(2.0) * se_var);
}

TEST(SampleField, PooledVarianceOnDefaultGrid) {
    // 64 x 64 over the 10 x 10 cm domain, 10^4 realizations.
    const GridSpec grid = GridSpec::spanning(64, 64, -5, 5, -5, 5);
    const std::size_t n = 10000;
    auto factor = shared_correlation_factor(grid, 3.0);
    std::vector<double> z;
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        factor->correlated_normals(5000 + k, z);
        for (double v : z) acc += v * v;
    }
    const double variance = 12.25 * acc / static_cast<double>(n * grid.size());
    EXPECT_NEAR(variance, 12.25, 0.05 * 12.25);
}

TEST(SampleField, PoissonFieldIsClamped) {
    const GridSpec grid = GridSpec::spanning(16, 16, -5, 5, -5, 5);
    const FieldRealization f = sample_poisson_field({0.35, 1.0, 1.0, 3}, grid);
    for (double v : f.values) {
        EXPECT_GE(v, kPoissonClampLow);
        EXPECT_LE(v, kPoissonClampHigh);
    }
    const FieldRealization g = sample_poisson_field({0.35, 0.005, 3.0, 3}, grid);
    const FieldRealization h = sample_field({0.35, 0.005, 3.0, 3}, grid);
    EXPECT_EQ(g.values, h.values);  // clamp inactive at small variation
}

TEST(FieldAt, ReproducesNodes) {
    const GridSpec grid = GridSpec::spanning(8, 6, -1, 1, -2, 2);
    const FieldRealization f = sample_field({1.0, 1.0, 1.0, 9}, grid);
    for (std::size_t j = 0; j < grid.ny; ++j)
        for (std::size_t i = 0; i < grid.nx; ++i)
            EXPECT_DOUBLE_EQ(field_at(f, grid.x(i), grid.y(j)), f.at(i, j));
}

TEST(FieldAt, ConstantFieldEverywhere) {
    const FieldRealization f = constant_field(GridSpec::spanning(5, 5, 0, 1, 0, 1), 3.25);
    EXPECT_DOUBLE_EQ(field_at(f, 0.3, 0.71), 3.25);
    EXPECT_DOUBLE_EQ(field_at(f, 1.0, 1.0), 3.25);
}

TEST(FieldAt, CellMidpointIsCornerAverage) {
    FieldRealization f;
    f.grid = GridSpec::spanning(2, 2, 0, 1, 0, 1);
    f.values = {1.0, 2.0, 3.0, 4.0};
    EXPECT_DOUBLE_EQ(field_at(f, 0.5, 0.5), 2.5);
}

TEST(FieldAt, OutsideThrowsRangeError) {
    const FieldRealization f = constant_field(GridSpec::spanning(5, 5, 0, 1, 0, 1), 1.0);
    EXPECT_THROW(field_at(f, -0.01, 0.5), std::out_of_range);
    EXPECT_THROW(field_at(f, 0.5, 1.01), std::out_of_range);
}

TEST(FieldIo, BinaryRoundTripIsExact) {
    const GridSpec grid = GridSpec::spanning(9, 7, -1, 1, -2, 2);
    const FieldRealization f = sample_field({70.0, 3.5, 3.0, 11}, grid, "GPa");
    const auto path = (std::filesystem::temp_directory_path() / "sfio_field_rt.bin").string();
    write_field_binary(path, f);
    const FieldRealization g = read_field_binary(path);
    EXPECT_EQ(g.grid, f.grid);
    EXPECT_EQ(g.values, f.values);
    EXPECT_EQ(g.units, "GPa");
    std::filesystem::remove(path);
}
