#include "sfio/random_field.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <list>
#include <mutex>
#include <sstream>

#include "sfio/rng.hpp"

namespace sfio {

void RandomFieldSpec::validate() const {
    if (!std::isfinite(mean)) throw std::invalid_argument("random field: mean must be finite");
    if (!std::isfinite(sigma) || sigma < 0.0)
        throw std::invalid_argument("random field: sigma must be finite and >= 0");
    if (!std::isfinite(corr_length) || !(corr_length > 0.0))
        throw std::invalid_argument("random field: corr_length must be finite and > 0");
}

double exp_autocov(double r, double sigma, double corr_length) {
    if (!std::isfinite(r) || !std::isfinite(sigma) || !std::isfinite(corr_length))
        throw std::invalid_argument("exp_autocov: non-finite input");
    if (r < 0.0) throw std::invalid_argument("exp_autocov: r must be >= 0");
    if (!(corr_length > 0.0)) throw std::invalid_argument("exp_autocov: L must be > 0");
    return sigma * sigma * std::exp(-r / corr_length);
}

struct CorrelationFactor::Impl {
    Eigen::MatrixXd lower;
};

CorrelationFactor::CorrelationFactor(const GridSpec& grid, double corr_length)
    : grid_(grid), corr_length_(corr_length), impl_(std::make_unique<Impl>()) {
    grid.validate();
    if (!std::isfinite(corr_length) || !(corr_length > 0.0))
        throw std::invalid_argument("correlation factor: corr_length must be > 0");

    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd cov(n, n);
    for (std::size_t a = 0; a < grid.size(); ++a) {
        const double xa = grid.x(a % grid.nx);
        const double ya = grid.y(a / grid.nx);
        for (std::size_t b = 0; b <= a; ++b) {
            const double r = std::hypot(xa - grid.x(b % grid.nx), ya - grid.y(b / grid.nx));
            const double c = std::exp(-r / corr_length);
            cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = c;
            cov(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = c;
        }
    }
    cov.diagonal().array() += kCovarianceJitter;

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
        const double min_ev = eig.eigenvalues().minCoeff();
        std::ostringstream msg;
        msg << "covariance factorization failed (L=" << corr_length << ", " << n
            << " nodes); minimum eigenvalue " << min_ev;
        throw FactorizationError(msg.str(), min_ev);
    }
    impl_->lower = llt.matrixL();
}

CorrelationFactor::~CorrelationFactor() = default;
CorrelationFactor::CorrelationFactor(CorrelationFactor&&) noexcept = default;
CorrelationFactor& CorrelationFactor::operator=(CorrelationFactor&&) noexcept = default;

void CorrelationFactor::correlated_normals(std::uint64_t seed, std::vector<double>& out) const {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    NormalGenerator normal(seed);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal();
    Eigen::VectorXd y = impl_->lower.triangularView<Eigen::Lower>() * z;
    out.assign(y.data(), y.data() + n);
}

namespace {

struct CacheEntry {
    GridSpec grid;
    double corr_length;
    std::shared_ptr<const CorrelationFactor> factor;
};

constexpr std::size_t kFactorCacheCapacity = 4;

}  // namespace

std::shared_ptr<const CorrelationFactor> shared_correlation_factor(const GridSpec& grid,
                                                                   double corr_length) {
    static std::mutex mutex;
    static std::list<CacheEntry> cache;  // most recently used first

    std::lock_guard<std::mutex> lock(mutex);
    for (auto it = cache.begin(); it != cache.end(); ++it) {
        if (it->grid == grid && it->corr_length == corr_length) {
            cache.splice(cache.begin(), cache, it);
            return cache.front().factor;
        }
    }
    auto factor = std::make_shared<const CorrelationFactor>(grid, corr_length);
    cache.push_front({grid, corr_length, factor});
    if (cache.size() > kFactorCacheCapacity) cache.pop_back();
    return factor;
}

FieldRealization constant_field(const GridSpec& grid, double value, const std::string& units) {
    grid.validate();
    return FieldRealization{grid, std::vector<double>(grid.size(), value), units};
}

FieldRealization sample_field(const RandomFieldSpec& spec, const GridSpec& grid,
                              const std::string& units) {
    spec.validate();
    grid.validate();
    if (spec.sigma == 0.0) return constant_field(grid, spec.mean, units);

    FieldRealization field{grid, {}, units};
    shared_correlation_factor(grid, spec.corr_length)->correlated_normals(spec.seed, field.values);
    for (double& v : field.values) v = spec.mean + spec.sigma * v;
    return field;
}

FieldRealization sample_poisson_field(const RandomFieldSpec& spec, const GridSpec& grid) {
    FieldRealization field = sample_field(spec, grid, "1");
    for (double& v : field.values) v = std::clamp(v, kPoissonClampLow, kPoissonClampHigh);
    return field;
}

double field_at(const FieldRealization& field, double x, double y) {
    const GridSpec& g = field.grid;
    const double tol_x = 1e-9 * std::max(1.0, std::abs(g.x_max() - g.x0));
    const double tol_y = 1e-9 * std::max(1.0, std::abs(g.y_max() - g.y0));
    if (!(x >= g.x0 - tol_x && x <= g.x_max() + tol_x && y >= g.y0 - tol_y &&
          y <= g.y_max() + tol_y)) {
        std::ostringstream msg;
        msg << "field_at: point (" << x << ", " << y << ") outside field box [" << g.x0 << ", "
            << g.x_max() << "] x [" << g.y0 << ", " << g.y_max() << "]";
        throw std::out_of_range(msg.str());
    }

    auto locate = [](double p, double origin, double step, std::size_t n, std::size_t& cell,
                     double& frac) {
        if (n == 1) {
            cell = 0;
            frac = 0.0;
            return;
        }
        double s = std::clamp((p - origin) / step, 0.0, static_cast<double>(n - 1));
        // Snap coordinates that are a node up to rounding so nodes are reproduced exactly.
        if (std::abs(s - std::round(s)) < 1e-9) s = std::round(s);
        cell = std::min(static_cast<std::size_t>(s), n - 2);
        frac = s - static_cast<double>(cell);
    };
    std::size_t i = 0, j = 0;
    double fx = 0.0, fy = 0.0;
    locate(x, g.x0, g.dx, g.nx, i, fx);
    locate(y, g.y0, g.dy, g.ny, j, fy);
    const std::size_t i1 = g.nx > 1 ? i + 1 : i;
    const std::size_t j1 = g.ny > 1 ? j + 1 : j;

    // Difference form keeps constant fields exact; end weights return the node itself.
    auto lerp = [](double a, double b, double f) { return f == 0.0 ? a : f == 1.0 ? b : a + f * (b - a); };
    const double lo = lerp(field.at(i, j), field.at(i1, j), fx);
    const double hi = lerp(field.at(i, j1), field.at(i1, j1), fx);
    return lerp(lo, hi, fy);
}

}  // namespace sfio
