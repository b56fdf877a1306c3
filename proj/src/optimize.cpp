#include "sfio/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sfio {

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opt) {
    const std::size_t n = x0.size();
    if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");
    if (opt.initial_step.size() != n || opt.x_tolerance.size() != n)
        throw std::invalid_argument("nelder_mead: step and tolerance need one entry per coordinate");

    NelderMeadResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        return f(x);
    };

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t d = 0; d < n; ++d) simplex[d + 1][d] += opt.initial_step[d];
    std::vector<double> fv(n + 1);
    for (std::size_t v = 0; v <= n; ++v) fv[v] = eval(simplex[v]);
    const double f_scale = std::abs(fv[0]);

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (std::size_t k : order) {
            s2.push_back(simplex[k]);
            f2.push_back(fv[k]);
        }
        simplex.swap(s2);
        fv.swap(f2);
    };
    auto converged = [&] {
        if (fv[n] - fv[0] < opt.f_rel_tolerance * f_scale) return true;
        for (std::size_t v = 1; v <= n; ++v)
            for (std::size_t d = 0; d < n; ++d)
                if (std::abs(simplex[v][d] - simplex[0][d]) >= opt.x_tolerance[d]) return false;
        return true;
    };
    auto affine = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
        std::vector<double> x(n);
        for (std::size_t d = 0; d < n; ++d) x[d] = c[d] + t * (w[d] - c[d]);
        return x;
    };

    sort_simplex();
    while (!converged()) {
        if (res.iterations == opt.max_iterations) break;
        ++res.iterations;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[v][d] / static_cast<double>(n);

        const std::vector<double> xr = affine(centroid, simplex[n], -opt.reflection);
        const double fr = eval(xr);
        if (fr < fv[0]) {
            const std::vector<double> xe = affine(centroid, simplex[n], -opt.reflection * opt.expansion);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = xr;
            fv[n] = fr;
        } else {
            const bool outside = fr < fv[n];
            const std::vector<double> xc = outside ? affine(centroid, xr, opt.contraction)
                                                   : affine(centroid, simplex[n], opt.contraction);
            const double fc = eval(xc);
            if (fc < (outside ? fr : fv[n])) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                for (std::size_t v = 1; v <= n; ++v) {
                    simplex[v] = affine(simplex[0], simplex[v], opt.shrink);
                    fv[v] = eval(simplex[v]);
                }
            }
        }
        sort_simplex();
    }
    res.converged = converged();
    res.x = simplex[0];
    res.f = fv[0];
    return res;
}

ScalarMinimum golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tolerance, std::size_t max_evaluations) {
    if (!(lo < hi)) throw std::invalid_argument("golden_section: need lo < hi");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    ScalarMinimum res;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    res.evaluations = 2;
    while (b - a > tolerance && res.evaluations < max_evaluations) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++res.evaluations;
    }
    // Compare the interior points with the bracket ends so a monotone objective returns its boundary.
    const double fa = f(lo), fb = f(hi);
    res.evaluations += 2;
    res.x = fc <= fd ? c : d;
    res.f = std::min(fc, fd);
    if (fa < res.f) {
        res.x = lo;
        res.f = fa;
    }
    if (fb < res.f) {
        res.x = hi;
        res.f = fb;
    }
    return res;
}

}  // namespace sfio
