#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sfio {

struct NelderMeadOptions {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    std::vector<double> initial_step;  // one entry per coordinate
    std::vector<double> x_tolerance;   // stop once every vertex is this close to the best, per coordinate
    double f_rel_tolerance = 1e-6;     // or once f_worst - f_best < this * |f(x0)|
    std::size_t max_iterations = 200;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Downhill simplex minimization. Returns the best vertex even when the
/// iteration budget runs out (converged == false).
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options);

struct ScalarMinimum {
    double x = 0.0;
    double f = 0.0;
    std::size_t evaluations = 0;
};

/// Golden-section search for a minimum of f on [lo, hi]; stops when the
/// bracket is narrower than tolerance.
ScalarMinimum golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tolerance = 1e-10, std::size_t max_evaluations = 500);

}  // namespace sfio
