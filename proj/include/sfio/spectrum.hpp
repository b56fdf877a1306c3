#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "sfio/signals.hpp"

namespace sfio {

/// DFT of both displacement components of a uniformly sampled record.
///
/// Convention: X_k = sum_n x(t_n) exp(-i w_k t_n) with w_k = 2 pi k / T and
/// T = N dt, so bin k=1 at the default 140 samples of 0.05 us is 2 pi / 7 us^-1.
/// Phases are referenced to t = 0: A cos(w_k t + phi) has phase +phi, and a
/// delay by tau multiplies bin k by exp(-i w_k tau).
struct Spectrum {
    std::vector<std::complex<double>> ux;
    std::vector<std::complex<double>> uy;
    double period = 0.0;  // T, us

    double angular_frequency(std::size_t k) const;
};

Spectrum dft_spectrum(const SignalRecord& sig);

/// Single DFT bin of `values` sampled at uniform `times` (same convention).
std::complex<double> dft_bin(std::span<const double> values, std::span<const double> times,
                             std::size_t k);

/// Throws std::invalid_argument unless times are uniformly spaced with >= 4 samples.
double uniform_step(std::span<const double> times);

}  // namespace sfio
