#include "sfio/spectrum.hpp"

#include <cmath>
#include <stdexcept>

namespace sfio {

double uniform_step(std::span<const double> times) {
    if (times.size() < 4) throw std::invalid_argument("dft: need at least 4 samples");
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) throw std::invalid_argument("dft: times must increase");
    for (std::size_t n = 1; n < times.size(); ++n)
        if (std::abs(times[n] - times[n - 1] - dt) > 1e-6 * dt)
            throw std::invalid_argument("dft: sampling is not uniform");
    return dt;
}

std::complex<double> dft_bin(std::span<const double> values, std::span<const double> times,
                             std::size_t k) {
    if (values.size() != times.size()) throw std::invalid_argument("dft: length mismatch");
    const double dt = uniform_step(times);
    const std::size_t n_samples = times.size();
    const double omega = 2.0 * M_PI * static_cast<double>(k) / (static_cast<double>(n_samples) * dt);
    // t_n = t_0 + n dt; reduce the index product mod N to keep arguments small.
    const double t0 = times.front();
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < n_samples; ++n) {
        const double arg = 2.0 * M_PI * static_cast<double>((k * n) % n_samples) /
                           static_cast<double>(n_samples);
        acc += values[n] * std::polar(1.0, -arg);
    }
    return acc * std::polar(1.0, -omega * t0);
}

double Spectrum::angular_frequency(std::size_t k) const {
    return 2.0 * M_PI * static_cast<double>(k) / period;
}

Spectrum dft_spectrum(const SignalRecord& sig) {
    sig.validate();
    const double dt = uniform_step(sig.t);
    Spectrum spec;
    spec.period = static_cast<double>(sig.size()) * dt;
    spec.ux.resize(sig.size());
    spec.uy.resize(sig.size());
    for (std::size_t k = 0; k < sig.size(); ++k) {
        spec.ux[k] = dft_bin(sig.ux, sig.t, k);
        spec.uy[k] = dft_bin(sig.uy, sig.t, k);
    }
    return spec;
}

}  // namespace sfio
