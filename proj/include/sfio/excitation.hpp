#pragma once

#include <string>
#include <vector>

namespace sfio {

/// Time profile h(t) of the body force. Always zero for t < 0.
class TimeProfile {
public:
    enum class Kind { SineOnset, Tabulated, Zero };

    /// h(t) = sin(2 pi f t) for t >= 0, f in MHz (t in us).
    static TimeProfile sine_onset(double freq_mhz = 1.0);
    /// Piecewise-linear through (times, values), zero outside the table.
    static TimeProfile tabulated(std::vector<double> times, std::vector<double> values);
    static TimeProfile zero();

    double operator()(double t) const;

    Kind kind() const { return kind_; }
    double frequency() const { return freq_; }
    const std::vector<double>& table_times() const { return times_; }
    const std::vector<double>& table_values() const { return values_; }
    std::string name() const;

private:
    Kind kind_ = Kind::SineOnset;
    double freq_ = 1.0;
    std::vector<double> times_;
    std::vector<double> values_;
};

/// Force y-directed at the origin, spatial profile a Gaussian of width eps
/// whose Fourier transform is exp(-eps^2 |xi|^2).
struct Excitation {
    double eps_cm = 0.1;
    TimeProfile profile = TimeProfile::sine_onset();

    void validate() const;
};

}  // namespace sfio
