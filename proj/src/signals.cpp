#include "sfio/signals.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "sfio/excitation.hpp"

namespace sfio {

SensorArray reference_sensors() {
    constexpr double d = 1.17;
    return {{1, -d, -d}, {2, 0.0, -d}, {3, d, -d}, {4, -d, 0.0},
            {5, d, 0.0},  {6, -d, d},   {7, 0.0, d}, {8, d, d}};
}

void validate_sensors(const SensorArray& sensors) {
    if (sensors.empty()) throw std::invalid_argument("sensors: list is empty");
    std::set<int> ids;
    for (const Sensor& s : sensors) {
        if (!std::isfinite(s.x) || !std::isfinite(s.y))
            throw std::invalid_argument("sensors: non-finite coordinate for id " + std::to_string(s.id));
        if (!ids.insert(s.id).second)
            throw std::invalid_argument("sensors: duplicate id " + std::to_string(s.id));
    }
}

std::size_t sensor_index(const SensorArray& sensors, int id) {
    for (std::size_t i = 0; i < sensors.size(); ++i)
        if (sensors[i].id == id) return i;
    throw std::invalid_argument("unknown sensor id " + std::to_string(id));
}

void SignalRecord::validate() const {
    if (ux.size() != t.size() || uy.size() != t.size())
        throw std::invalid_argument("signal record: array lengths differ for sensor " +
                                    std::to_string(sensor_id));
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw std::invalid_argument("signal record: times not strictly increasing");
}

// ---------------------------------------------------------------------------

TimeProfile TimeProfile::sine_onset(double freq_mhz) {
    if (!std::isfinite(freq_mhz)) throw std::invalid_argument("sine onset: frequency not finite");
    TimeProfile p;
    p.kind_ = Kind::SineOnset;
    p.freq_ = freq_mhz;
    return p;
}

TimeProfile TimeProfile::tabulated(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.empty())
        throw std::invalid_argument("tabulated profile: times/values must be non-empty and equal length");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("tabulated profile: times must increase");
    if (times.front() < 0.0) throw std::invalid_argument("tabulated profile: times must be >= 0");
    TimeProfile p;
    p.kind_ = Kind::Tabulated;
    p.times_ = std::move(times);
    p.values_ = std::move(values);
    return p;
}

TimeProfile TimeProfile::zero() {
    TimeProfile p;
    p.kind_ = Kind::Zero;
    return p;
}

double TimeProfile::operator()(double t) const {
    if (t < 0.0) return 0.0;
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::SineOnset:
            return std::sin(2.0 * M_PI * freq_ * t);
        case Kind::Tabulated: {
            if (t < times_.front() || t > times_.back()) return 0.0;
            auto it = std::upper_bound(times_.begin(), times_.end(), t);
            if (it == times_.end()) return values_.back();
            const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
            const std::size_t lo = hi - 1;
            const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
            return values_[lo] + w * (values_[hi] - values_[lo]);
        }
    }
    return 0.0;
}

std::string TimeProfile::name() const {
    switch (kind_) {
        case Kind::Zero: return "zero";
        case Kind::SineOnset: return "sine_onset";
        case Kind::Tabulated: return "tabulated";
    }
    return "unknown";
}

void Excitation::validate() const {
    if (!std::isfinite(eps_cm) || !(eps_cm > 0.0))
        throw std::invalid_argument("excitation: eps must be > 0");
}

}  // namespace sfio
