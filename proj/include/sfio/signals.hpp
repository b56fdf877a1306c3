#pragma once

#include <cstddef>
#include <vector>

namespace sfio {

struct Sensor {
    int id = 0;
    double x = 0.0;  // cm
    double y = 0.0;  // cm
};

using SensorArray = std::vector<Sensor>;

/// The eight sensors around the source at (+-1.17 | 0, +-1.17 | 0) cm, ids 1..8.
SensorArray reference_sensors();

/// Throws std::invalid_argument on empty arrays or duplicate ids.
void validate_sensors(const SensorArray& sensors);

std::size_t sensor_index(const SensorArray& sensors, int id);

/// Displacement history at one sensor. t in us, ux/uy in cm.
struct SignalRecord {
    int sensor_id = 0;
    std::vector<double> t;
    std::vector<double> ux;
    std::vector<double> uy;

    std::size_t size() const { return t.size(); }
    void validate() const;
};

}  // namespace sfio
