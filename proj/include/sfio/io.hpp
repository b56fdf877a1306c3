#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sfio/damage_test.hpp"
#include "sfio/estimation.hpp"
#include "sfio/random_field.hpp"
#include "sfio/signals.hpp"

namespace sfio {

/// CSV with header `t_us,sensor_id,ux_cm,uy_cm`; rows grouped by sensor.
void write_signals_csv(const std::string& path, const std::vector<SignalRecord>& signals);
std::vector<SignalRecord> read_signals_csv(const std::string& path);

/// Directory holding sensor_<id>.csv per sensor plus manifest.json. The
/// manifest is a JSON object; its "sensors" entry is filled in here.
void write_signal_archive(const std::string& dir, const std::vector<SignalRecord>& signals,
                          const std::string& manifest_json = "{}");
std::vector<SignalRecord> read_signal_archive(const std::string& dir);
std::string read_manifest(const std::string& dir);

/// Field as CSV rows x,y,value.
void write_field_csv(const std::string& path, const FieldRealization& field);
/// Binary grid: "SFIOGRID" magic, version, nx, ny, dx, dy, x0, y0, units, values (little endian).
void write_field_binary(const std::string& path, const FieldRealization& field);
FieldRealization read_field_binary(const std::string& path);

/// null_features.bin (raw matrix) plus null_manifest.json (layout, seeds, medium, N_MC).
void write_null_sample(const std::string& dir, const NullSample& null, const std::string& extra_json = "{}");
NullSample read_null_sample(const std::string& dir);

std::string test_report_json(const TestReport& report, const FeatureLayout& layout);

struct CalibrationSet {
    CalibrationCurve f;
    CalibrationCurve g;
    double sigma_ref = 3.5;
    std::uint64_t seed = 0;
    std::size_t samples_per_point = 0;
    /// (sigma_E, sigma_E0) pairs of the linearity sweep, GPa; may be empty.
    std::vector<std::pair<double, double>> sigma_sweep;
};
std::string calibration_json(const CalibrationSet& set);
CalibrationSet calibration_from_json(const std::string& text);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace sfio
