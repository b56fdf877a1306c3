#include <gtest/gtest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "sfio/config.hpp"
#include "sfio/io.hpp"

using namespace sfio;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("sfio_" + name);
    std::filesystem::remove_all(p);
    return p;
}

std::string error_of(const std::string& json) {
    try {
        config_from_json(json);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

std::vector<SignalRecord> sample_signals() {
    std::vector<SignalRecord> s(2);
    for (int j = 0; j < 2; ++j) {
        s[j].sensor_id = j + 3;
        for (int n = 1; n <= 5; ++n) {
            s[j].t.push_back(0.05 * n);
            s[j].ux.push_back(1e-7 / 3.0 * n * (j + 1));
            s[j].uy.push_back(-0.1 / 7.0 * n);
        }
    }
    return s;
}

}  // namespace

TEST(Config, DefaultsRoundTripLosslessly) {
    const RunConfig c = reference_config();
    const std::string text = config_to_json(c);
    EXPECT_EQ(config_to_json(config_from_json(text)), text);
    EXPECT_EQ(config_hash(config_from_json(text)), config_hash(c));
}

TEST(Config, PartialDocumentKeepsDefaults) {
    const RunConfig c = config_from_json(R"({"material": {"E_gpa": 60.0}, "seed": 5})");
    EXPECT_EQ(c.material.E_gpa, 60.0);
    EXPECT_EQ(c.material.nu, 0.35);
    EXPECT_EQ(c.seed, 5u);
    EXPECT_EQ(c.sensors.size(), 8u);
    EXPECT_NE(config_hash(c), config_hash(reference_config()));
}

TEST(Config, UnknownKeysRejected) {
    EXPECT_NE(error_of(R"({"materail": {}})").find("materail"), std::string::npos);
    EXPECT_NE(error_of(R"({"material": {"young": 1}})").find("young"), std::string::npos);
}

TEST(Config, ValidationNamesTheField) {
    EXPECT_NE(error_of(R"({"material": {"nu": 0.7}})").find("material.nu"), std::string::npos);
    EXPECT_NE(error_of(R"({"testing": {"n_mc": 10}})").find("testing.n_mc"), std::string::npos);
    EXPECT_NE(error_of(R"({"defaults": "other"})").find("defaults"), std::string::npos);
    EXPECT_NE(error_of("{not json").find("malformed"), std::string::npos);
}

TEST(Config, DerivedSettings) {
    const RunConfig c = reference_config();
    EXPECT_EQ(c.quadrature().times().size(), 140u);
    EXPECT_EQ(c.fd_grid().nx, 256u);
    EXPECT_EQ(c.medium_spec().E.sigma, 3.5);
    EXPECT_EQ(c.fit_options().E_init, 50.0);
}

TEST(Config, FileLoading) {
    const auto dir = scratch("config");
    write_text((dir / "c.json").string(), R"({"excitation": {"eps_cm": 0.05}})");
    EXPECT_EQ(load_config((dir / "c.json").string()).eps_cm, 0.05);
    EXPECT_THROW(load_config((dir / "missing.json").string()), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST(SignalIo, CsvRoundTripIsExact) {
    const auto dir = scratch("csv");
    write_signals_csv((dir / "s.csv").string(), sample_signals());
    const auto back = read_signals_csv((dir / "s.csv").string());
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t j = 0; j < 2; ++j) {
        EXPECT_EQ(back[j].sensor_id, sample_signals()[j].sensor_id);
        EXPECT_EQ(back[j].t, sample_signals()[j].t);
        EXPECT_EQ(back[j].ux, sample_signals()[j].ux);
        EXPECT_EQ(back[j].uy, sample_signals()[j].uy);
    }
    std::filesystem::remove_all(dir);
}

TEST(SignalIo, ArchiveRoundTrip) {
    const auto dir = scratch("archive");
    write_signal_archive(dir.string(), sample_signals(), R"({"mode": "test"})");
    const auto back = read_signal_archive(dir.string());
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].uy, sample_signals()[1].uy);
    EXPECT_NE(read_manifest(dir.string()).find("\"mode\""), std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST(SignalIo, MissingFileThrows) {
    EXPECT_THROW(read_signals_csv("/nonexistent/sfio.csv"), std::runtime_error);
}

TEST(CalibrationIo, JsonRoundTrip) {
    CalibrationSet set;
    set.f.kind = CurveKind::F;
    set.f.c0 = 1.8415;
    set.f.c1 = 0.2132;
    set.g.kind = CurveKind::G;
    set.g.c0 = 2.7503;
    set.g.c1 = 0.5790;
    set.g.support = {{1.0, 2.7}, {3.0, 5.1}};
    set.seed = 9;
    set.samples_per_point = 20;
    set.sigma_sweep = {{0.7, 0.5}, {3.5, 2.4}};
    const CalibrationSet back = calibration_from_json(calibration_json(set));
    EXPECT_EQ(back.f.c0, set.f.c0);
    EXPECT_EQ(back.g.c1, set.g.c1);
    EXPECT_EQ(back.g.support, set.g.support);
    EXPECT_EQ(back.sigma_ref, 3.5);
    EXPECT_EQ(back.seed, 9u);
    EXPECT_EQ(back.sigma_sweep, set.sigma_sweep);
}
