#include "sfio/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sfio {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw std::runtime_error("cannot read " + path);
    return in;
}

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& in, const std::string& path) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("truncated file " + path);
    return v;
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(what + ": malformed JSON: " + e.what());
    }
}

json medium_json(const MediumSpec& m) {
    return {{"E", {{"mean", m.E.mean}, {"sigma", m.E.sigma}, {"corr_length", m.E.corr_length}}},
            {"nu", {{"mean", m.nu.mean}, {"sigma", m.nu.sigma}, {"corr_length", m.nu.corr_length}}},
            {"rho", m.rho},
            {"field_grid",
             {{"nx", m.field_grid.nx},
              {"ny", m.field_grid.ny},
              {"dx", m.field_grid.dx},
              {"dy", m.field_grid.dy},
              {"x0", m.field_grid.x0},
              {"y0", m.field_grid.y0}}}};
}

MediumSpec medium_from(const json& j) {
    MediumSpec m;
    m.E = {j.at("E").at("mean"), j.at("E").at("sigma"), j.at("E").at("corr_length"), 0};
    m.nu = {j.at("nu").at("mean"), j.at("nu").at("sigma"), j.at("nu").at("corr_length"), 0};
    m.rho = j.at("rho");
    const json& g = j.at("field_grid");
    m.field_grid.nx = g.at("nx");
    m.field_grid.ny = g.at("ny");
    m.field_grid.dx = g.at("dx");
    m.field_grid.dy = g.at("dy");
    m.field_grid.x0 = g.at("x0");
    m.field_grid.y0 = g.at("y0");
    return m;
}

json sensors_json(const SensorArray& sensors) {
    json arr = json::array();
    for (const Sensor& s : sensors) arr.push_back({{"id", s.id}, {"x_cm", s.x}, {"y_cm", s.y}});
    return arr;
}

SensorArray sensors_from(const json& arr) {
    SensorArray out;
    for (const json& s : arr) out.push_back({s.at("id"), s.at("x_cm"), s.at("y_cm")});
    return out;
}

json curve_json(const CalibrationCurve& c) {
    json support = json::array();
    for (const auto& [L, y] : c.support) support.push_back({L, y});
    return {{"kind", to_string(c.kind)}, {"c0", c.c0}, {"c1", c.c1}, {"residual", c.residual}, {"support", support}};
}

CalibrationCurve curve_from(const json& j) {
    CalibrationCurve c;
    c.kind = curve_kind_from_string(j.at("kind"));
    c.c0 = j.at("c0");
    c.c1 = j.at("c1");
    c.residual = j.value("residual", 0.0);
    for (const json& p : j.value("support", json::array())) c.support.emplace_back(p.at(0), p.at(1));
    c.validate();
    return c;
}

}  // namespace

std::string read_text(const std::string& path) {
    std::ifstream in = open_in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out = open_out(path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_signals_csv(const std::string& path, const std::vector<SignalRecord>& signals) {
    std::ofstream out = open_out(path);
    out << "t_us,sensor_id,ux_cm,uy_cm\n";
    for (const SignalRecord& s : signals) {
        s.validate();
        for (std::size_t n = 0; n < s.size(); ++n)
            out << fmt(s.t[n]) << ',' << s.sensor_id << ',' << fmt(s.ux[n]) << ',' << fmt(s.uy[n]) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<SignalRecord> read_signals_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t_us,sensor_id,ux_cm,uy_cm", 0) != 0)
        throw std::runtime_error(path + ": missing header t_us,sensor_id,ux_cm,uy_cm");
    std::vector<SignalRecord> out;
    std::map<int, std::size_t> slot;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string f[4];
        for (auto& field : f)
            if (!std::getline(ss, field, ','))
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 4 columns");
        try {
            const int id = std::stoi(f[1]);
            auto it = slot.find(id);
            if (it == slot.end()) {
                it = slot.emplace(id, out.size()).first;
                out.push_back({});
                out.back().sensor_id = id;
            }
            SignalRecord& rec = out[it->second];
            rec.t.push_back(std::stod(f[0]));
            rec.ux.push_back(std::stod(f[2]));
            rec.uy.push_back(std::stod(f[3]));
        } catch (const std::logic_error&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": not a number");
        }
    }
    for (const SignalRecord& r : out) r.validate();
    return out;
}

void write_signal_archive(const std::string& dir, const std::vector<SignalRecord>& signals,
                          const std::string& manifest_json) {
    fs::create_directories(dir);
    json manifest = parse_json(manifest_json, "manifest");
    json files = json::array();
    for (const SignalRecord& s : signals) {
        const std::string name = "sensor_" + std::to_string(s.sensor_id) + ".csv";
        write_signals_csv((fs::path(dir) / name).string(), {s});
        files.push_back({{"sensor_id", s.sensor_id}, {"file", name}, {"samples", s.size()}});
    }
    manifest["signals"] = files;
    write_text((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

std::string read_manifest(const std::string& dir) { return read_text((fs::path(dir) / "manifest.json").string()); }

std::vector<SignalRecord> read_signal_archive(const std::string& dir) {
    const json manifest = parse_json(read_manifest(dir), dir + "/manifest.json");
    if (!manifest.contains("signals")) throw std::runtime_error(dir + "/manifest.json: no signals entry");
    std::vector<SignalRecord> out;
    for (const json& entry : manifest.at("signals")) {
        auto recs = read_signals_csv((fs::path(dir) / entry.at("file").get<std::string>()).string());
        out.insert(out.end(), recs.begin(), recs.end());
    }
    return out;
}

void write_field_csv(const std::string& path, const FieldRealization& field) {
    std::ofstream out = open_out(path);
    out << "x_cm,y_cm,value\n";
    for (std::size_t j = 0; j < field.grid.ny; ++j)
        for (std::size_t i = 0; i < field.grid.nx; ++i)
            out << fmt(field.grid.x(i)) << ',' << fmt(field.grid.y(j)) << ',' << fmt(field.at(i, j)) << '\n';
}

void write_field_binary(const std::string& path, const FieldRealization& field) {
    if (field.values.size() != field.grid.size()) throw std::invalid_argument("field: value count mismatch");
    std::ofstream out = open_out(path, true);
    out.write("SFIOGRID", 8);
    put<std::uint32_t>(out, 1);
    put<std::uint64_t>(out, field.grid.nx);
    put<std::uint64_t>(out, field.grid.ny);
    for (double v : {field.grid.dx, field.grid.dy, field.grid.x0, field.grid.y0}) put(out, v);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(field.units.size()));
    out.write(field.units.data(), static_cast<std::streamsize>(field.units.size()));
    out.write(reinterpret_cast<const char*>(field.values.data()),
              static_cast<std::streamsize>(field.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

FieldRealization read_field_binary(const std::string& path) {
    std::ifstream in = open_in(path, true);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "SFIOGRID", 8) != 0) throw std::runtime_error(path + ": not a grid file");
    if (take<std::uint32_t>(in, path) != 1) throw std::runtime_error(path + ": unsupported grid version");
    FieldRealization f;
    f.grid.nx = take<std::uint64_t>(in, path);
    f.grid.ny = take<std::uint64_t>(in, path);
    f.grid.dx = take<double>(in, path);
    f.grid.dy = take<double>(in, path);
    f.grid.x0 = take<double>(in, path);
    f.grid.y0 = take<double>(in, path);
    f.units.resize(take<std::uint32_t>(in, path));
    in.read(f.units.data(), static_cast<std::streamsize>(f.units.size()));
    f.values.resize(f.grid.size());
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated file " + path);
    return f;
}

void write_null_sample(const std::string& dir, const NullSample& null, const std::string& extra_json) {
    fs::create_directories(dir);
    const std::string bin = (fs::path(dir) / "null_features.bin").string();
    {
        std::ofstream out = open_out(bin, true);
        out.write("SFIONULL", 8);
        put<std::uint32_t>(out, 1);
        put<std::uint64_t>(out, null.size());
        put<std::uint64_t>(out, null.layout().size());
        out.write(reinterpret_cast<const char*>(null.raw_values().data()),
                  static_cast<std::streamsize>(null.raw_values().size() * sizeof(double)));
        if (!out) throw std::runtime_error("write failed: " + bin);
    }
    json layout = json::array();
    for (const FeatureSpec& f : null.layout().features)
        layout.push_back({{"sensor_id", f.sensor_id},
                          {"direction", f.direction == 1 ? "x" : "y"},
                          {"bin", f.bin},
                          {"quantity", f.quantity == Quantity::Amplitude ? "amplitude" : "phase"}});
    const NullManifest& m = null.manifest();
    json manifest = parse_json(extra_json, "null manifest");
    manifest["n_mc"] = m.n_mc;
    manifest["root_seed"] = m.root_seed;
    manifest["seed_rule"] = "sample k uses derive_seed(root_seed, k)";
    manifest["medium"] = medium_json(m.medium);
    manifest["excitation"] = {{"eps_cm", m.excitation.eps_cm},
                              {"profile", m.excitation.profile.name()},
                              {"freq_mhz", m.excitation.profile.frequency()}};
    manifest["quadrature"] = {{"n_xi", m.quadrature.n_xi}, {"n_eta", m.quadrature.n_eta},
                              {"size_x", m.quadrature.size_x}, {"size_y", m.quadrature.size_y},
                              {"dt", m.quadrature.dt}, {"t_max", m.quadrature.t_max}};
    manifest["sensors"] = sensors_json(m.sensors);
    manifest["layout"] = layout;
    manifest["features_file"] = "null_features.bin";
    write_text((fs::path(dir) / "null_manifest.json").string(), manifest.dump(2) + "\n");
}

NullSample read_null_sample(const std::string& dir) {
    const std::string mpath = (fs::path(dir) / "null_manifest.json").string();
    const json manifest = parse_json(read_text(mpath), mpath);
    FeatureLayout layout;
    for (const json& f : manifest.at("layout")) {
        FeatureSpec s;
        s.sensor_id = f.at("sensor_id");
        s.direction = f.at("direction") == "x" ? 1 : 2;
        s.bin = f.at("bin");
        s.quantity = f.at("quantity") == "amplitude" ? Quantity::Amplitude : Quantity::Phase;
        layout.features.push_back(s);
    }
    NullManifest m;
    m.n_mc = manifest.at("n_mc");
    m.root_seed = manifest.at("root_seed");
    m.medium = medium_from(manifest.at("medium"));
    m.excitation.eps_cm = manifest.at("excitation").at("eps_cm");
    m.excitation.profile = TimeProfile::sine_onset(manifest.at("excitation").value("freq_mhz", 1.0));
    const json& q = manifest.at("quadrature");
    m.quadrature.n_xi = q.at("n_xi");
    m.quadrature.n_eta = q.at("n_eta");
    m.quadrature.size_x = q.at("size_x");
    m.quadrature.size_y = q.at("size_y");
    m.quadrature.dt = q.at("dt");
    m.quadrature.t_max = q.at("t_max");
    m.sensors = sensors_from(manifest.at("sensors"));

    const std::string bin = (fs::path(dir) / "null_features.bin").string();
    std::ifstream in = open_in(bin, true);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "SFIONULL", 8) != 0) throw std::runtime_error(bin + ": not a null-sample file");
    if (take<std::uint32_t>(in, bin) != 1) throw std::runtime_error(bin + ": unsupported version");
    const auto n = take<std::uint64_t>(in, bin);
    const auto nf = take<std::uint64_t>(in, bin);
    if (nf != layout.size() || n != m.n_mc) throw std::runtime_error(bin + ": shape disagrees with the manifest");
    std::vector<double> raw(n * nf);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated file " + bin);
    return NullSample(std::move(layout), std::move(raw), std::move(m));
}

std::string test_report_json(const TestReport& r, const FeatureLayout& layout) {
    json features = json::array();
    for (std::size_t m = 0; m < r.features.size(); ++m) {
        const FeatureSpec& f = layout.features[r.features[m]];
        features.push_back({{"index", r.features[m]},
                            {"sensor_id", f.sensor_id},
                            {"direction", f.direction == 1 ? "x" : "y"},
                            {"bin", f.bin},
                            {"value", r.feature_values[m]},
                            {"p", r.feature_p[m]},
                            {"flagged", static_cast<bool>(r.flagged[m])}});
    }
    json sensors = json::array();
    for (std::size_t s = 0; s < r.sensor_ids.size(); ++s)
        sensors.push_back({{"sensor_id", r.sensor_ids[s]}, {"p", r.sensor_p[s]}});
    json decisions = json::array();
    for (std::size_t a = 0; a < r.alphas.size(); ++a)
        decisions.push_back({{"alpha", r.alphas[a]}, {"reject", static_cast<bool>(r.reject[a])}});
    return json{{"test", to_string(r.kind)},
                {"quantity", test_quantity(r.kind) == Quantity::Amplitude ? "amplitude" : "phase"},
                {"overall_p", r.overall_p},
                {"critical_sensor", r.critical_sensor},
                {"sensors", sensors},
                {"features", features},
                {"decisions", decisions}}
        .dump(2);
}

std::string calibration_json(const CalibrationSet& set) {
    CalibrationCurve h = set.f;
    h.kind = CurveKind::H;
    h.c0 = set.f.c0 / set.sigma_ref;
    h.support.clear();
    json sweep = json::array();
    for (const auto& [sigma, sigma0] : set.sigma_sweep) sweep.push_back({sigma, sigma0});
    return json{{"sigma_ref_gpa", set.sigma_ref},
                {"seed", set.seed},
                {"sigma_sweep", sweep},
                {"samples_per_point", set.samples_per_point},
                {"f", curve_json(set.f)},
                {"g", curve_json(set.g)},
                {"h", curve_json(h)}}
        .dump(2);
}

CalibrationSet calibration_from_json(const std::string& text) {
    const json j = parse_json(text, "calibration");
    CalibrationSet s;
    try {
        s.sigma_ref = j.at("sigma_ref_gpa");
        s.seed = j.value("seed", std::uint64_t{0});
        s.samples_per_point = j.value("samples_per_point", std::size_t{0});
        s.f = curve_from(j.at("f"));
        s.g = curve_from(j.at("g"));
        for (const json& p : j.value("sigma_sweep", json::array())) s.sigma_sweep.emplace_back(p.at(0), p.at(1));
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("calibration: ") + e.what());
    }
    return s;
}

}  // namespace sfio
