#include "sfio/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sfio {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& constraint) {
    throw std::invalid_argument("config: " + field + " " + constraint);
}

void require_positive(double v, const std::string& field) {
    if (!(v > 0.0) || !std::isfinite(v)) bad(field, "must be a finite number > 0");
}

void require_positive_list(const std::vector<double>& v, const std::string& field) {
    if (v.empty()) bad(field, "must not be empty");
    for (double x : v) require_positive(x, field + "[]");
}

std::string scheme_name(TimeScheme s) { return s == TimeScheme::CentralDifference ? "central" : "backward-euler"; }

TimeScheme scheme_from_name(const std::string& s) {
    if (s == "central") return TimeScheme::CentralDifference;
    if (s == "backward-euler") return TimeScheme::BackwardEuler;
    bad("reference.scheme", "must be \"central\" or \"backward-euler\"");
}

/// Reads keys from one JSON object and rejects any it did not consume.
class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) bad(path_.empty() ? "document" : path_, "must be a JSON object");
    }
    ~Reader() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) bad(name(it.key()), "is not a recognized key");
    }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!obj_.contains(key)) return;
        try {
            out = obj_.at(key).get<T>();
        } catch (const json::exception&) {
            bad(name(key), "has the wrong type");
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key);
    }
    const json& at(const std::string& key) const { return obj_.at(key); }
    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace

void RunConfig::validate() const {
    require_positive(domain_size_cm, "domain.size_cm");
    if (grid_n < 2) bad("grid.n", "must be >= 2");
    require_positive(dt_us, "time.dt_us");
    require_positive(tmax_us, "time.tmax_us");
    if (tmax_us < dt_us) bad("time.tmax_us", "must be >= time.dt_us");
    require_positive(eps_cm, "excitation.eps_cm");
    require_positive(source_freq_mhz, "excitation.freq_mhz");
    require_positive(material.E_gpa, "material.E_gpa");
    if (!(material.nu > 0.0 && material.nu < 0.5)) bad("material.nu", "must lie in (0, 0.5)");
    require_positive(material.rho, "material.rho");
    if (sensors.empty()) bad("sensors", "must list at least one sensor");
    try {
        validate_sensors(sensors);
    } catch (const std::invalid_argument& e) {
        bad("sensors", std::string("are invalid: ") + e.what());
    }
    const double half = 0.5 * domain_size_cm;
    for (const Sensor& s : sensors)
        if (!(std::abs(s.x) < half && std::abs(s.y) < half))
            bad("sensors[id=" + std::to_string(s.id) + "]", "must lie inside the domain");
    if (!(sigma_E_gpa >= 0.0)) bad("fields.sigma_E_gpa", "must be >= 0");
    require_positive(L_E_cm, "fields.L_E_cm");
    if (!(sigma_nu >= 0.0)) bad("fields.sigma_nu", "must be >= 0");
    require_positive(L_nu_cm, "fields.L_nu_cm");
    if (field_grid_n < 2) bad("fields.grid_n", "must be >= 2");
    if (!(fd_dt_us >= 0.0)) bad("reference.dt_us", "must be >= 0 (0 selects automatically)");
    try {
        DamageScenario sc = DamageScenario::standard(ScenarioKind::S4);
        sc.crack = crack;
        sc.validate(fd_grid());
    } catch (const std::invalid_argument& e) {
        bad("reference.crack", std::string("is invalid: ") + e.what());
    }
    require_positive(E_init_gpa, "estimation.E_init_gpa");
    if (!(nu_init > 0.0 && nu_init < 0.5)) bad("estimation.nu_init", "must lie in (0, 0.5)");
    if (estimation_samples == 0) bad("estimation.samples", "must be >= 1");
    require_positive_list(calibration_L_cm, "estimation.calibration_L_cm");
    require_positive_list(calibration_sigma_rel, "estimation.calibration_sigma_rel");
    if (calibration_samples < 2) bad("estimation.calibration_samples", "must be >= 2");
    require_positive(sigma_ref_gpa, "estimation.sigma_ref_gpa");
    if (n_mc < 100) bad("testing.n_mc", "must be >= 100");
    if (alphas.empty()) bad("testing.alphas", "must not be empty");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0)) bad("testing.alphas[]", "must lie in (0, 1)");
    if (repetitions == 0) bad("testing.repetitions", "must be >= 1");
    require_positive_list(sweep_sigma_rel, "testing.sweep_sigma_rel");
    require_positive_list(sweep_L_cm, "testing.sweep_L_cm");
    if (threads == 0) bad("threads", "must be >= 1");
}

QuadratureGrid RunConfig::quadrature() const {
    QuadratureGrid q;
    q.n_xi = q.n_eta = grid_n;
    q.size_x = q.size_y = domain_size_cm;
    q.dt = dt_us;
    q.t_max = tmax_us;
    return q;
}

Excitation RunConfig::excitation() const {
    Excitation ex;
    ex.eps_cm = eps_cm;
    ex.profile = TimeProfile::sine_onset(source_freq_mhz);
    return ex;
}

GridSpec RunConfig::fd_grid() const { return default_fd_grid(domain_size_cm, grid_n); }

FdOptions RunConfig::fd_options() const {
    FdOptions o;
    o.scheme = fd_scheme;
    o.dt = fd_dt_us;
    o.output_dt = dt_us;
    o.t_max = tmax_us;
    if (fd_source_eps >= 0.0) o.source_eps = fd_source_eps;
    return o;
}

MediumSpec RunConfig::medium_spec() const {
    MediumSpec m;
    m.E = {material.E_gpa, sigma_E_gpa, L_E_cm, 0};
    m.nu = {material.nu, sigma_nu, L_nu_cm, 0};
    m.rho = material.rho;
    m.field_grid = MediumSpec::default_field_grid(domain_size_cm, field_grid_n);
    return m;
}

FitOptions RunConfig::fit_options() const {
    FitOptions f;
    f.E_init = E_init_gpa;
    f.nu_init = nu_init;
    f.rho = material.rho;
    f.threads = threads;
    return f;
}

SpecimenOptions RunConfig::specimen_options() const {
    SpecimenOptions s;
    s.excitation = excitation();
    s.sensors = sensors;
    s.fd = fd_options();
    s.fd_grid = fd_grid();
    s.threads = threads;
    return s;
}

RunConfig reference_config() { return RunConfig{}; }

RunConfig config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    RunConfig c = reference_config();
    {
        Reader r(doc, "");
        std::string preset = "reference";
        r.get("defaults", preset);
        if (preset != "reference") bad("defaults", "must be \"reference\"");
        if (r.has("domain")) {
            Reader d(r.at("domain"), "domain");
            d.get("size_cm", c.domain_size_cm);
        }
        if (r.has("grid")) {
            Reader g(r.at("grid"), "grid");
            g.get("n", c.grid_n);
        }
        if (r.has("time")) {
            Reader t(r.at("time"), "time");
            t.get("dt_us", c.dt_us);
            t.get("tmax_us", c.tmax_us);
        }
        if (r.has("excitation")) {
            Reader e(r.at("excitation"), "excitation");
            e.get("eps_cm", c.eps_cm);
            e.get("freq_mhz", c.source_freq_mhz);
        }
        if (r.has("material")) {
            Reader m(r.at("material"), "material");
            m.get("E_gpa", c.material.E_gpa);
            m.get("nu", c.material.nu);
            m.get("rho", c.material.rho);
        }
        if (r.has("sensors")) {
            const json& arr = r.at("sensors");
            if (!arr.is_array()) bad("sensors", "must be an array");
            c.sensors.clear();
            for (std::size_t k = 0; k < arr.size(); ++k) {
                Reader s(arr[k], "sensors[" + std::to_string(k) + "]");
                Sensor sensor;
                if (!arr[k].contains("id") || !arr[k].contains("x_cm") || !arr[k].contains("y_cm"))
                    bad("sensors[" + std::to_string(k) + "]", "needs id, x_cm and y_cm");
                s.get("id", sensor.id);
                s.get("x_cm", sensor.x);
                s.get("y_cm", sensor.y);
                c.sensors.push_back(sensor);
            }
        }
        if (r.has("fields")) {
            Reader f(r.at("fields"), "fields");
            f.get("sigma_E_gpa", c.sigma_E_gpa);
            f.get("L_E_cm", c.L_E_cm);
            f.get("sigma_nu", c.sigma_nu);
            f.get("L_nu_cm", c.L_nu_cm);
            f.get("grid_n", c.field_grid_n);
        }
        if (r.has("reference")) {
            Reader f(r.at("reference"), "reference");
            std::string scheme = scheme_name(c.fd_scheme);
            f.get("scheme", scheme);
            c.fd_scheme = scheme_from_name(scheme);
            f.get("dt_us", c.fd_dt_us);
            f.get("source_eps_cm", c.fd_source_eps);
            if (f.has("crack")) {
                Reader k(f.at("crack"), "reference.crack");
                k.get("center_x_cm", c.crack.center_x);
                k.get("center_y_cm", c.crack.center_y);
                k.get("width_cm", c.crack.width);
                k.get("height_cm", c.crack.height);
                k.get("angle_deg", c.crack.angle_deg);
                k.get("E_gpa", c.crack.E_gpa);
            }
        }
        if (r.has("estimation")) {
            Reader e(r.at("estimation"), "estimation");
            e.get("E_init_gpa", c.E_init_gpa);
            e.get("nu_init", c.nu_init);
            e.get("samples", c.estimation_samples);
            e.get("calibration_L_cm", c.calibration_L_cm);
            e.get("calibration_sigma_rel", c.calibration_sigma_rel);
            e.get("calibration_samples", c.calibration_samples);
            e.get("sigma_ref_gpa", c.sigma_ref_gpa);
        }
        if (r.has("testing")) {
            Reader t(r.at("testing"), "testing");
            t.get("n_mc", c.n_mc);
            t.get("alphas", c.alphas);
            t.get("repetitions", c.repetitions);
            t.get("sweep_sigma_rel", c.sweep_sigma_rel);
            t.get("sweep_L_cm", c.sweep_L_cm);
        }
        r.get("seed", c.seed);
        r.get("threads", c.threads);
        r.get("output_dir", c.output_dir);
    }
    c.validate();
    return c;
}

std::string config_to_json(const RunConfig& c) {
    json sensors = json::array();
    for (const Sensor& s : c.sensors) sensors.push_back({{"id", s.id}, {"x_cm", s.x}, {"y_cm", s.y}});
    json doc = {
        {"defaults", "reference"},
        {"domain", {{"size_cm", c.domain_size_cm}}},
        {"grid", {{"n", c.grid_n}}},
        {"time", {{"dt_us", c.dt_us}, {"tmax_us", c.tmax_us}}},
        {"excitation", {{"eps_cm", c.eps_cm}, {"freq_mhz", c.source_freq_mhz}}},
        {"material", {{"E_gpa", c.material.E_gpa}, {"nu", c.material.nu}, {"rho", c.material.rho}}},
        {"sensors", sensors},
        {"fields",
         {{"sigma_E_gpa", c.sigma_E_gpa},
          {"L_E_cm", c.L_E_cm},
          {"sigma_nu", c.sigma_nu},
          {"L_nu_cm", c.L_nu_cm},
          {"grid_n", c.field_grid_n}}},
        {"reference",
         {{"scheme", scheme_name(c.fd_scheme)},
          {"dt_us", c.fd_dt_us},
          {"source_eps_cm", c.fd_source_eps},
          {"crack",
           {{"center_x_cm", c.crack.center_x},
            {"center_y_cm", c.crack.center_y},
            {"width_cm", c.crack.width},
            {"height_cm", c.crack.height},
            {"angle_deg", c.crack.angle_deg},
            {"E_gpa", c.crack.E_gpa}}}}},
        {"estimation",
         {{"E_init_gpa", c.E_init_gpa},
          {"nu_init", c.nu_init},
          {"samples", c.estimation_samples},
          {"calibration_L_cm", c.calibration_L_cm},
          {"calibration_sigma_rel", c.calibration_sigma_rel},
          {"calibration_samples", c.calibration_samples},
          {"sigma_ref_gpa", c.sigma_ref_gpa}}},
        {"testing",
         {{"n_mc", c.n_mc},
          {"alphas", c.alphas},
          {"repetitions", c.repetitions},
          {"sweep_sigma_rel", c.sweep_sigma_rel},
          {"sweep_L_cm", c.sweep_L_cm}}},
        {"seed", c.seed},
        {"threads", c.threads},
        {"output_dir", c.output_dir},
    };
    return doc.dump(2);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

std::string config_hash(const RunConfig& config) {
    RunConfig canonical = config;
    canonical.threads = 1;  // worker count never changes results
    const std::string text = config_to_json(canonical);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace sfio
