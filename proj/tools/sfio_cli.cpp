#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sfio/calibration.hpp"
#include "sfio/config.hpp"
#include "sfio/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sfio;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitReject = 2;

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::vector<double> alphas;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "JSON run configuration (defaults to the reference setup)");
    cmd->add_option("--seed", c.seed, "Root seed, overrides the config");
    cmd->add_option("--out", c.out, "Output directory, overrides the config");
    cmd->add_option("--threads", c.threads, "Worker cap; results do not depend on it");
    cmd->add_option("--alpha", c.alphas, "Significance level(s), overrides the config");
}

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config_path.empty() ? reference_config() : load_config(c.config_path);
    if (c.seed) cfg.seed = *c.seed;
    if (c.out) cfg.output_dir = *c.out;
    if (c.threads) cfg.threads = *c.threads;
    if (!c.alphas.empty()) cfg.alphas = c.alphas;
    cfg.validate();
    return cfg;
}

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

json manifest_base(const std::string& command, const RunConfig& cfg) {
    return {{"command", command},
            {"config_hash", config_hash(cfg)},
            {"seed", cfg.seed},
            {"config", json::parse(config_to_json(cfg))},
            {"created_utc", timestamp()}};
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string path_in(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.output_dir) / name).string(); }

json crack_json(const CrackRegion& c) {
    return {{"center_x_cm", c.center_x}, {"center_y_cm", c.center_y}, {"width_cm", c.width},
            {"height_cm", c.height},     {"angle_deg", c.angle_deg},  {"E_gpa", c.E_gpa}};
}

DamageScenario scenario_of(const RunConfig& cfg, const std::string& tag) {
    DamageScenario sc = DamageScenario::standard(scenario_from_string(tag));
    sc.crack = cfg.crack;
    return sc;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Common& common, const std::string& mode, const std::string& scenario_tag) {
    const RunConfig cfg = resolve(common);
    json manifest = manifest_base("simulate", cfg);
    manifest["mode"] = mode;
    std::vector<SignalRecord> signals;
    Stopwatch clock;
    if (mode == "fio-det") {
        signals = solve_deterministic(cfg.material, cfg.excitation(), cfg.quadrature(), cfg.sensors);
    } else if (mode == "fio-stoch") {
        const StochasticMedium medium = sample_medium(cfg.medium_spec(), cfg.seed);
        signals = solve_stochastic(medium, cfg.excitation(), cfg.quadrature(), cfg.sensors);
        manifest["sample_seed"] = cfg.seed;
    } else if (mode == "fd") {
        const DamageScenario sc = scenario_of(cfg, scenario_tag);
        const ScenarioMedium medium = make_scenario(sc, cfg.medium_spec(), cfg.seed, cfg.fd_grid());
        FdOptions fd = cfg.fd_options();
        fd.threads = cfg.threads;
        const FdResult result = fd_solve(medium.medium, cfg.excitation(), cfg.sensors, fd);
        signals = result.signals;
        manifest["scenario"] = {{"tag", to_string(sc.kind)}, {"E_mean_gpa", sc.E_mean_gpa}, {"specimen_seed", cfg.seed}};
        if (sc.kind == ScenarioKind::S4) {
            manifest["scenario"]["crack"] = crack_json(sc.crack);
            manifest["scenario"]["crack_nodes"] = medium.crack_nodes;
        }
        manifest["fd"] = {{"dt_us", result.dt}, {"steps", result.steps}};
        json snapped = json::array();
        for (const Sensor& s : result.snapped_sensors) snapped.push_back({{"id", s.id}, {"x_cm", s.x}, {"y_cm", s.y}});
        manifest["fd"]["snapped_sensors"] = snapped;
    } else {
        throw std::invalid_argument("--mode must be fio-det, fio-stoch or fd");
    }
    const double seconds = clock.seconds();
    manifest["wall_seconds"] = seconds;
    write_signal_archive(cfg.output_dir, signals, manifest.dump());
    std::printf("simulate %s: %zu sensors, %zu samples each, %.3f s -> %s\n", mode.c_str(), signals.size(),
                signals.empty() ? std::size_t{0} : signals.front().size(), seconds, cfg.output_dir.c_str());
    return kExitOk;
}

int cmd_calibrate(const Common& common) {
    const RunConfig cfg = resolve(common);
    Stopwatch clock;
    const FioPlan plan(cfg.excitation(), cfg.quadrature(), cfg.sensors);
    CalibrationOptions opt;
    opt.L_values = cfg.calibration_L_cm;
    for (double rel : cfg.calibration_sigma_rel) opt.sigma_values.push_back(rel * cfg.material.E_gpa);
    opt.L_sigma_sweep = cfg.L_E_cm;
    opt.sigma_ref = cfg.sigma_ref_gpa;
    opt.samples = cfg.calibration_samples;
    opt.seed = cfg.seed;
    const CalibrationRun run =
        calibrate_curves(cfg.medium_spec(), opt, plan, cfg.fit_options(), cfg.specimen_options(), reference_pair_groups());

    CalibrationSet set{run.f, run.g, run.sigma_ref, cfg.seed, cfg.calibration_samples, {}};
    for (const CalibrationPoint& p : run.sigma_sweep) set.sigma_sweep.emplace_back(p.sigma_E, p.sigma_E0);
    write_text(path_in(cfg, "calibration.json"), calibration_json(set) + "\n");

    std::ostringstream csv;
    csv << "sweep,sigma_E_gpa,L_E_cm,sigma_E0_gpa,L_E0_cm,L_degenerate,E_pooled_gpa,nu_pooled,sigma_nu0\n";
    auto row = [&](const char* sweep, const CalibrationPoint& p) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n", sweep, p.sigma_E, p.L_E,
                      p.sigma_E0, p.L_E0, p.L_degenerate ? 1 : 0, p.pooled.E, p.pooled.nu, p.sigma_nu0);
        csv << buf;
    };
    for (const CalibrationPoint& p : run.L_sweep) row("L", p);
    for (const CalibrationPoint& p : run.sigma_sweep) row("sigma", p);
    write_text(path_in(cfg, "calibration_points.csv"), csv.str());

    json manifest = manifest_base("calibrate-curves", cfg);
    manifest["seed_rule"] = "L point p: derive_seed(seed, p); sigma point p: derive_seed(seed, 1000 + p)";
    manifest["linearity"] = {{"intercept", run.linear_intercept}, {"slope", run.linear_slope}, {"r2", run.linear_r2}};
    manifest["wall_seconds"] = clock.seconds();
    write_text(path_in(cfg, "manifest.json"), manifest.dump(2) + "\n");
    std::printf("f: %.4f L^%.4f   g: %.4f L^%.4f   (%.1f s)\n", run.f.c0, run.f.c1, run.g.c0, run.g.c1,
                clock.seconds());
    return kExitOk;
}

int cmd_estimate(const Common& common, const std::vector<std::string>& archives, const std::string& curves_path) {
    const RunConfig cfg = resolve(common);
    if (archives.empty()) throw std::invalid_argument("--measured: at least one archive is required");
    Stopwatch clock;
    const FioPlan plan(cfg.excitation(), cfg.quadrature(), cfg.sensors);
    const FitOptions fit = cfg.fit_options();
    std::vector<std::vector<SignalRecord>> data;
    for (const std::string& a : archives) data.push_back(read_signal_archive(a));
    const StatisticsEstimate est = estimate_statistics(data, plan, fit, reference_pair_groups());

    json report = manifest_base("estimate", cfg);
    report["measured"] = archives;
    report["nominal"] = {{"E_gpa", est.pooled.E}, {"nu", est.pooled.nu}};
    report["sigma_E0_gpa"] = est.sigmas.sigma_E0;
    report["sigma_nu"] = est.sigmas.sigma_nu0;
    report["L_E0_cm"] = est.corr_length.L;
    report["L_degenerate"] = est.corr_length.degenerate;
    json cov = json::array();
    for (const CovariogramPoint& c : est.covariogram) cov.push_back({{"lag_cm", c.lag}, {"covariance", c.covariance}});
    report["covariogram"] = cov;
    if (!curves_path.empty()) {
        const CalibrationSet set = calibration_from_json(read_text(curves_path));
        const BiasCorrected bc = correct_bias(est.corr_length.L, est.sigmas.sigma_E0, set.f, set.g, set.sigma_ref);
        report["curves"] = curves_path;
        report["L_E_star_cm"] = bc.L_star;
        report["sigma_E_star_gpa"] = bc.sigma_star;
    }
    report["wall_seconds"] = clock.seconds();
    write_text(path_in(cfg, "estimation.json"), report.dump(2) + "\n");

    std::ostringstream csv;
    csv << "specimen,sensor_id,E_opt_gpa,nu_opt,objective,iterations,converged\n";
    for (std::size_t k = 0; k < est.fits.size(); ++k) {
        const EstimationResult& r = est.fits[k];
        char buf[256];
        std::snprintf(buf, sizeof buf, "%zu,all,%.17g,%.17g,%.17g,%zu,%d\n", k, r.E_opt, r.nu_opt, r.objective,
                      r.iterations, r.converged ? 1 : 0);
        csv << buf;
        for (const SensorFit& s : r.per_sensor) {
            std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%.17g,%zu,%d\n", k, s.sensor_id, s.E_opt, s.nu_opt,
                          s.objective, s.iterations, s.converged ? 1 : 0);
            csv << buf;
        }
    }
    write_text(path_in(cfg, "per_sensor_optima.csv"), csv.str());
    std::printf("E* %.4f GPa  nu* %.5f  sigma_E0 %.4f  sigma_nu* %.5f  L_E0 %.4f", est.pooled.E, est.pooled.nu,
                est.sigmas.sigma_E0, est.sigmas.sigma_nu0, est.corr_length.L);
    if (report.contains("L_E_star_cm"))
        std::printf("  L_E* %.4f  sigma_E* %.4f", report["L_E_star_cm"].get<double>(),
                    report["sigma_E_star_gpa"].get<double>());
    std::printf("  (%.1f s)\n", clock.seconds());
    return kExitOk;
}

int cmd_build_null(const Common& common) {
    const RunConfig cfg = resolve(common);
    Stopwatch clock;
    const FeatureLayout layout = make_layout(cfg.sensors);
    const NullSample null = build_null_sample(cfg.medium_spec(), cfg.excitation(), cfg.quadrature(), cfg.sensors,
                                              cfg.n_mc, cfg.seed, layout, cfg.threads);
    json extra = manifest_base("build-null", cfg);
    extra["wall_seconds"] = clock.seconds();
    write_null_sample(cfg.output_dir, null, extra.dump());
    std::printf("null sample: %zu x %zu features, %.1f s -> %s\n", null.size(), layout.size(), clock.seconds(),
                cfg.output_dir.c_str());
    return kExitOk;
}

int cmd_test(const Common& common, const std::string& null_dir, const std::string& measured_dir) {
    const RunConfig cfg = resolve(common);
    const NullSample null = read_null_sample(null_dir);
    const std::vector<SignalRecord> measured = read_signal_archive(measured_dir);
    const std::vector<TestReport> reports = run_all_tests(measured, null, cfg.alphas);
    json out = manifest_base("test", cfg);
    out["null"] = null_dir;
    out["measured"] = measured_dir;
    out["tests"] = json::array();
    bool any_reject = false;
    for (const TestReport& r : reports) {
        out["tests"].push_back(json::parse(test_report_json(r, null.layout())));
        std::printf("Test %-3s overall p = %.4f (sensor %d)", to_string(r.kind).c_str(), r.overall_p,
                    r.critical_sensor);
        for (std::size_t a = 0; a < r.alphas.size(); ++a) {
            std::printf("  alpha %.3g: %s", r.alphas[a], r.reject[a] ? "REJECT" : "accept");
            any_reject = any_reject || r.reject[a];
        }
        std::printf("\n");
    }
    write_text(path_in(cfg, "test_report.json"), out.dump(2) + "\n");
    return any_reject ? kExitReject : kExitOk;
}

std::string sweep_csv(const SweepTable& t) {
    std::ostringstream csv;
    csv << "parameter,value,test,alpha,rejections,repetitions\n";
    const char* tests[] = {"I", "II", "III"};
    for (std::size_t v = 0; v < t.values.size(); ++v)
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t a = 0; a < t.alphas.size(); ++a) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "%s,%.17g,%s,%.17g,%zu,%zu\n", t.parameter.c_str(), t.values[v],
                              tests[k], t.alphas[a], t.counts[v][k][a], t.repetitions);
                csv << buf;
            }
    return csv.str();
}

int cmd_sweep(const Common& common, const std::string& parameter, const std::string& null_dir) {
    const RunConfig cfg = resolve(common);
    Stopwatch clock;
    const NullSample null = read_null_sample(null_dir);
    std::vector<double> values;
    if (parameter == "sigma_E") {
        for (double rel : cfg.sweep_sigma_rel) values.push_back(rel * cfg.material.E_gpa);
    } else if (parameter == "L_E") {
        values = cfg.sweep_L_cm;
    } else {
        throw std::invalid_argument("--parameter must be sigma_E or L_E");
    }
    const SweepTable table = sensitivity_sweep(parameter, values, cfg.repetitions, null, cfg.medium_spec(), cfg.seed,
                                               cfg.specimen_options(), cfg.alphas);
    write_text(path_in(cfg, "sweep_" + parameter + ".csv"), sweep_csv(table));
    json manifest = manifest_base("sweep", cfg);
    manifest["parameter"] = parameter;
    manifest["null"] = null_dir;
    manifest["seed_rule"] = "value v, repetition r: see sensitivity_sweep";
    manifest["wall_seconds"] = clock.seconds();
    write_text(path_in(cfg, "sweep_" + parameter + "_manifest.json"), manifest.dump(2) + "\n");
    std::printf("%s", sweep_csv(table).c_str());
    return kExitOk;
}

int cmd_export(const Common& common, const std::string& calibration, const std::string& fio_dir,
               const std::string& fd_dir, const std::vector<std::string>& reports) {
    const RunConfig cfg = resolve(common);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        write_text(path_in(cfg, name), text);
        written.push_back(name);
    };
    char buf[256];
    if (!calibration.empty()) {
        const CalibrationSet set = calibration_from_json(read_text(calibration));
        std::ostringstream lin, f, g, coef;
        lin << "sigma_E_gpa,sigma_E0_gpa\n";
        for (const auto& [s, s0] : set.sigma_sweep) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s, s0);
            lin << buf;
        }
        f << "L_E_cm,sigma_E0_gpa,f_fit\n";
        for (const auto& [L, y] : set.f.support) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", L, y, set.f(L));
            f << buf;
        }
        g << "L_E_cm,L_E0_cm,g_fit\n";
        for (const auto& [L, y] : set.g.support) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", L, y, set.g(L));
            g << buf;
        }
        coef << "curve,c0,c1,residual\n";
        for (const CalibrationCurve* c : {&set.f, &set.g}) {
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\n", to_string(c->kind).c_str(), c->c0, c->c1,
                          c->residual);
            coef << buf;
        }
        emit("sigma_linearity.csv", lin.str());
        emit("f_curve.csv", f.str());
        emit("g_curve.csv", g.str());
        emit("curve_coefficients.csv", coef.str());
    }
    if (!fio_dir.empty() || !fd_dir.empty()) {
        if (fio_dir.empty() || fd_dir.empty())
            throw std::invalid_argument("--fio and --fd must be given together");
        const auto fio = read_signal_archive(fio_dir);
        const auto fd = read_signal_archive(fd_dir);
        std::map<int, const SignalRecord*> by_id;
        for (const SignalRecord& s : fd) by_id[s.sensor_id] = &s;
        double scale[2] = {0.0, 0.0};
        for (const SignalRecord& s : fd)
            for (std::size_t n = 0; n < s.size(); ++n) {
                scale[0] = std::max(scale[0], std::abs(s.ux[n]));
                scale[1] = std::max(scale[1], std::abs(s.uy[n]));
            }
        std::ostringstream ov;
        ov << "t_us,sensor_id,direction,fio_cm,fd_cm,rel_error\n";
        for (const SignalRecord& a : fio) {
            const auto it = by_id.find(a.sensor_id);
            if (it == by_id.end() || it->second->size() != a.size())
                throw std::invalid_argument("FIO and FD archives differ in sensors or sampling");
            const SignalRecord& b = *it->second;
            for (std::size_t n = 0; n < a.size(); ++n)
                for (int d = 0; d < 2; ++d) {
                    const double fa = d == 0 ? a.ux[n] : a.uy[n];
                    const double fb = d == 0 ? b.ux[n] : b.uy[n];
                    const double err = scale[d] > 0.0 ? (fa - fb) / scale[d] : 0.0;
                    std::snprintf(buf, sizeof buf, "%.17g,%d,%s,%.17g,%.17g,%.17g\n", a.t[n], a.sensor_id,
                                  d == 0 ? "x" : "y", fa, fb, err);
                    ov << buf;
                }
        }
        emit("fio_fd_overlay.csv", ov.str());
    }
    if (!reports.empty()) {
        std::ostringstream pv;
        pv << "report,test,sensor_id,p_value,overall_p\n";
        for (const std::string& path : reports) {
            const json doc = json::parse(read_text(path));
            for (const json& t : doc.at("tests"))
                for (const json& s : t.at("sensors")) {
                    std::snprintf(buf, sizeof buf, ",%s,%d,%.17g,%.17g\n", t.at("test").get<std::string>().c_str(),
                                  s.at("sensor_id").get<int>(), s.at("p").get<double>(),
                                  t.at("overall_p").get<double>());
                    pv << path << buf;
                }
        }
        emit("p_values.csv", pv.str());
    }
    if (written.empty()) throw std::invalid_argument("export-plots: nothing to export; pass --calibration, --fio/--fd or --report");
    for (const std::string& w : written) std::printf("%s\n", path_in(cfg, w).c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic FIO wave simulation, parameter estimation and damage testing"};
    app.require_subcommand(1);
    Common common;

    auto* sim = app.add_subcommand("simulate", "Write sensor signals from the FIO or FD solver");
    add_common(sim, common);
    std::string mode = "fio-det", scenario = "S1";
    sim->add_option("--mode", mode, "fio-det | fio-stoch | fd")->check(CLI::IsMember({"fio-det", "fio-stoch", "fd"}));
    sim->add_option("--scenario", scenario, "S1 | S2 | S3 | S4 (fd only)")->check(CLI::IsMember({"S1", "S2", "S3", "S4"}));

    auto* cal = app.add_subcommand("calibrate-curves", "Fit the f and g calibration curves from FD sweeps");
    add_common(cal, common);

    auto* est = app.add_subcommand("estimate", "Estimate nominal values and hyperparameters from measured archives");
    add_common(est, common);
    std::vector<std::string> measured;
    std::string curves;
    est->add_option("--measured", measured, "Signal archive directory, one per specimen")->required();
    est->add_option("--curves", curves, "calibration.json for bias correction");

    auto* null_cmd = app.add_subcommand("build-null", "Build the Monte-Carlo null sample");
    add_common(null_cmd, common);

    auto* test = app.add_subcommand("test", "Run tests I, II and III (exit 0 accept, 2 reject)");
    add_common(test, common);
    std::string null_dir, measured_dir;
    test->add_option("--null", null_dir, "Null sample directory")->required();
    test->add_option("--measured", measured_dir, "Signal archive directory")->required();

    auto* sweep = app.add_subcommand("sweep", "Rejection counts over sigma_E or L_E");
    add_common(sweep, common);
    std::string parameter = "sigma_E", sweep_null;
    sweep->add_option("--parameter", parameter, "sigma_E | L_E")->check(CLI::IsMember({"sigma_E", "L_E"}));
    sweep->add_option("--null", sweep_null, "Null sample directory")->required();

    auto* exp = app.add_subcommand("export-plots", "Write tidy CSVs behind the figures and tables");
    add_common(exp, common);
    std::string calibration, fio_dir, fd_dir;
    std::vector<std::string> reports;
    exp->add_option("--calibration", calibration, "calibration.json");
    exp->add_option("--fio", fio_dir, "FIO signal archive");
    exp->add_option("--fd", fd_dir, "FD signal archive");
    exp->add_option("--report", reports, "test_report.json file(s)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (sim->parsed()) return cmd_simulate(common, mode, scenario);
        if (cal->parsed()) return cmd_calibrate(common);
        if (est->parsed()) return cmd_estimate(common, measured, curves);
        if (null_cmd->parsed()) return cmd_build_null(common);
        if (test->parsed()) return cmd_test(common, null_dir, measured_dir);
        if (sweep->parsed()) return cmd_sweep(common, parameter, sweep_null);
        if (exp->parsed()) return cmd_export(common, calibration, fio_dir, fd_dir, reports);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
