#include "sfio/reference_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sfio/parallel.hpp"

namespace sfio {

void HeterogeneousMedium::validate() const {
    grid.validate();
    if (lambda.size() != grid.size() || mu.size() != grid.size())
        throw std::invalid_argument("medium: coefficient arrays do not match the grid");
    if (!(rho > 0.0)) throw std::invalid_argument("medium: rho must be > 0");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(mu[k] > 0.0) || !(lambda[k] + 2.0 * mu[k] > 0.0)) {
            std::ostringstream msg;
            msg << "medium: not hyperbolic at node " << k << " (lambda=" << lambda[k]
                << ", mu=" << mu[k] << ")";
            throw std::invalid_argument(msg.str());
        }
    }
}

void HeterogeneousMedium::set_material(std::size_t i, std::size_t j, double E_gpa, double nu) {
    const MaterialParams mp{E_gpa, nu, rho};
    mp.validate();
    lambda[grid.index(i, j)] = mp.lame_lambda();
    mu[grid.index(i, j)] = mp.lame_mu();
}

HeterogeneousMedium HeterogeneousMedium::homogeneous(const GridSpec& grid, const MaterialParams& mp) {
    mp.validate();
    grid.validate();
    HeterogeneousMedium m;
    m.grid = grid;
    m.rho = mp.rho;
    m.lambda.assign(grid.size(), mp.lame_lambda());
    m.mu.assign(grid.size(), mp.lame_mu());
    return m;
}

HeterogeneousMedium HeterogeneousMedium::from_fields(const GridSpec& grid, const FieldRealization& E,
                                                     const FieldRealization& nu, double rho) {
    grid.validate();
    HeterogeneousMedium m;
    m.grid = grid;
    m.rho = rho;
    m.lambda.resize(grid.size());
    m.mu.resize(grid.size());
    for (std::size_t j = 0; j < grid.ny; ++j)
        for (std::size_t i = 0; i < grid.nx; ++i)
            m.set_material(i, j, field_at(E, grid.x(i), grid.y(j)), field_at(nu, grid.x(i), grid.y(j)));
    return m;
}

GridSpec default_fd_grid(double size_cm, std::size_t n) {
    const double h = size_cm / static_cast<double>(n);
    return GridSpec::centered(n, n, h, h);
}

// ---------------------------------------------------------------------------

ElasticFd::ElasticFd(const HeterogeneousMedium& medium, unsigned threads)
    : grid_(medium.grid), rho_(medium.rho), threads_(threads) {
    medium.validate();
    const std::size_t nx = grid_.nx, ny = grid_.ny;
    if (nx < 3 || ny < 3) throw std::invalid_argument("fd: grid needs at least 3 nodes per axis");
    const double dx2 = grid_.dx * grid_.dx, dy2 = grid_.dy * grid_.dy;
    const double cross = 4.0 * grid_.dx * grid_.dy * rho_;
    const std::size_t n = grid_.size();
    pxf_.assign(n, 0.0);
    mxf_.assign(n, 0.0);
    pyf_.assign(n, 0.0);
    myf_.assign(n, 0.0);
    lam_.resize(n);
    mu_.resize(n);
    auto p = [&](std::size_t k) { return medium.lambda[k] + 2.0 * medium.mu[k]; };
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t c = grid_.index(i, j);
            lam_[c] = medium.lambda[c] / cross;
            mu_[c] = medium.mu[c] / cross;
            if (i + 1 < nx) {
                pxf_[c] = 0.5 * (p(c) + p(c + 1)) / (rho_ * dx2);
                mxf_[c] = 0.5 * (medium.mu[c] + medium.mu[c + 1]) / (rho_ * dx2);
            }
            if (j + 1 < ny) {
                pyf_[c] = 0.5 * (p(c) + p(c + nx)) / (rho_ * dy2);
                myf_[c] = 0.5 * (medium.mu[c] + medium.mu[c + nx]) / (rho_ * dy2);
            }
        }
    }
}

void ElasticFd::acceleration(const std::vector<double>& u1, const std::vector<double>& u2,
                             std::vector<double>& a1, std::vector<double>& a2) const {
    const std::size_t nx = grid_.nx, ny = grid_.ny;
    a1.assign(grid_.size(), 0.0);
    a2.assign(grid_.size(), 0.0);
    parallel_for(ny - 2, threads_, [&](std::size_t row) {
        const std::size_t j = row + 1;
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            const std::size_t c = j * nx + i;
            const std::size_t e = c + 1, w = c - 1, n = c + nx, s = c - nx;
            const std::size_t ne = n + 1, nw = n - 1, se = s + 1, sw = s - 1;
            a1[c] = pxf_[c] * (u1[e] - u1[c]) - pxf_[w] * (u1[c] - u1[w]) +
                    myf_[c] * (u1[n] - u1[c]) - myf_[s] * (u1[c] - u1[s]) +
                    lam_[e] * (u2[ne] - u2[se]) - lam_[w] * (u2[nw] - u2[sw]) +
                    mu_[n] * (u2[ne] - u2[nw]) - mu_[s] * (u2[se] - u2[sw]);
            a2[c] = mxf_[c] * (u2[e] - u2[c]) - mxf_[w] * (u2[c] - u2[w]) +
                    pyf_[c] * (u2[n] - u2[c]) - pyf_[s] * (u2[c] - u2[s]) +
                    mu_[e] * (u1[ne] - u1[se]) - mu_[w] * (u1[nw] - u1[sw]) +
                    lam_[n] * (u1[ne] - u1[nw]) - lam_[s] * (u1[se] - u1[sw]);
        }
    });
}

double ElasticFd::strain_energy(const std::vector<double>& u1, const std::vector<double>& u2,
                                const std::vector<double>& v1, const std::vector<double>& v2) const {
    std::vector<double> a1, a2;
    acceleration(v1, v2, a1, a2);
    double sum = 0.0;
    for (std::size_t k = 0; k < grid_.size(); ++k) sum += u1[k] * a1[k] + u2[k] * a2[k];
    return -rho_ * grid_.dx * grid_.dy * sum;
}

std::size_t ElasticFd::solve_implicit(double dt, const std::vector<double>& rhs1,
                                      const std::vector<double>& rhs2, std::vector<double>& x1,
                                      std::vector<double>& x2, double tolerance) const {
    const std::size_t nx = grid_.nx, ny = grid_.ny, n = grid_.size();
    const double dt2 = dt * dt;
    auto interior = [&](std::size_t k) {
        const std::size_t i = k % nx, j = k / nx;
        return i > 0 && j > 0 && i + 1 < nx && j + 1 < ny;
    };

    std::vector<double> diag1(n, 1.0), diag2(n, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (!interior(k)) continue;
        diag1[k] += dt2 * (pxf_[k] + pxf_[k - 1] + myf_[k] + myf_[k - nx]);
        diag2[k] += dt2 * (mxf_[k] + mxf_[k - 1] + pyf_[k] + pyf_[k - nx]);
    }

    std::vector<double> a1, a2;
    auto apply = [&](const std::vector<double>& p1, const std::vector<double>& p2,
                     std::vector<double>& q1, std::vector<double>& q2) {
        acceleration(p1, p2, a1, a2);
        q1.resize(n);
        q2.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            q1[k] = p1[k] - dt2 * a1[k];
            q2[k] = p2[k] - dt2 * a2[k];
        }
    };

    for (std::size_t k = 0; k < n; ++k)
        if (!interior(k)) x1[k] = x2[k] = 0.0;

    std::vector<double> r1(n), r2(n), z1(n), z2(n), p1(n), p2(n), q1, q2;
    apply(x1, x2, q1, q2);
    double rhs_norm2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const bool in = interior(k);
        r1[k] = in ? rhs1[k] - q1[k] : 0.0;
        r2[k] = in ? rhs2[k] - q2[k] : 0.0;
        if (in) rhs_norm2 += rhs1[k] * rhs1[k] + rhs2[k] * rhs2[k];
    }
    if (rhs_norm2 == 0.0) rhs_norm2 = 1.0;

    double rz = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        z1[k] = r1[k] / diag1[k];
        z2[k] = r2[k] / diag2[k];
        p1[k] = z1[k];
        p2[k] = z2[k];
        rz += r1[k] * z1[k] + r2[k] * z2[k];
    }
    const std::size_t max_iter = 10 * n;
    for (std::size_t it = 0; it < max_iter; ++it) {
        double rr = 0.0;
        for (std::size_t k = 0; k < n; ++k) rr += r1[k] * r1[k] + r2[k] * r2[k];
        if (std::sqrt(rr / rhs_norm2) <= tolerance) return it;

        apply(p1, p2, q1, q2);
        double pq = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (!interior(k)) q1[k] = q2[k] = 0.0;
            pq += p1[k] * q1[k] + p2[k] * q2[k];
        }
        const double alpha = rz / pq;
        double rz_new = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            x1[k] += alpha * p1[k];
            x2[k] += alpha * p2[k];
            r1[k] -= alpha * q1[k];
            r2[k] -= alpha * q2[k];
            z1[k] = r1[k] / diag1[k];
            z2[k] = r2[k] / diag2[k];
            rz_new += r1[k] * z1[k] + r2[k] * z2[k];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) {
            p1[k] = z1[k] + beta * p1[k];
            p2[k] = z2[k] + beta * p2[k];
        }
    }
    throw std::runtime_error("fd: implicit solve did not reach tolerance");
}

// ---------------------------------------------------------------------------

double max_stable_dt(const HeterogeneousMedium& medium) {
    medium.validate();
    const GridSpec& g = medium.grid;
    const double dx2 = g.dx * g.dx, dy2 = g.dy * g.dy, dxy = g.dx * g.dy;
    auto p = [&](std::size_t k) { return medium.lambda[k] + 2.0 * medium.mu[k]; };
    double radius = 0.0;
    for (std::size_t j = 1; j + 1 < g.ny; ++j) {
        for (std::size_t i = 1; i + 1 < g.nx; ++i) {
            const std::size_t c = g.index(i, j), e = c + 1, w = c - 1, n = c + g.nx, s = c - g.nx;
            const double pe = 0.5 * (p(c) + p(e)), pw = 0.5 * (p(c) + p(w));
            const double pn = 0.5 * (p(c) + p(n)), ps = 0.5 * (p(c) + p(s));
            const double me = 0.5 * (medium.mu[c] + medium.mu[e]), mw = 0.5 * (medium.mu[c] + medium.mu[w]);
            const double mn = 0.5 * (medium.mu[c] + medium.mu[n]), ms = 0.5 * (medium.mu[c] + medium.mu[s]);
            const double corners1 =
                2.0 * (std::abs(medium.lambda[e]) + std::abs(medium.lambda[w]) + medium.mu[n] + medium.mu[s]) /
                (4.0 * dxy);
            const double corners2 =
                2.0 * (medium.mu[e] + medium.mu[w] + std::abs(medium.lambda[n]) + std::abs(medium.lambda[s])) /
                (4.0 * dxy);
            const double row1 = 2.0 * ((pe + pw) / dx2 + (mn + ms) / dy2) + corners1;
            const double row2 = 2.0 * ((me + mw) / dx2 + (pn + ps) / dy2) + corners2;
            radius = std::max({radius, row1, row2});
        }
    }
    radius /= medium.rho;
    return 2.0 / std::sqrt(radius);
}

namespace {

std::size_t snap(double coord, double origin, double step, std::size_t n, const char* what, int id) {
    const double s = std::round((coord - origin) / step);
    if (!(s >= 1.0 && s <= static_cast<double>(n) - 2.0)) {
        std::ostringstream msg;
        msg << "fd: " << what << " " << id << " lies outside the grid interior";
        throw std::invalid_argument(msg.str());
    }
    return static_cast<std::size_t>(s);
}

}  // namespace

FdResult fd_solve(const HeterogeneousMedium& medium, const Excitation& excitation,
                  const SensorArray& sensors, const FdOptions& options) {
    excitation.validate();
    validate_sensors(sensors);
    if (!(options.output_dt > 0.0) || !(options.t_max >= options.output_dt))
        throw std::invalid_argument("fd: need 0 < output_dt <= t_max");

    const ElasticFd op(medium, options.threads);
    const GridSpec& g = medium.grid;

    const double dt_limit = options.scheme == TimeScheme::CentralDifference
                                ? max_stable_dt(medium)
                                : std::numeric_limits<double>::infinity();
    double dt = options.dt;
    std::size_t substeps = 0;
    if (dt <= 0.0) {
        const double target = std::min(options.output_dt, options.cfl_safety * dt_limit);
        substeps = static_cast<std::size_t>(std::ceil(options.output_dt / target - 1e-12));
        dt = options.output_dt / static_cast<double>(substeps);
    } else {
        if (dt > dt_limit) {
            std::ostringstream msg;
            msg << "fd: dt=" << dt << " us violates the CFL limit; max stable dt is " << dt_limit << " us";
            throw std::invalid_argument(msg.str());
        }
        const double ratio = options.output_dt / dt;
        substeps = static_cast<std::size_t>(std::llround(ratio));
        if (substeps == 0 || std::abs(ratio - static_cast<double>(substeps)) > 1e-9 * ratio)
            throw std::invalid_argument("fd: output_dt must be an integer multiple of dt");
    }
    const auto n_out = static_cast<std::size_t>(std::llround(options.t_max / options.output_dt));

    FdResult result;
    result.dt = dt;
    result.steps = n_out * substeps;

    // Spatial load pattern: nodes and weights per unit area, summing to 1 / (dx dy).
    std::vector<std::size_t> src_nodes;
    std::vector<double> src_weights;
    const std::size_t si = snap(0.0, g.x0, g.dx, g.nx, "source", 0);
    const std::size_t sj = snap(0.0, g.y0, g.dy, g.ny, "source", 0);
    const double eps = options.source_eps.value_or(excitation.eps_cm);
    if (!(eps >= 0.0)) throw std::invalid_argument("fd: source_eps must be >= 0");
    if (eps == 0.0) {
        src_nodes.push_back(g.index(si, sj));
        src_weights.push_back(1.0);
    } else {
        const double four_eps2 = 4.0 * eps * eps;
        const double reach = 8.0 * eps;
        double total = 0.0;
        for (std::size_t j = 1; j + 1 < g.ny; ++j)
            for (std::size_t i = 1; i + 1 < g.nx; ++i) {
                const double x = g.x(i) - g.x(si), y = g.y(j) - g.y(sj);
                if (std::abs(x) > reach || std::abs(y) > reach) continue;
                const double w = std::exp(-(x * x + y * y) / four_eps2);
                src_nodes.push_back(g.index(i, j));
                src_weights.push_back(w);
                total += w;
            }
        for (double& w : src_weights) w /= total;
    }
    for (double& w : src_weights) w /= g.dx * g.dy;

    std::vector<std::size_t> probe;
    for (const Sensor& s : sensors) {
        const std::size_t i = snap(s.x, g.x0, g.dx, g.nx, "sensor", s.id);
        const std::size_t j = snap(s.y, g.y0, g.dy, g.ny, "sensor", s.id);
        probe.push_back(g.index(i, j));
        result.snapped_sensors.push_back({s.id, g.x(i), g.y(j)});
        SignalRecord rec;
        rec.sensor_id = s.id;
        rec.t.reserve(n_out);
        rec.ux.reserve(n_out);
        rec.uy.reserve(n_out);
        result.signals.push_back(std::move(rec));
    }

    const std::size_t n = g.size();
    std::vector<double> u1(n, 0.0), u2(n, 0.0), p1(n, 0.0), p2(n, 0.0), a1, a2, r1(n), r2(n);
    const double dt2 = dt * dt;
    for (std::size_t step = 0; step < result.steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        if (options.scheme == TimeScheme::CentralDifference) {
            op.acceleration(u1, u2, a1, a2);
            const double h = excitation.profile(t);
            for (std::size_t m = 0; m < src_nodes.size(); ++m) a2[src_nodes[m]] += src_weights[m] * h;
            for (std::size_t k = 0; k < n; ++k) {
                const double n1 = 2.0 * u1[k] - p1[k] + dt2 * a1[k];
                const double n2 = 2.0 * u2[k] - p2[k] + dt2 * a2[k];
                p1[k] = u1[k];
                p2[k] = u2[k];
                u1[k] = n1;
                u2[k] = n2;
            }
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                r1[k] = 2.0 * u1[k] - p1[k];
                r2[k] = 2.0 * u2[k] - p2[k];
            }
            const double h = dt2 * excitation.profile(t + dt);
            for (std::size_t m = 0; m < src_nodes.size(); ++m) r2[src_nodes[m]] += src_weights[m] * h;
            std::vector<double> x1 = r1, x2 = r2;
            op.solve_implicit(dt, r1, r2, x1, x2, options.cg_tolerance);
            p1.swap(u1);
            p2.swap(u2);
            u1.swap(x1);
            u2.swap(x2);
        }
        if ((step + 1) % substeps == 0) {
            const double t_out = static_cast<double>((step + 1) / substeps) * options.output_dt;
            for (std::size_t s = 0; s < probe.size(); ++s) {
                result.signals[s].t.push_back(t_out);
                result.signals[s].ux.push_back(u1[probe[s]]);
                result.signals[s].uy.push_back(u2[probe[s]]);
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::S1: return "S1";
        case ScenarioKind::S2: return "S2";
        case ScenarioKind::S3: return "S3";
        case ScenarioKind::S4: return "S4";
    }
    return "?";
}

ScenarioKind scenario_from_string(const std::string& tag) {
    if (tag == "S1") return ScenarioKind::S1;
    if (tag == "S2") return ScenarioKind::S2;
    if (tag == "S3") return ScenarioKind::S3;
    if (tag == "S4") return ScenarioKind::S4;
    throw std::invalid_argument("unknown scenario tag '" + tag + "' (expected S1..S4)");
}

bool CrackRegion::contains(double x, double y) const {
    const double a = angle_deg * M_PI / 180.0;
    const double dx = x - center_x, dy = y - center_y;
    const double u = dx * std::cos(a) + dy * std::sin(a);
    const double v = -dx * std::sin(a) + dy * std::cos(a);
    const double slack = 1e-12;
    return std::abs(u) <= 0.5 * width + slack && std::abs(v) <= 0.5 * height + slack;
}

DamageScenario DamageScenario::standard(ScenarioKind kind) {
    DamageScenario sc;
    sc.kind = kind;
    if (kind == ScenarioKind::S2) sc.E_mean_gpa = 60.0;
    if (kind == ScenarioKind::S3) sc.E_mean_gpa = 80.0;
    return sc;
}

void DamageScenario::validate(const GridSpec& grid) const {
    if ((kind == ScenarioKind::S2 || kind == ScenarioKind::S3) && !(E_mean_gpa > 0.0))
        throw std::invalid_argument("scenario: E_mean must be > 0");
    if (kind != ScenarioKind::S4) return;
    const CrackRegion& c = crack;
    if (!(c.E_gpa > 0.0)) throw std::invalid_argument("scenario: crack E must be > 0");
    if (!(c.width > 0.0) || !(c.height > 0.0)) throw std::invalid_argument("scenario: crack size must be > 0");
    if (!std::isfinite(c.angle_deg)) throw std::invalid_argument("scenario: crack angle must be finite");
    const double a = c.angle_deg * M_PI / 180.0;
    for (double su : {-0.5, 0.5})
        for (double sv : {-0.5, 0.5}) {
            const double x = c.center_x + su * c.width * std::cos(a) - sv * c.height * std::sin(a);
            const double y = c.center_y + su * c.width * std::sin(a) + sv * c.height * std::cos(a);
            if (!(x > grid.x0 && x < grid.x_max() && y > grid.y0 && y < grid.y_max()))
                throw std::invalid_argument("scenario: crack region must lie strictly inside the domain");
        }
}

ScenarioMedium make_scenario(const DamageScenario& scenario, const MediumSpec& base,
                             std::uint64_t seed, const GridSpec& fd_grid) {
    scenario.validate(fd_grid);
    MediumSpec spec = base;
    if (scenario.kind == ScenarioKind::S2 || scenario.kind == ScenarioKind::S3)
        spec.E.mean = scenario.E_mean_gpa;

    ScenarioMedium out;
    out.seed = seed;
    out.fields = sample_medium(spec, seed);
    out.medium = HeterogeneousMedium::from_fields(fd_grid, out.fields.E_field, out.fields.nu_field, spec.rho);

    if (scenario.kind == ScenarioKind::S4) {
        const CrackRegion& c = scenario.crack;
        for (std::size_t j = 0; j < fd_grid.ny; ++j) {
            for (std::size_t i = 0; i < fd_grid.nx; ++i) {
                const double x = fd_grid.x(i), y = fd_grid.y(j);
                if (c.contains(x, y)) {
                    out.medium.set_material(i, j, c.E_gpa, field_at(out.fields.nu_field, x, y));
                    ++out.crack_nodes;
                }
            }
        }
        if (out.crack_nodes == 0)
            throw std::invalid_argument("scenario: crack region does not contain any grid node");
    }
    return out;
}

std::vector<SignalRecord> simulate_specimen(const DamageScenario& scenario, const MediumSpec& base,
                                            std::uint64_t seed, const Excitation& excitation,
                                            const SensorArray& sensors, const FdOptions& options,
                                            const GridSpec& fd_grid) {
    const ScenarioMedium sm = make_scenario(scenario, base, seed, fd_grid);
    return fd_solve(sm.medium, excitation, sensors, options).signals;
}

}  // namespace sfio
