// suites.cpp — experiment-kind runners behind the harness: config parsing,
// suite execution (row-parallel), CSV emission, and the built-in suite
// registry.

#include "fpme/harness.hpp"
#include "fpme/numerics.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fpme::harness {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------- util

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (a + 1)) ^ (0xc2b2ae3d27d4eb4fULL * (b + 1)));
    return rng.next_u64();
}

int thread_count() {
    if (const char* env = std::getenv("FPME_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    const int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ------------------------------------------------------------- json access

const json& need(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError("missing config field: " + ctx + "." + key);
    return j.at(key);
}

double need_num(const json& j, const std::string& key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_number()) throw ConfigError("config field must be a number: " + ctx + "." + key);
    return v.get<double>();
}

int need_int(const json& j, const std::string& key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_number_integer())
        throw ConfigError("config field must be an integer: " + ctx + "." + key);
    return v.get<int>();
}

std::string need_str(const json& j, const std::string& key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_string()) throw ConfigError("config field must be a string: " + ctx + "." + key);
    return v.get<std::string>();
}

double get_num(const json& j, const std::string& key, double def) {
    if (!j.is_object() || !j.contains(key)) return def;
    if (!j.at(key).is_number()) throw ConfigError("config field must be a number: " + key);
    return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& key, int def) {
    if (!j.is_object() || !j.contains(key)) return def;
    return j.at(key).get<int>();
}

bool get_bool(const json& j, const std::string& key, bool def) {
    if (!j.is_object() || !j.contains(key)) return def;
    return j.at(key).get<bool>();
}

std::vector<double> need_num_list(const json& j, const std::string& key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_array() || v.empty())
        throw ConfigError("config field must be a non-empty array: " + ctx + "." + key);
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            throw ConfigError("config field must hold numbers: " + ctx + "." + key);
        out.push_back(e.get<double>());
    }
    return out;
}

// --------------------------------------------------------------- sub-parsers

ManifoldFamily parse_family(const std::string& name, const std::string& ctx) {
    if (name == "circle") return ManifoldFamily::Circle;
    if (name == "sphere" || name == "sphere-zonal") return ManifoldFamily::SphereZonal;
    throw ConfigError(ctx + ": unknown manifold family '" + name + "'");
}

EvolvingGeometry parse_geometry(const json& g, double horizon, int modes, const std::string& ctx) {
    const auto family = parse_family(need_str(g, "family", ctx), ctx);
    const std::string law = need_str(g, "law", ctx);
    const double r0 = need_num(g, "r0", ctx);
    if (law == "constant") return EvolvingGeometry::constant(family, r0, horizon, modes);
    if (law == "linear")
        return EvolvingGeometry::linear(family, r0, need_num(g, "a", ctx), horizon, modes);
    if (law == "sinusoidal")
        return EvolvingGeometry::sinusoidal(family, r0, need_num(g, "a", ctx),
                                            need_num(g, "omega", ctx), horizon, modes);
    throw ConfigError(ctx + ": unknown radius law '" + law + "'");
}

NonlinearitySpec parse_nonlinearity(const json& n, const std::string& ctx) {
    const std::string kind = need_str(n, "kind", ctx);
    if (kind == "power") return NonlinearitySpec::power_law(need_num(n, "m", ctx));
    if (kind == "regularized")
        return NonlinearitySpec::regularized(need_num(n, "m", ctx), need_num(n, "k", ctx),
                                             need_num(n, "A", ctx));
    if (kind == "arctan") {
        const double A = get_num(n, "A", 8.0);
        return NonlinearitySpec::custom([](double r) { return r + 0.5 * std::atan(r); },
                                        [](double r) { return 1.0 + 0.5 / (1.0 + r * r); }, A,
                                        nullptr, "arctan_shift");
    }
    throw ConfigError(ctx + ": unknown nonlinearity kind '" + kind + "'");
}

Cylinder parse_cylinder(const json& c, const std::string& ctx) {
    if (c.is_null()) return Cylinder::full();
    const std::string kind = need_str(c, "kind", ctx);
    if (kind == "full") return Cylinder::full();
    if (kind == "truncated") return Cylinder::truncated(need_num(c, "R", ctx));
    throw ConfigError(ctx + ": unknown cylinder kind '" + kind + "'");
}

SpectralField parse_data(const json& d, const ManifoldSnapshot& snap, std::uint64_t seed,
                         const std::string& ctx) {
    const std::string type = need_str(d, "type", ctx);
    if (type == "seeded") {
        FieldGenSpec spec;
        spec.active_modes = get_int(d, "active_modes", std::min(8, snap.mode_count));
        spec.decay = get_num(d, "decay", 0.5);
        spec.amplitude = get_num(d, "amplitude", 1.0);
        spec.offset = get_num(d, "offset", 0.0);
        spec.mean_zero = get_bool(d, "mean_zero", false);
        spec.normalize_sup = get_bool(d, "normalize_sup", true);
        return random_field(snap, seed, spec);
    }
    if (type == "constant") {
        SpectralField f = SpectralField::zero(snap);
        f.coeffs[0] = need_num(d, "value", ctx) * std::sqrt(snap.measure());
        return f;
    }
    if (type == "cosine") {
        // offset + amplitude · (cos qθ | P_l) — a named smooth datum.
        SpectralField f = SpectralField::zero(snap);
        const double offset = get_num(d, "offset", 0.0);
        const double amp = need_num(d, "amplitude", ctx);
        const int q = get_int(d, "frequency", 1);
        if (q < 1 || q > snap.mode_count)
            throw ConfigError(ctx + ": cosine frequency outside mode range");
        f.coeffs[0] = offset * std::sqrt(snap.measure());
        if (snap.family == ManifoldFamily::Circle) {
            f.coeffs[2 * q - 1] = amp * std::sqrt(M_PI * snap.radius);
        } else {
            f.coeffs[q] = amp * snap.radius * std::sqrt(4.0 * M_PI / (2.0 * q + 1.0));
        }
        return f;
    }
    throw ConfigError(ctx + ": unknown data type '" + type + "'");
}

struct CaseSpec {
    std::string id;
    EvolvingGeometry geometry;
    NonlinearitySpec nonlinearity;
    Cylinder cylinder;
    double dt;
    StepperOpts stepper;
    json data;
    json raw;
};

CaseSpec parse_case(const json& c, const std::string& ctx) {
    const double horizon = need_num(c, "horizon", ctx);
    const int modes = need_int(c, "modes", ctx);
    CaseSpec spec{need_str(c, "case", ctx),
                  parse_geometry(need(c, "geometry", ctx), horizon, modes, ctx),
                  parse_nonlinearity(need(c, "nonlinearity", ctx), ctx),
                  parse_cylinder(c.contains("cylinder") ? c.at("cylinder") : json(), ctx),
                  need_num(c, "dt", ctx),
                  ImplicitEulerOpts{},
                  need(c, "data", ctx),
                  c};
    if (need_str(c, "case", ctx).empty()) throw ConfigError(ctx + ": empty case id");
    const std::string stepper = c.contains("stepper") ? c.at("stepper").get<std::string>()
                                                      : std::string("implicit_euler");
    if (stepper == "implicit_euler") {
        ImplicitEulerOpts opts;
        opts.newton_tol = get_num(c, "newton_tol", 1e-10);
        opts.max_iter = get_int(c, "max_iter", 30);
        spec.stepper = opts;
    } else if (stepper == "explicit_rk") {
        ExplicitRKOpts opts;
        opts.adaptive_tol = get_num(c, "rk_tol", 1e-8);
        spec.stepper = opts;
    } else {
        throw ConfigError(ctx + ": unknown stepper '" + stepper + "'");
    }
    return spec;
}

SolverConfig make_solver_config(const CaseSpec& spec, std::uint64_t seed) {
    SolverConfig cfg{spec.geometry,
                     spec.nonlinearity,
                     parse_data(spec.data, spec.geometry.snapshot_at(0.0), seed, spec.id),
                     spec.cylinder,
                     spec.dt,
                     spec.stepper};
    return cfg;
}

std::string kv(std::initializer_list<std::pair<std::string, std::string>> items) {
    std::string out;
    for (const auto& [k, v] : items) {
        if (!out.empty()) out += ';';
        out += k + "=" + v;
    }
    return out;
}

// ------------------------------------------------------------ suite runners

struct SuiteContext {
    std::string experiment;
    std::uint64_t seed = 0;
};

SuiteResult run_verify_extension(const json& cfg, const SuiteContext& ctx) {
    SuiteResult suite;
    suite.suite = ctx.experiment;
    const auto radii = need_num_list(cfg, "radii", ctx.experiment);
    const int modes = need_int(cfg, "modes", ctx.experiment);
    const json fields = need(cfg, "fields", ctx.experiment);
    const int count = need_int(fields, "count", ctx.experiment + ".fields");
    const json tol = need(cfg, "tolerances", ctx.experiment);
    std::vector<std::string> checks;
    for (const auto& c : need(cfg, "checks", ctx.experiment)) checks.push_back(c.get<std::string>());

    const json pde_grid = cfg.contains("pde_grid") ? cfg.at("pde_grid") : json::array({64, 200});
    const json y_range = cfg.contains("y_range") ? cfg.at("y_range") : json::array({0.1, 3.0});
    const double trunc_R = get_num(cfg, "truncated_R", 3.0);
    const double h0 = get_num(cfg, "richardson_h0", 0.02);

    std::vector<std::vector<ResultRow>> slots(count);
    parallel_for(count, [&](int i) {
        const double radius = radii[i % radii.size()];
        const ManifoldSnapshot snap(ManifoldFamily::Circle, radius, modes);
        FieldGenSpec gen;
        gen.active_modes = get_int(fields, "active_modes", std::min(24, modes));
        gen.decay = get_num(fields, "decay", 0.5);
        gen.amplitude = get_num(fields, "amplitude", 1.0);
        gen.offset = get_num(fields, "offset", 0.3);
        const SpectralField u = random_field(snap, mix_seed(ctx.seed, i), gen);
        SpectralField u0 = u; // mean-zero part
        u0.coeffs[0] = 0.0;

        const std::string params = kv({{"field", std::to_string(i)},
                                       {"radius", format_g17(radius)},
                                       {"modes", std::to_string(modes)}});
        auto row = [&](const std::string& metric, double value, double threshold, bool pass) {
            slots[i].push_back({ctx.experiment, "field" + std::to_string(i), params, metric, value,
                                threshold, pass});
        };

        for (const auto& check : checks) {
            if (check == "trace") {
                const auto back = evaluate_at_height(extend_full(u), 0.0);
                double worst = 0.0;
                for (std::size_t k = 0; k < u.coeffs.size(); ++k)
                    worst = std::max(worst, std::abs(back.coeffs[k] - u.coeffs[k]));
                const double t = need_num(tol, "trace", "tolerances");
                row("trace_exactness", worst, t, worst <= t);
            } else if (check == "pde_residual") {
                const double res = pde_residual_full(u, pde_grid.at(0).get<int>(),
                                                     pde_grid.at(1).get<int>(),
                                                     y_range.at(0).get<double>(),
                                                     y_range.at(1).get<double>());
                const double t = need_num(tol, "pde_residual", "tolerances");
                row("pde_residual", res, t, res <= t);
            } else if (check == "dtn") {
                const double err = dtn_richardson_error(u, h0);
                const double t = need_num(tol, "dtn", "tolerances");
                row("dtn_richardson", err, t, err <= t);
            } else if (check == "grad_energy") {
                const double semi = hm_seminorm(u);
                const double full = grad_energy(extend_full(u));
                const double dfull = std::abs(full - semi * semi);
                const double tf = need_num(tol, "grad_energy_full", "tolerances") *
                                  std::max(1.0, semi * semi);
                row("grad_energy_full_vs_seminorm", dfull, tf, dfull <= tf);
                const double closed = grad_energy(extend_truncated(u, trunc_R));
                const double quad = grad_energy_truncated_quadrature(u, trunc_R);
                const double dq = std::abs(closed - quad);
                const double tq = need_num(tol, "grad_energy_truncated", "tolerances") *
                                  std::max(1.0, closed);
                row("grad_energy_truncated_vs_quadrature", dq, tq, dq <= tq);
            } else if (check == "l2_bound") {
                const double val = l2_norm_meanzero(extend_full(u0));
                const double bound =
                    l2_norm(u0) * l2_norm(u0) / (2.0 * std::sqrt(snap.lambda1()));
                row("l2_bound", val, bound, val <= bound);
            } else if (check == "isometry") {
                const double xnorm = std::sqrt(grad_energy(extend_full(u)) +
                                               l2_norm(u) * l2_norm(u));
                const double d = std::abs(xnorm - hm_norm(u));
                const double t = 1e-12 * std::max(1.0, hm_norm(u));
                row("extension_isometry", d, t, d <= t);
            } else if (check == "minimality") {
                Rng rng(mix_seed(ctx.seed, i, 77));
                std::vector<double> poly = {0.5 * rng.symmetric(), 0.5 * rng.symmetric(),
                                            0.25 * rng.symmetric()};
                const double base = grad_energy(extend_full(u0));
                double min_excess = std::numeric_limits<double>::infinity();
                double comp_at = 0.0;
                for (double eps : {-0.3, 0.2}) {
                    comp_at = competitor_energy(u0, eps, poly);
                    min_excess = std::min(min_excess, comp_at - base);
                }
                row("energy_minimality_excess", min_excess, 0.0, min_excess > 0.0);
                // |trace|_{H} ≤ ‖v‖_{X(C)} for the competitor extension.
                const double xnorm = std::sqrt(comp_at + l2_norm(u0) * l2_norm(u0));
                const double ratio = hm_norm(u0) / xnorm;
                row("trace_xnorm_ratio", ratio, 1.0, ratio <= 1.0 + 1e-12);
            } else {
                throw ConfigError(ctx.experiment + ": unknown check '" + check + "'");
            }
        }
    });
    for (auto& s : slots)
        for (auto& r : s) suite.rows.push_back(std::move(r));
    return suite;
}

SuiteResult run_verify_norms(const json& cfg, const SuiteContext& ctx) {
    SuiteResult suite;
    suite.suite = ctx.experiment;
    const auto family = parse_family(need_str(cfg, "family", ctx.experiment), ctx.experiment);
    const double radius = need_num(cfg, "radius", ctx.experiment);
    const int modes = need_int(cfg, "modes", ctx.experiment);
    const json fields = need(cfg, "fields", ctx.experiment);
    const int count = need_int(fields, "count", ctx.experiment + ".fields");
    const json tol = need(cfg, "tolerances", ctx.experiment);
    const double c_hm = std::sqrt((2.0 + M_PI) / M_PI); // ‖u‖_H ≤ c·‖u‖_{H^{1/2}}
    const double c_h12 = std::sqrt(0.5 * M_PI);         // ‖u‖_{H^{1/2}} ≤ c·‖u‖_H
    const ManifoldSnapshot snap(family, radius, modes);

    std::vector<std::vector<ResultRow>> slots(count);
    parallel_for(count, [&](int i) {
        FieldGenSpec gen;
        gen.active_modes = get_int(fields, "active_modes", modes);
        gen.decay = get_num(fields, "decay", 0.8);
        gen.amplitude = get_num(fields, "amplitude", 1.0);
        gen.offset = get_num(fields, "offset", 0.2);
        const SpectralField u = random_field(snap, mix_seed(ctx.seed, i), gen);
        const std::string params = kv({{"field", std::to_string(i)}});
        auto row = [&](const std::string& metric, double value, double threshold, bool pass) {
            slots[i].push_back({ctx.experiment, "field" + std::to_string(i), params, metric, value,
                                threshold, pass});
        };

        double sumsq = 0.0;
        for (double c : u.coeffs) sumsq += c * c;
        const int grid = 4 * snap.coeff_count() + 2;
        const auto g = synthesize(u, grid);
        const auto w = grid_weights(snap, grid);
        double quad = 0.0;
        for (int q = 0; q < grid; ++q) quad += w[q] * g.values[q] * g.values[q];
        const double pt = need_num(tol, "parseval", "tolerances") * sumsq;
        row("parseval", std::abs(quad - sumsq), pt, std::abs(quad - sumsq) <= pt);

        const double hm = hm_norm(u);
        const double h12 = h12_norm_closed(u);
        row("equivalence_hm_le_h12", hm / h12, c_hm, hm <= c_hm * h12 * (1.0 + 1e-12));
        row("equivalence_h12_le_hm", h12 / hm, c_h12, h12 <= c_h12 * hm * (1.0 + 1e-12));

        const double hq = h12_norm_quadrature(u);
        const double rel = std::abs(hq - h12) / h12;
        const double rt = need_num(tol, "h12_quadrature_rel", "tolerances");
        row("h12_quadrature_rel", rel, rt, rel <= rt);
    });
    for (auto& s : slots)
        for (auto& r : s) suite.rows.push_back(std::move(r));
    return suite;
}

SuiteResult run_solve(const json& cfg, const SuiteContext& ctx) {
    SuiteResult suite;
    suite.suite = ctx.experiment;
    const json& cases = need(cfg, "cases", ctx.experiment);
    if (!cases.is_array() || cases.empty())
        throw ConfigError(ctx.experiment + ": cases must be a non-empty array");

    std::vector<std::vector<ResultRow>> slots(cases.size());
    parallel_for(static_cast<int>(cases.size()), [&](int ci) {
        const json& c = cases.at(ci);
        const CaseSpec spec = parse_case(c, ctx.experiment);
        const json checks = need(c, "checks", spec.id);
        const std::string params = kv({{"case", spec.id},
                                       {"dt", format_g17(spec.dt)},
                                       {"modes", std::to_string(spec.geometry.mode_count())}});
        auto row = [&](const std::string& metric, double value, double threshold, bool pass) {
            slots[ci].push_back({ctx.experiment, spec.id, params, metric, value, threshold, pass});
        };

        const std::string kind = c.contains("kind") ? c.at("kind").get<std::string>() : "single";
        SolverConfig base = make_solver_config(spec, mix_seed(ctx.seed, ci));
        auto run_one = [&](const SolverConfig& sc) {
            return sc.nonlinearity.kind() == NonlinearityKind::PowerLaw ? solve_fpme(sc)
                                                                        : solve_nondegenerate(sc);
        };

        if (kind == "single") {
            const Trajectory traj = run_one(base);
            if (checks.contains("mass")) {
                const auto mass = diagnostics_mass(traj);
                double drift = 0.0;
                for (double m : mass) drift = std::max(drift, std::abs(m - mass.front()));
                const double t = checks.at("mass").get<double>();
                row("mass_drift", drift, t, drift <= t);
            }
            if (checks.contains("max_principle")) {
                const double slack = diagnostics_maxprinciple(traj);
                const double t = checks.at("max_principle").get<double>();
                row("max_principle_slack", slack, t, slack <= t);
            }
            if (checks.contains("energy_dissipation")) {
                const double t = checks.at("energy_dissipation").get<double>();
                const auto ledger = energy_ledger(traj);
                if (spec.geometry.static_surface()) {
                    double worst = 0.0;
                    for (std::size_t j = 0; j + 1 < ledger.size(); ++j)
                        worst = std::max(worst, ledger[j + 1] - ledger[j]);
                    row("energy_ledger_increase", std::max(worst, 0.0), t, worst <= t);
                } else {
                    if (spec.nonlinearity.kind() != NonlinearityKind::PowerLaw)
                        throw ConfigError(spec.id +
                                          ": energy_dissipation on evolving surfaces requires "
                                          "the power law");
                    const double rate =
                        (spec.nonlinearity.exponent() + 1.0) * spec.geometry.div_w_bound();
                    double worst = 0.0;
                    for (std::size_t j = 0; j < ledger.size(); ++j)
                        worst = std::max(worst, ledger[j] - ledger.front() *
                                                    std::exp(rate * traj.nodes[j].t));
                    row("energy_gronwall_slack", std::max(worst, 0.0), t, worst <= t);
                }
            }
        } else if (kind == "comparison") {
            const json gap = need(c, "gap", spec.id);
            FieldGenSpec gs;
            gs.active_modes = get_int(gap, "active_modes", 6);
            gs.decay = get_num(gap, "decay", 0.5);
            const double amp = need_num(gap, "amplitude", spec.id + ".gap");
            const double base_gap = need_num(gap, "base", spec.id + ".gap");
            gs.amplitude = 0.5 * amp;
            gs.offset = base_gap + 0.5 * amp;
            const SpectralField gap_field =
                random_field(base.initial_data.snapshot, mix_seed(ctx.seed, ci, 1), gs);
            SolverConfig upper = base;
            for (std::size_t k = 0; k < upper.initial_data.coeffs.size(); ++k)
                upper.initial_data.coeffs[k] += gap_field.coeffs[k];

            const Trajectory t_low = run_one(base);
            const Trajectory t_up = run_one(upper);
            if (checks.contains("order")) {
                const double viol = max_order_violation(t_low, t_up);
                const double t = checks.at("order").get<double>();
                row("order_violation", viol, t, viol <= t);
            }
            if (checks.contains("contraction_zero")) {
                const auto series = diagnostics_contraction(t_low, t_up);
                double worst = 0.0;
                for (double v : series) worst = std::max(worst, v);
                const double t = checks.at("contraction_zero").get<double>();
                row("ordered_positive_part", worst, t, worst <= t);
            }
        } else if (kind == "contraction") {
            SolverConfig second = base;
            second.initial_data = parse_data(need(c, "data2", spec.id),
                                             spec.geometry.snapshot_at(0.0),
                                             mix_seed(ctx.seed, ci, 2), spec.id);
            const Trajectory t1 = run_one(base);
            const Trajectory t2 = run_one(second);
            const double viol = max_contraction_violation(diagnostics_contraction(t1, t2));
            const double t = checks.at("contraction").get<double>();
            row("contraction_violation", viol, t, viol <= t);
        } else {
            throw ConfigError(spec.id + ": unknown case kind '" + kind + "'");
        }
    });
    for (auto& s : slots)
        for (auto& r : s) suite.rows.push_back(std::move(r));
    return suite;
}

SuiteResult run_sweep_R(const json& cfg, const SuiteContext& ctx) {
    SuiteResult suite;
    suite.suite = ctx.experiment;
    const std::string target = need_str(cfg, "target", ctx.experiment);
    const auto r_values = need_num_list(cfg, "R_values", ctx.experiment);

    if (target == "extension-decay") {
        const double radius = need_num(cfg, "radius", ctx.experiment);
        const int modes = need_int(cfg, "modes", ctx.experiment);
        const json fields = need(cfg, "fields", ctx.experiment);
        const int count = need_int(fields, "count", ctx.experiment + ".fields");
        const ManifoldSnapshot snap(ManifoldFamily::Circle, radius, modes);

        std::vector<std::vector<ResultRow>> slots(count);
        parallel_for(count, [&](int i) {
            FieldGenSpec gen;
            gen.active_modes = get_int(fields, "active_modes", std::min(16, modes));
            gen.decay = get_num(fields, "decay", 0.5);
            gen.amplitude = get_num(fields, "amplitude", 1.0);
            gen.offset = get_num(fields, "offset", 0.3);
            const SpectralField u = random_field(snap, mix_seed(ctx.seed, i), gen);
            for (double R : r_values) {
                const auto gap = decay_gap(u, R);
                slots[i].push_back({ctx.experiment, "field" + std::to_string(i),
                                    kv({{"field", std::to_string(i)}, {"R", format_g17(R)}}),
                                    "decay_exact_le_bound", gap.exact, gap.proved_bound,
                                    gap.exact <= gap.proved_bound});
            }
        });
        for (auto& s : slots)
            for (auto& r : s) suite.rows.push_back(std::move(r));

        if (cfg.contains("slope")) {
            const json slope = cfg.at("slope");
            const double lambda = need_num(slope, "mode_lambda", "slope");
            const auto range = need_num_list(slope, "R_range", "slope");
            const int n = need_int(slope, "count", "slope");
            const int freq = static_cast<int>(std::lround(std::sqrt(lambda) * radius));
            SpectralField mono = SpectralField::zero(snap);
            mono.coeffs[2 * freq - 1] = 1.0;
            std::vector<double> rs(n), gaps(n);
            for (int i = 0; i < n; ++i) {
                rs[i] = range[0] + (range[1] - range[0]) * i / (n - 1);
                gaps[i] = decay_gap(mono, rs[i]).exact;
            }
            const auto fit = fit_rate(rs, gaps);
            const double expect = need_num(slope, "expect", "slope");
            const double rel = need_num(slope, "rel_tol", "slope");
            const bool ok = std::abs(fit.slope - expect) <= rel * std::abs(expect);
            suite.rows.push_back({ctx.experiment, "slope",
                                  kv({{"lambda", format_g17(lambda)}}), "decay_slope", fit.slope,
                                  expect, ok});
            suite.rows.push_back({ctx.experiment, "slope", kv({{"lambda", format_g17(lambda)}}),
                                  "decay_slope_r2", fit.r_squared, 0.999,
                                  fit.r_squared >= 0.999});
        }
        return suite;
    }

    if (target == "solver-limit") {
        const CaseSpec spec = parse_case(need(cfg, "base", ctx.experiment), ctx.experiment);
        SolverConfig base = make_solver_config(spec, mix_seed(ctx.seed, 0));
        std::vector<Trajectory> truncated(r_values.size());
        Trajectory full;
        // Index 0 computes the full reference, the rest the truncated solves.
        parallel_for(static_cast<int>(r_values.size()) + 1, [&](int i) {
            if (i == 0) {
                SolverConfig cfg_full = base;
                cfg_full.cylinder = Cylinder::full();
                full = spec.nonlinearity.kind() == NonlinearityKind::PowerLaw
                           ? solve_fpme(cfg_full)
                           : solve_nondegenerate(cfg_full);
            } else {
                SolverConfig cfg_R = base;
                cfg_R.cylinder = Cylinder::truncated(r_values[i - 1]);
                truncated[i - 1] = spec.nonlinearity.kind() == NonlinearityKind::PowerLaw
                                       ? solve_fpme(cfg_R)
                                       : solve_nondegenerate(cfg_R);
            }
        });
        std::vector<double> gaps(r_values.size());
        for (std::size_t i = 0; i < r_values.size(); ++i) {
            gaps[i] = l2_in_time_gap(truncated[i], full);
            suite.rows.push_back({ctx.experiment, spec.id,
                                  kv({{"R", format_g17(r_values[i])}}), "truncated_full_gap",
                                  gaps[i], 0.0, true});
        }
        for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
            const bool ok = gaps[i + 1] < gaps[i];
            suite.rows.push_back({ctx.experiment, spec.id,
                                  kv({{"R_from", format_g17(r_values[i])},
                                      {"R_to", format_g17(r_values[i + 1])}}),
                                  "gap_strictly_decreasing", gaps[i + 1], gaps[i], ok});
        }
        return suite;
    }
    throw ConfigError(ctx.experiment + ": unknown sweep-R target '" + target + "'");
}

SuiteResult run_sweep_k(const json& cfg, const SuiteContext& ctx) {
    SuiteResult suite;
    suite.suite = ctx.experiment;
    const auto k_values = need_num_list(cfg, "k_values", ctx.experiment);
    if (k_values.size() < 2) throw ConfigError(ctx.experiment + ": need at least two k values");
    const CaseSpec spec = parse_case(need(cfg, "base", ctx.experiment), ctx.experiment);
    SolverConfig base = make_solver_config(spec, mix_seed(ctx.seed, 0));
    const auto sweep = solve_fpme_regularized_sweep(base, k_values);

    for (std::size_t i = 0; i < sweep.successive_gaps.size(); ++i) {
        suite.rows.push_back({ctx.experiment, spec.id,
                              kv({{"k_from", format_g17(k_values[i])},
                                  {"k_to", format_g17(k_values[i + 1])}}),
                              "regularization_gap", sweep.successive_gaps[i], 0.0, true});
    }
    for (std::size_t i = 0; i + 1 < sweep.successive_gaps.size(); ++i) {
        const bool ok = sweep.successive_gaps[i + 1] < sweep.successive_gaps[i];
        suite.rows.push_back({ctx.experiment, spec.id, kv({{"pair", std::to_string(i)}}),
                              "gap_strictly_decreasing", sweep.successive_gaps[i + 1],
                              sweep.successive_gaps[i], ok});
    }
    const bool direct_ok = sweep.direct_gap <= sweep.successive_gaps.front();
    suite.rows.push_back({ctx.experiment, spec.id,
                          kv({{"k", format_g17(k_values.back())}}), "direct_gap",
                          sweep.direct_gap, sweep.successive_gaps.front(), direct_ok});
    return suite;
}

SuiteResult run_sweep_dt(const json& cfg, const SuiteContext& ctx) {
    SuiteResult suite;
    suite.suite = ctx.experiment;
    const std::string mode = need_str(cfg, "mode", ctx.experiment);
    if (mode != "contraction")
        throw ConfigError(ctx.experiment + ": unknown sweep-dt mode '" + mode + "'");
    const auto dt_values = need_num_list(cfg, "dt_values", ctx.experiment);
    const int pairs = need_int(cfg, "pairs", ctx.experiment);
    const CaseSpec spec = parse_case(need(cfg, "base", ctx.experiment), ctx.experiment);
    const json checks = need(cfg, "checks", ctx.experiment);
    const double baseline_tol = need_num(checks, "violation", "checks");
    const double ratio = get_num(checks, "refinement_ratio", 0.6);
    // Violations below measurement precision count as vanished.
    const double floor = get_num(checks, "vanish_floor", 1e-12);

    const int n_jobs = static_cast<int>(dt_values.size()) * pairs;
    std::vector<double> violations(n_jobs, 0.0);
    parallel_for(n_jobs, [&](int job) {
        const int di = job / pairs;
        const int pi = job % pairs;
        CaseSpec local = spec;
        local.dt = dt_values[di];
        SolverConfig c1 = make_solver_config(local, mix_seed(ctx.seed, pi, 10));
        SolverConfig c2 = make_solver_config(local, mix_seed(ctx.seed, pi, 20));
        const Trajectory t1 = solve_fpme(c1);
        const Trajectory t2 = solve_fpme(c2);
        violations[job] = max_contraction_violation(diagnostics_contraction(t1, t2));
    });

    std::vector<double> worst_per_dt(dt_values.size(), 0.0);
    for (int di = 0; di < static_cast<int>(dt_values.size()); ++di) {
        for (int pi = 0; pi < pairs; ++pi) {
            const double v = violations[di * pairs + pi];
            worst_per_dt[di] = std::max(worst_per_dt[di], v);
            const bool baseline = di == 0;
            suite.rows.push_back({ctx.experiment, spec.id,
                                  kv({{"dt", format_g17(dt_values[di])},
                                      {"pair", std::to_string(pi)}}),
                                  "contraction_violation", v,
                                  baseline ? baseline_tol : 0.0,
                                  baseline ? v <= baseline_tol : true});
        }
    }
    for (std::size_t di = 0; di + 1 < dt_values.size(); ++di) {
        const double coarse = worst_per_dt[di];
        const double fine = worst_per_dt[di + 1];
        const double threshold = std::max(ratio * coarse, floor);
        suite.rows.push_back({ctx.experiment, spec.id,
                              kv({{"dt_from", format_g17(dt_values[di])},
                                  {"dt_to", format_g17(dt_values[di + 1])}}),
                              "violation_refinement", fine, threshold, fine <= threshold});
    }
    return suite;
}

SuiteResult run_sweep_N(const json& cfg, const SuiteContext& ctx) {
    SuiteResult suite;
    suite.suite = ctx.experiment;
    const json& base_json = need(cfg, "base", ctx.experiment);
    const auto n_values_d = need_num_list(cfg, "N_values", ctx.experiment);
    const int reference = need_int(cfg, "reference_N", ctx.experiment);

    auto solve_with_modes = [&](int modes) {
        json cj = base_json;
        cj["modes"] = modes;
        const CaseSpec spec = parse_case(cj, ctx.experiment);
        SolverConfig cfg_s = make_solver_config(spec, mix_seed(ctx.seed, 0));
        return spec.nonlinearity.kind() == NonlinearityKind::PowerLaw
                   ? solve_fpme(cfg_s)
                   : solve_nondegenerate(cfg_s);
    };

    std::vector<Trajectory> runs(n_values_d.size());
    Trajectory ref;
    parallel_for(static_cast<int>(n_values_d.size()) + 1, [&](int i) {
        if (i == 0)
            ref = solve_with_modes(reference);
        else
            runs[i - 1] = solve_with_modes(static_cast<int>(n_values_d[i - 1]));
    });

    // L²-in-time gap with the lower-resolution run zero-padded in modes.
    auto gap_to_ref = [&](const Trajectory& t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < t.nodes.size(); ++j) {
            const auto& a = t.nodes[j].field.coeffs;
            const auto& b = ref.nodes[j].field.coeffs;
            double d2 = 0.0;
            for (std::size_t k = 0; k < b.size(); ++k) {
                const double av = k < a.size() ? a[k] : 0.0;
                const double d = av - b[k];
                d2 += d * d;
            }
            double w = 0.0;
            if (j > 0) w += 0.5 * (t.nodes[j].t - t.nodes[j - 1].t);
            if (j + 1 < t.nodes.size()) w += 0.5 * (t.nodes[j + 1].t - t.nodes[j].t);
            acc += w * d2;
        }
        return std::sqrt(acc);
    };

    std::vector<double> gaps;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        gaps.push_back(gap_to_ref(runs[i]));
        suite.rows.push_back({ctx.experiment, "modes",
                              kv({{"N", format_g17(n_values_d[i])}}), "mode_truncation_gap",
                              gaps.back(), 0.0, true});
    }
    for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
        suite.rows.push_back({ctx.experiment, "modes",
                              kv({{"N_from", format_g17(n_values_d[i])},
                                  {"N_to", format_g17(n_values_d[i + 1])}}),
                              "gap_decreasing", gaps[i + 1], gaps[i], gaps[i + 1] <= gaps[i]});
    return suite;
}

SuiteResult run_exact_compare(const json& cfg, const SuiteContext& ctx) {
    SuiteResult suite;
    suite.suite = ctx.experiment;
    const std::string mode = need_str(cfg, "mode", ctx.experiment);

    if (mode == "heat-m1") {
        const CaseSpec spec = parse_case(need(cfg, "base", ctx.experiment), ctx.experiment);
        if (spec.nonlinearity.kind() != NonlinearityKind::PowerLaw ||
            spec.nonlinearity.exponent() != 1.0)
            throw ConfigError(ctx.experiment + ": heat-m1 requires the m=1 power law");
        const auto dt_values = need_num_list(cfg, "dt_values", ctx.experiment);
        const json checks = need(cfg, "checks", ctx.experiment);

        const auto& geo = spec.geometry;
        const double T = geo.horizon();
        // ∫_0^T √λ_k(s) ds = √λ_k(0) · r0 · ∫ ds/r(s); closed form per law.
        double I_r = 0.0;
        switch (geo.law()) {
            case RadiusLawKind::Constant:
                I_r = T / geo.r0();
                break;
            case RadiusLawKind::Linear: {
                const double a = geo.radius_rate(0.0) / geo.r0();
                I_r = a == 0.0 ? T / geo.r0() : std::log(geo.radius(T) / geo.r0()) / (geo.r0() * a);
                break;
            }
            default: {
                auto res = adaptive_simpson([&](double s) { return 1.0 / geo.radius(s); }, 0.0, T,
                                            1e-13);
                I_r = res.value;
            }
        }
        const SpectralField u0 =
            parse_data(spec.data, geo.snapshot_at(0.0), mix_seed(ctx.seed, 0), spec.id);
        const auto snap0 = geo.snapshot_at(0.0);
        std::vector<double> exact(snap0.coeff_count());
        const double transport = std::pow(geo.r0() / geo.radius(T), geo.dimension());
        for (int k = 0; k < snap0.coeff_count(); ++k)
            exact[k] =
                u0.coeffs[k] * transport * std::exp(-std::sqrt(snap0.eigenvalue(k)) * geo.r0() * I_r);

        std::vector<double> errors(dt_values.size());
        parallel_for(static_cast<int>(dt_values.size()), [&](int i) {
            CaseSpec local = spec;
            local.dt = dt_values[i];
            SolverConfig sc = make_solver_config(local, mix_seed(ctx.seed, 0));
            sc.initial_data = u0;
            const Trajectory traj = solve_fpme(sc);
            const auto& last = traj.nodes.back();
            const auto final_alpha = pullback(geo, last.t, last.field).coeffs;
            double d2 = 0.0;
            for (int k = 0; k < snap0.coeff_count(); ++k) {
                const double d = final_alpha[k] - exact[k];
                d2 += d * d;
            }
            errors[i] = std::sqrt(d2 * geo.jacobian(T)); // L²(Γ(T)) norm
        });

        for (std::size_t i = 0; i < dt_values.size(); ++i)
            suite.rows.push_back({ctx.experiment, spec.id,
                                  kv({{"dt", format_g17(dt_values[i])}}), "final_l2_error",
                                  errors[i], 0.0, true});
        if (checks.contains("final_error")) {
            const json fe = checks.at("final_error");
            const double want_dt = need_num(fe, "dt", "checks.final_error");
            const double tol_fe = need_num(fe, "tol", "checks.final_error");
            bool found = false;
            for (std::size_t i = 0; i < dt_values.size(); ++i) {
                if (std::abs(dt_values[i] - want_dt) <= 1e-12 * want_dt) {
                    suite.rows.push_back({ctx.experiment, spec.id,
                                          kv({{"dt", format_g17(want_dt)}}), "final_error_check",
                                          errors[i], tol_fe, errors[i] <= tol_fe});
                    found = true;
                }
            }
            if (!found) throw ConfigError("checks.final_error.dt not among dt_values");
        }
        if (checks.contains("order")) {
            const json oc = checks.at("order");
            std::vector<double> xs(dt_values.size());
            for (std::size_t i = 0; i < dt_values.size(); ++i) xs[i] = std::log(dt_values[i]);
            const auto fit = fit_rate(xs, errors);
            const double expect = need_num(oc, "expect", "checks.order");
            const double band = need_num(oc, "band", "checks.order");
            const bool ok = std::abs(fit.slope - expect) <= band;
            suite.rows.push_back({ctx.experiment, spec.id, "", "observed_order", fit.slope,
                                  expect, ok});
        }
        return suite;
    }

    if (mode == "constant-datum") {
        const json& cases = need(cfg, "cases", ctx.experiment);
        std::vector<std::vector<ResultRow>> slots(cases.size());
        parallel_for(static_cast<int>(cases.size()), [&](int ci) {
            const CaseSpec spec = parse_case(cases.at(ci), ctx.experiment);
            const json checks = need(cases.at(ci), "checks", spec.id);
            const double tol = need_num(checks, "value", spec.id + ".checks");
            SolverConfig sc = make_solver_config(spec, mix_seed(ctx.seed, ci));
            const double c0 = need_num(spec.data, "value", spec.id + ".data");
            const Trajectory traj = spec.nonlinearity.kind() == NonlinearityKind::PowerLaw
                                        ? solve_fpme(sc)
                                        : solve_nondegenerate(sc);
            double worst = 0.0, spurious = 0.0;
            for (const auto& node : traj.nodes) {
                const double expect =
                    c0 * std::pow(spec.geometry.r0() / spec.geometry.radius(node.t),
                                  spec.geometry.dimension());
                worst = std::max(worst, std::abs(mean(node.field) - expect));
                for (std::size_t k = 1; k < node.field.coeffs.size(); ++k)
                    spurious = std::max(spurious, std::abs(node.field.coeffs[k]));
            }
            const std::string params = kv({{"case", spec.id}, {"value", format_g17(c0)}});
            slots[ci].push_back({ctx.experiment, spec.id, params, "constant_datum_error", worst,
                                 tol, worst <= tol});
            slots[ci].push_back({ctx.experiment, spec.id, params, "spurious_modes", spurious,
                                 1e-10, spurious <= 1e-10});
        });
        for (auto& s : slots)
            for (auto& r : s) suite.rows.push_back(std::move(r));
        return suite;
    }
    throw ConfigError(ctx.experiment + ": unknown exact-compare mode '" + mode + "'");
}

// ----------------------------------------------------------------- dispatch

bool verb_accepts(const std::string& verb, const std::string& kind) {
    if (verb.empty()) return true;
    if (verb == "verify") return kind.rfind("verify-", 0) == 0;
    if (verb == "sweep") return kind.rfind("sweep-", 0) == 0;
    if (verb == "solve") return kind == "solve";
    if (verb == "compare") return kind == "exact-compare";
    return false;
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows,
               const std::string& timestamp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open CSV output path: " + path);
    out << "experiment,case,params,metric,value,threshold,pass,timestamp\n";
    for (const auto& r : rows) {
        out << r.experiment << ',' << r.case_id << ',' << r.params << ',' << r.metric << ','
            << format_g17(r.value) << ',' << format_g17(r.threshold) << ',' << (r.pass ? 1 : 0)
            << ',' << timestamp << '\n';
    }
}

} // namespace

RunOutcome run_config_text(const std::string& config_text, const std::string& out_dir,
                           const std::string& verb, const std::string& source_name) {
    RunOutcome outcome;
    json cfg;
    try {
        cfg = json::parse(config_text);
    } catch (const json::parse_error& e) {
        outcome.code = ExitCode::ConfigError;
        outcome.error = "JSON parse error in " + source_name + ": " + e.what();
        return outcome;
    }
    try {
        const std::string kind = need_str(cfg, "experiment", "config");
        const std::string id = need_str(cfg, "id", "config");
        if (!verb_accepts(verb, kind))
            throw ConfigError("experiment kind '" + kind + "' is not runnable under verb '" +
                              verb + "'");
        SuiteContext ctx;
        ctx.experiment = id;
        ctx.seed = static_cast<std::uint64_t>(need_int(cfg, "seed", "config"));
        const std::string output = need_str(cfg, "output", "config");

        SuiteResult suite;
        if (kind == "verify-extension")
            suite = run_verify_extension(cfg, ctx);
        else if (kind == "verify-norms")
            suite = run_verify_norms(cfg, ctx);
        else if (kind == "solve")
            suite = run_solve(cfg, ctx);
        else if (kind == "sweep-R")
            suite = run_sweep_R(cfg, ctx);
        else if (kind == "sweep-k")
            suite = run_sweep_k(cfg, ctx);
        else if (kind == "sweep-dt")
            suite = run_sweep_dt(cfg, ctx);
        else if (kind == "sweep-N")
            suite = run_sweep_N(cfg, ctx);
        else if (kind == "exact-compare")
            suite = run_exact_compare(cfg, ctx);
        else
            throw ConfigError("unknown experiment kind: " + kind);

        std::filesystem::create_directories(out_dir);
        suite.csv_path = (std::filesystem::path(out_dir) / output).string();
        write_csv(suite.csv_path, suite.rows, utc_timestamp());
        outcome.suites.push_back(std::move(suite));
        outcome.code = outcome.suites.back().passed() ? ExitCode::Pass : ExitCode::ToleranceFailure;
    } catch (const ConfigError& e) {
        outcome.code = ExitCode::ConfigError;
        outcome.error = e.what();
    } catch (const std::invalid_argument& e) {
        outcome.code = ExitCode::ConfigError;
        outcome.error = e.what();
    } catch (const SolverError& e) {
        outcome.code = ExitCode::SolverFailure;
        outcome.error = e.what();
    }
    return outcome;
}

RunOutcome run_config_file(const std::string& config_path, const std::string& out_dir,
                           const std::string& verb) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        RunOutcome outcome;
        outcome.code = ExitCode::ConfigError;
        outcome.error = "cannot open config file: " + config_path;
        return outcome;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return run_config_text(buf.str(), out_dir, verb, config_path);
}

const std::vector<SuiteInfo>& builtin_suites() {
    static const std::vector<SuiteInfo> suites = {
        {"extension-correctness", "verify-extension", "c01_extension_residual.json",
         "harmonic extension PDE residual and trace exactness"},
        {"dtn-equivalence", "verify-extension", "c02_dtn_richardson.json",
         "spectral DtN vs Richardson-extrapolated normal derivative"},
        {"gradient-energy", "verify-extension", "c03_gradient_energy.json",
         "gradient-energy identities, closed forms vs quadrature"},
        {"truncation-decay", "sweep-R", "c04_truncation_decay.json",
         "truncated-extension energy gap vs proved bound and decay rate"},
        {"norm-equivalence", "verify-norms", "c05_norm_equivalence.json",
         "H(M) vs H^{1/2}(M) constants, Parseval, K-functional quadrature"},
        {"mass-conservation", "solve", "c06_mass_conservation.json",
         "conservation of mass across m and radius laws"},
        {"l1-contraction", "sweep-dt", "c07_l1_contraction.json",
         "L1-contraction violation and its refinement under dt halving"},
        {"comparison-principle", "solve", "c08_comparison.json",
         "ordered data stay ordered pointwise"},
        {"max-principle", "solve", "c09_max_principle.json",
         "weak maximum principle with the divergence-driven growth factor"},
        {"exact-heat", "exact-compare", "c10_exact_heat.json",
         "m=1 per-mode closed form on the dilating circle, temporal order"},
        {"constant-datum", "exact-compare", "c11_constant_datum.json",
         "constant solution on dilating circle and sphere"},
        {"regularization-limit", "sweep-k", "c12_regularization_limit.json",
         "regularized-nonlinearity solutions converge to the direct solve"},
        {"truncated-to-full", "sweep-R", "c13_truncated_to_full.json",
         "truncated-cylinder solves approach the full-cylinder solve"},
    };
    return suites;
}

} // namespace fpme::harness
