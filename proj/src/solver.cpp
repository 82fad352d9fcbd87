#include "fpme/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fpme {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int padded_capacity(const NonlinearitySpec& nl, int n_modes) {
    const double m = nl.kind() == NonlinearityKind::Custom ? 3.0 : nl.exponent();
    const int pad = static_cast<int>(std::ceil(0.5 * (m + 1.0) * n_modes));
    return n_modes + std::max(pad, n_modes);
}

/// Assembled spectral Galerkin operator with cached transform matrices.
/// Time enters only through the DtN multipliers and the Jacobian/divergence
/// scalars; the basis values at the parameter nodes are time-independent.
class GalerkinOperator {
public:
    explicit GalerkinOperator(const SolverConfig& config)
        : geo_(config.geometry), beta_(config.nonlinearity), cyl_(config.cylinder),
          snap0_(config.geometry.snapshot_at(0.0)) {
        C_ = snap0_.coeff_count();
        const int capacity = padded_capacity(beta_, snap0_.mode_count);
        P_ = snap0_.family == ManifoldFamily::Circle ? 2 * capacity + 2 : capacity + 1;
        P_ = std::max(P_, 2 * C_ + 2);
        const auto pts = grid_points(snap0_, P_);
        weights0_ = grid_weights(snap0_, P_);
        synth_.resize(P_, C_);
        for (int q = 0; q < P_; ++q)
            for (int k = 0; k < C_; ++k) synth_(q, k) = basis_value(snap0_, k, pts[q]);
        analyze_ = synth_.transpose();
        for (int q = 0; q < P_; ++q) analyze_.col(q) *= weights0_[q];
        gram_ = analyze_ * synth_;
    }

    int coeff_count() const { return C_; }
    int grid_size() const { return P_; }
    const EvolvingGeometry& geometry() const { return geo_; }
    const NonlinearitySpec& nonlinearity() const { return beta_; }

    VectorXd grid_values(const VectorXd& alpha) const { return synth_ * alpha; }

    VectorXd multipliers(double t) const {
        const auto snap = geo_.snapshot_at(t);
        VectorXd mu = VectorXd::Zero(C_);
        if (cyl_.kind == CylinderKind::Truncated) mu[0] = 1.0 / cyl_.R;
        for (int k = 1; k < C_; ++k) {
            const double a = std::sqrt(snap.eigenvalue(k));
            if (cyl_.kind == CylinderKind::Full) {
                mu[k] = a;
            } else {
                const double q = std::exp(-2.0 * a * cyl_.R);
                mu[k] = a * (1.0 + q) / (1.0 - q);
            }
        }
        return mu;
    }

    VectorXd beta_of(const VectorXd& values, double t) const {
        check_domain(values, t);
        VectorXd out(P_);
        for (int q = 0; q < P_; ++q) out[q] = beta_.psi(values[q]);
        return out;
    }

    VectorXd a_term(double t, const VectorXd& alpha) const {
        const VectorXd u = grid_values(alpha);
        const VectorXd b = beta_of(u, t);
        VectorXd coef = analyze_ * b;
        return multipliers(t).cwiseProduct(coef);
    }

    // W_ij = ∫_{Γ₀} b_i b_j φ_{-t}(∇_Γ·w) by quadrature. The pulled-back
    // divergence of a dilation is spatially constant, which collapses the
    // triple product onto the cached Gram matrix; the sampled path stays in
    // place for spatially varying velocity fields.
    MatrixXd w_matrix(double t) const {
        VectorXd div = VectorXd::Constant(P_, geo_.div_w(t));
        const double lo = div.minCoeff(), hi = div.maxCoeff();
        if (hi - lo <= 1e-14 * (std::abs(hi) + 1.0)) return lo * gram_;
        return analyze_ * div.asDiagonal() * synth_;
    }

    VectorXd rhs(double t, const VectorXd& alpha) const {
        VectorXd out = -a_term(t, alpha);
        if (!geo_.static_surface()) out -= w_matrix(t) * alpha;
        return out;
    }

    // ∂a/∂α = diag(μ) · A · diag(β'(u) + ε_N) · S, with ε_N keeping the
    // linearization nonsingular at the degenerate slope Ψ'(0) = 0.
    MatrixXd jacobian_a(double t, const VectorXd& alpha) const {
        const VectorXd u = grid_values(alpha);
        MatrixXd scaled = synth_;
        for (int q = 0; q < P_; ++q) scaled.row(q) *= beta_.psi_prime(u[q]) + 1e-12;
        MatrixXd jac = analyze_ * scaled;
        const VectorXd mu = multipliers(t);
        for (int k = 0; k < C_; ++k) jac.row(k) *= mu[k];
        return jac;
    }

    double h_energy(double t, const VectorXd& alpha) const {
        const VectorXd u = grid_values(alpha);
        check_domain(u, t);
        double acc = 0.0;
        for (int q = 0; q < P_; ++q) acc += weights0_[q] * beta_.antiderivative_H(u[q]);
        return geo_.jacobian(t) * acc;
    }

    void check_domain(const VectorXd& values, double t) const {
        if (!beta_.nondegenerate()) return;
        const double limit = beta_.working_interval();
        for (int q = 0; q < P_; ++q) {
            if (std::abs(values[q]) > limit) {
                std::ostringstream msg;
                msg << "nonlinearity domain violation at t=" << t << ": value " << values[q]
                    << " outside [-" << limit << ", " << limit << "]";
                throw SolverError(msg.str(), {}, t, values[q]);
            }
        }
    }

    // ‖∇ Ē(Π_N β(u))‖² on the full cylinder over Γ(t): Σ √λ_k(t) [β(u)]_k².
    double grad_energy_rate(double t, const VectorXd& alpha) const {
        const VectorXd u = grid_values(alpha);
        const VectorXd b = beta_of(u, t);
        VectorXd coef = analyze_ * b; // Γ₀-normalized; Γ(t) coefficients are s·coef
        const double s2 = geo_.jacobian(t); // s² = (r/r0)^d
        const auto snap = geo_.snapshot_at(t);
        double acc = 0.0;
        for (int k = 1; k < C_; ++k) acc += std::sqrt(snap.eigenvalue(k)) * coef[k] * coef[k] * s2;
        return acc;
    }

private:
    EvolvingGeometry geo_;
    NonlinearitySpec beta_;
    Cylinder cyl_;
    ManifoldSnapshot snap0_;
    int C_ = 0, P_ = 0;
    MatrixXd synth_;   // P×C basis values at the Γ₀ parameter nodes
    MatrixXd analyze_; // C×P, rows weighted by the Γ₀ quadrature
    MatrixXd gram_;    // analyze·synth (identity to quadrature accuracy)
    std::vector<double> weights0_;
};

SolverState implicit_euler_step(const GalerkinOperator& op, const ImplicitEulerOpts& opts,
                                const SolverState& state, double dt, int depth) {
    const auto& geo = op.geometry();
    const double t1 = state.t + dt;
    const double ratio = geo.jacobian(state.t) / geo.jacobian(t1);
    const VectorXd alpha = Eigen::Map<const VectorXd>(state.alpha.data(), state.alpha.size());

    // Residual of x = (J/J⁺)α + Δt(g⁺ - W⁺)x - Δt a(t⁺, x); the transport
    // factor is exact, so the drift term only carries quadrature error.
    const bool has_drift = !geo.static_surface();
    MatrixXd drift; // Δt(g⁺ I - W⁺)
    if (has_drift) {
        drift = -dt * op.w_matrix(t1);
        drift.diagonal().array() += dt * geo.div_w(t1);
    }
    auto residual = [&](const VectorXd& x) -> VectorXd {
        VectorXd F = x - ratio * alpha + dt * op.a_term(t1, x);
        if (has_drift) F -= drift * x;
        return F;
    };

    VectorXd x = alpha;
    std::vector<double> history;
    NewtonStats stats;
    VectorXd F = residual(x);
    history.push_back(F.norm());
    Eigen::PartialPivLU<MatrixXd> lu;
    bool have_lu = false;
    double prev_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        if (history.back() <= opts.newton_tol) {
            converged = true;
            break;
        }
        // Refresh the analytic Jacobian when contraction stalls.
        if (!have_lu || history.back() > 0.5 * prev_norm) {
            MatrixXd jac = dt * op.jacobian_a(t1, x);
            jac.diagonal().array() += 1.0;
            if (has_drift) jac -= drift;
            lu.compute(jac);
            have_lu = true;
            ++stats.jacobian_rebuilds;
        }
        prev_norm = history.back();
        x += lu.solve(-F);
        F = residual(x);
        history.push_back(F.norm());
        ++stats.iterations;
    }
    if (!converged && history.back() <= opts.newton_tol) converged = true;
    if (!converged) {
        if (depth < 4) {
            // Bisect the failing step.
            SolverState mid = implicit_euler_step(op, opts, state, 0.5 * dt, depth + 1);
            SolverState out = implicit_euler_step(op, opts, mid, 0.5 * dt, depth + 1);
            out.newton.iterations += mid.newton.iterations + stats.iterations;
            out.newton.jacobian_rebuilds += mid.newton.jacobian_rebuilds + stats.jacobian_rebuilds;
            return out;
        }
        std::ostringstream msg;
        msg << "Newton did not converge at t=" << t1 << " (dt=" << dt << ", residual "
            << history.back() << " after " << stats.iterations << " iterations)";
        throw SolverError(msg.str(), history, t1);
    }
    stats.residual = history.back();
    SolverState out;
    out.t = t1;
    out.alpha.assign(x.data(), x.data() + x.size());
    out.newton = stats;
    return out;
}

// Dormand–Prince 5(4) with standard step-size control.
SolverState rk_advance(const GalerkinOperator& op, const ExplicitRKOpts& opts,
                       const SolverState& state, double t_end, double& h_hint) {
    static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double A[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double b5[7] = {35.0 / 384,      0.0,         500.0 / 1113, 125.0 / 192,
                                 -2187.0 / 6784,  11.0 / 84,   0.0};
    static const double b4[7] = {5179.0 / 57600,  0.0,          7571.0 / 16695, 393.0 / 640,
                                 -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

    double t = state.t;
    VectorXd y = Eigen::Map<const VectorXd>(state.alpha.data(), state.alpha.size());
    double h = std::min(h_hint, t_end - t);
    const double tol = opts.adaptive_tol;
    int guard = 0;
    while (t < t_end - 1e-14 * std::max(1.0, t_end)) {
        if (++guard > 2000000)
            throw SolverError("explicit RK stepper exceeded the step budget", {}, t);
        h = std::min(h, t_end - t);
        VectorXd k[7];
        k[0] = op.rhs(t, y);
        for (int s = 1; s < 7; ++s) {
            VectorXd ys = y;
            for (int j = 0; j < s; ++j)
                if (A[s][j] != 0.0) ys += h * A[s][j] * k[j];
            k[s] = op.rhs(t + c[s] * h, ys);
        }
        VectorXd y5 = y, y4 = y;
        for (int s = 0; s < 7; ++s) {
            if (b5[s] != 0.0) y5 += h * b5[s] * k[s];
            if (b4[s] != 0.0) y4 += h * b4[s] * k[s];
        }
        double err = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            const double scale = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            const double e = (y5[i] - y4[i]) / scale;
            err += e * e;
        }
        err = std::sqrt(err / y.size());
        if (err <= 1.0) {
            t += h;
            y = y5;
        }
        const double factor = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
        h = std::max(h * factor, 1e-12);
    }
    h_hint = h;
    SolverState out;
    out.t = t_end;
    out.alpha.assign(y.data(), y.data() + y.size());
    return out;
}

TrajectoryNode make_node(const GalerkinOperator& op, const SolverState& state) {
    const auto& geo = op.geometry();
    const VectorXd alpha = Eigen::Map<const VectorXd>(state.alpha.data(), state.alpha.size());
    TrajectoryNode node;
    node.t = state.t;
    node.field =
        pushforward(geo, state.t, SpectralField(geo.snapshot_at(0.0), state.alpha));
    node.mass = integrate(node.field);
    node.sup_norm = op.grid_values(alpha).cwiseAbs().maxCoeff();
    node.h_energy = op.h_energy(state.t, alpha);
    node.grad_energy_rate = op.grad_energy_rate(state.t, alpha);
    node.newton = state.newton;
    return node;
}

Trajectory solve_impl(const SolverConfig& config) {
    config.validate();
    GalerkinOperator op(config);
    Trajectory traj;
    traj.linf_bound = config.resolved_linf_bound();
    traj.lambda = config.geometry.div_w_bound();

    SolverState state;
    state.t = 0.0;
    state.alpha = config.initial_data.coeffs;
    traj.nodes.push_back(make_node(op, state));

    const double T = config.geometry.horizon();
    const long nsteps = std::lround(std::ceil(T / config.dt - 1e-9));
    double h_hint = config.dt;
    for (long j = 1; j <= nsteps; ++j) {
        const double t_target = std::min(j * config.dt, T);
        if (std::holds_alternative<ImplicitEulerOpts>(config.stepper)) {
            state = implicit_euler_step(op, std::get<ImplicitEulerOpts>(config.stepper), state,
                                        t_target - state.t, 0);
        } else {
            state = rk_advance(op, std::get<ExplicitRKOpts>(config.stepper), state, t_target,
                               h_hint);
        }
        traj.nodes.push_back(make_node(op, state));
    }
    return traj;
}

void require_same_grid(const Trajectory& a, const Trajectory& b, const char* what) {
    if (a.nodes.size() != b.nodes.size())
        throw std::invalid_argument(std::string(what) + ": trajectories have different lengths");
    for (std::size_t j = 0; j < a.nodes.size(); ++j) {
        if (std::abs(a.nodes[j].t - b.nodes[j].t) > 1e-12 ||
            !a.nodes[j].field.snapshot.same_as(b.nodes[j].field.snapshot))
            throw std::invalid_argument(std::string(what) +
                                        ": trajectories do not share the time grid/geometry");
    }
}

} // namespace

void SolverConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be positive");
    if (!initial_data.snapshot.same_as(geometry.snapshot_at(0.0)))
        throw std::invalid_argument("SolverConfig: initial data must live on Γ(0)");
    if (cylinder.kind == CylinderKind::Truncated && !(cylinder.R >= 1.0))
        throw std::invalid_argument("SolverConfig: truncated cylinder requires R >= 1");
}

double SolverConfig::resolved_linf_bound() const {
    if (linf_bound > 0.0) return linf_bound;
    return linf_norm(initial_data);
}

std::vector<double> Trajectory::times() const {
    std::vector<double> out(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) out[j] = nodes[j].t;
    return out;
}

std::vector<double> rhs(const SolverConfig& config, double t, const std::vector<double>& alpha) {
    config.validate();
    GalerkinOperator op(config);
    if (static_cast<int>(alpha.size()) != op.coeff_count())
        throw std::invalid_argument("rhs: coefficient vector has the wrong length");
    const VectorXd a = Eigen::Map<const VectorXd>(alpha.data(), alpha.size());
    const VectorXd out = op.rhs(t, a);
    return std::vector<double>(out.data(), out.data() + out.size());
}

SolverState step(const SolverConfig& config, const SolverState& state) {
    config.validate();
    const double T = config.geometry.horizon();
    if (state.t + config.dt > T * (1.0 + 1e-12))
        throw std::invalid_argument("step: t + dt exceeds the horizon");
    GalerkinOperator op(config);
    if (std::holds_alternative<ImplicitEulerOpts>(config.stepper))
        return implicit_euler_step(op, std::get<ImplicitEulerOpts>(config.stepper), state,
                                   config.dt, 0);
    double h_hint = config.dt;
    return rk_advance(op, std::get<ExplicitRKOpts>(config.stepper), state, state.t + config.dt,
                      h_hint);
}

Trajectory solve_nondegenerate(const SolverConfig& config) {
    if (!config.nonlinearity.nondegenerate())
        throw std::invalid_argument(
            "solve_nondegenerate: nonlinearity must satisfy the non-degeneracy assumptions");
    return solve_impl(config);
}

Trajectory solve_fpme(const SolverConfig& config) {
    if (config.nonlinearity.kind() != NonlinearityKind::PowerLaw)
        throw std::invalid_argument("solve_fpme: nonlinearity must be the power law");
    return solve_impl(config);
}

RegularizedSweepResult solve_fpme_regularized_sweep(const SolverConfig& config,
                                                    const std::vector<double>& ks) {
    if (config.nonlinearity.kind() != NonlinearityKind::PowerLaw)
        throw std::invalid_argument("regularized sweep: base nonlinearity must be the power law");
    if (ks.size() < 2) throw std::invalid_argument("regularized sweep: need at least two k values");
    const double M = config.resolved_linf_bound();
    const double lambda = config.geometry.div_w_bound();
    const double interval = 1.5 * M * std::exp(lambda * config.geometry.horizon());

    RegularizedSweepResult result;
    result.ks = ks;
    for (double k : ks) {
        SolverConfig cfg = config;
        cfg.nonlinearity =
            NonlinearitySpec::regularized(config.nonlinearity.exponent(), k, interval);
        result.trajectories.push_back(solve_nondegenerate(cfg));
    }
    for (std::size_t i = 0; i + 1 < result.trajectories.size(); ++i)
        result.successive_gaps.push_back(
            l2_in_time_gap(result.trajectories[i], result.trajectories[i + 1]));
    result.direct = solve_fpme(config);
    result.direct_gap = l2_in_time_gap(result.trajectories.back(), result.direct);
    return result;
}

std::vector<double> diagnostics_contraction(const Trajectory& a, const Trajectory& b) {
    require_same_grid(a, b, "diagnostics_contraction");
    std::vector<double> series(a.nodes.size());
    for (std::size_t j = 0; j < a.nodes.size(); ++j) {
        SpectralField diff = a.nodes[j].field;
        for (std::size_t k = 0; k < diff.coeffs.size(); ++k)
            diff.coeffs[k] -= b.nodes[j].field.coeffs[k];
        series[j] = positive_part_integral(diff);
    }
    return series;
}

double max_contraction_violation(const std::vector<double>& series) {
    double v = 0.0;
    for (std::size_t j = 0; j + 1 < series.size(); ++j)
        v = std::max(v, series[j + 1] - series[j]);
    return std::max(v, 0.0);
}

std::vector<double> diagnostics_mass(const Trajectory& traj) {
    std::vector<double> out(traj.nodes.size());
    for (std::size_t j = 0; j < traj.nodes.size(); ++j) out[j] = traj.nodes[j].mass;
    return out;
}

double diagnostics_maxprinciple(const Trajectory& traj) {
    if (traj.nodes.empty()) throw std::invalid_argument("diagnostics_maxprinciple: empty trajectory");
    const double M = linf_norm(traj.nodes.front().field);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& node : traj.nodes) {
        const double sup = linf_norm(node.field);
        worst = std::max(worst, sup * std::exp(-traj.lambda * node.t) - M);
    }
    return worst;
}

double l2_in_time_gap(const Trajectory& a, const Trajectory& b) {
    require_same_grid(a, b, "l2_in_time_gap");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.nodes.size(); ++j) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < a.nodes[j].field.coeffs.size(); ++k) {
            const double d = a.nodes[j].field.coeffs[k] - b.nodes[j].field.coeffs[k];
            d2 += d * d;
        }
        double w = 0.0;
        if (j > 0) w += 0.5 * (a.nodes[j].t - a.nodes[j - 1].t);
        if (j + 1 < a.nodes.size()) w += 0.5 * (a.nodes[j + 1].t - a.nodes[j].t);
        acc += w * d2;
    }
    return std::sqrt(acc);
}

double max_order_violation(const Trajectory& lower, const Trajectory& upper) {
    require_same_grid(lower, upper, "max_order_violation");
    double worst = 0.0;
    for (std::size_t j = 0; j < lower.nodes.size(); ++j) {
        SpectralField diff = lower.nodes[j].field;
        for (std::size_t k = 0; k < diff.coeffs.size(); ++k)
            diff.coeffs[k] -= upper.nodes[j].field.coeffs[k];
        const auto g = synthesize(diff, dense_grid_size(diff.snapshot));
        for (double v : g.values) worst = std::max(worst, v);
    }
    return worst;
}

std::vector<double> energy_ledger(const Trajectory& traj) {
    std::vector<double> out(traj.nodes.size());
    double dissipated = 0.0;
    for (std::size_t j = 0; j < traj.nodes.size(); ++j) {
        if (j > 0)
            dissipated +=
                (traj.nodes[j].t - traj.nodes[j - 1].t) * traj.nodes[j].grad_energy_rate;
        out[j] = traj.nodes[j].h_energy + dissipated;
    }
    return out;
}

double transport_residual(const EvolvingGeometry& geo, const Trajectory& traj,
                          const std::function<double(double)>& f,
                          const std::function<double(double)>& F) {
    std::vector<double> times = traj.times();
    std::vector<SpectralField> fields;
    fields.reserve(traj.nodes.size());
    for (const auto& node : traj.nodes) fields.push_back(node.field);
    return transport_residual(geo, times, fields, f, F);
}

} // namespace fpme
