// solver.hpp — spectral Galerkin time integration of the fractional porous
// medium flow and its non-degenerate relatives on evolving manifolds.
//
// Unknowns are eigenbasis coefficients α on Γ₀ (the basis is orthonormal in
// L²(Γ₀) and orthogonal in the half-order norm). The semi-discrete system is
//   α' = -W(t) α - a(t, α),      a(t, α) = DtN-multiplier ∘ Π_N β(u(t)),
// with W assembled from ∇_Γ·w by quadrature and the nonlinear term evaluated
// pseudospectrally on a dealiased grid. The implicit Euler step integrates
// the dilation transport factor exactly (Jacobian ratio), which makes the
// mean-mode update — and hence the mass — discretely exact on full cylinders.

#pragma once

#include "fpme/extension.hpp"
#include "fpme/geometry.hpp"
#include "fpme/manifold.hpp"
#include "fpme/nonlinearity.hpp"

#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

namespace fpme {

class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg, std::vector<double> residual_history = {},
                         double t = 0.0, double offending_value = 0.0)
        : std::runtime_error(msg), residual_history_(std::move(residual_history)), t_(t),
          offending_value_(offending_value) {}
    const std::vector<double>& residual_history() const { return residual_history_; }
    double time() const { return t_; }
    double offending_value() const { return offending_value_; }

private:
    std::vector<double> residual_history_;
    double t_;
    double offending_value_;
};

struct ImplicitEulerOpts {
    double newton_tol = 1e-10;
    int max_iter = 30;
};

struct ExplicitRKOpts {
    double adaptive_tol = 1e-8;
};

using StepperOpts = std::variant<ImplicitEulerOpts, ExplicitRKOpts>;

struct SolverConfig {
    EvolvingGeometry geometry;
    NonlinearitySpec nonlinearity;
    SpectralField initial_data; // on Γ₀; snapshot must match geometry.snapshot_at(0)
    Cylinder cylinder = Cylinder::full();
    double dt = 1e-3;
    StepperOpts stepper = ImplicitEulerOpts{};
    double linf_bound = 0.0; // M = ‖u₀‖_∞; 0 → computed from the data

    void validate() const;
    double resolved_linf_bound() const;
};

struct NewtonStats {
    int iterations = 0;
    double residual = 0.0;
    int jacobian_rebuilds = 0;
};

struct SolverState {
    double t = 0.0;
    std::vector<double> alpha; // Γ₀-basis coefficients
    NewtonStats newton;
};

struct TrajectoryNode {
    double t = 0.0;
    SpectralField field; // on Γ(t)
    double mass = 0.0;
    double sup_norm = 0.0;         // max |u| on the dealiased solver grid
    double h_energy = 0.0;         // ∫_{Γ(t)} H(u)
    double grad_energy_rate = 0.0; // ‖∇ Ē(Π_N Ψ(u))‖²_{L²(C(t))}
    NewtonStats newton;
};

struct Trajectory {
    std::vector<TrajectoryNode> nodes;
    double linf_bound = 0.0; // M of the originating config
    double lambda = 0.0;     // ‖∇_Γ·w‖_∞ of the originating geometry

    std::vector<double> times() const;
};

/// α' = -W(t)α - a(t,α). Convenience wrapper that assembles the operator per
/// call; the solve loops reuse a cached operator internally.
std::vector<double> rhs(const SolverConfig& config, double t, const std::vector<double>& alpha);

/// One time step from state.t to state.t + dt (implicit Euler + Newton, or
/// one adaptive explicit RK output interval).
SolverState step(const SolverConfig& config, const SolverState& state);

/// Integrate the non-degenerate problem (validated monotone nonlinearity).
Trajectory solve_nondegenerate(const SolverConfig& config);

/// Integrate the fractional porous medium problem with Ψ(r) = |r|^{m-1}r
/// directly (implicit Euler on the monotone system).
Trajectory solve_fpme(const SolverConfig& config);

struct RegularizedSweepResult {
    std::vector<double> ks;
    std::vector<Trajectory> trajectories; // one per k
    std::vector<double> successive_gaps;  // ‖u_{k_i} - u_{k_{i+1}}‖_{L², in time}
    Trajectory direct;                    // direct Ψ solve
    double direct_gap = 0.0;              // ‖u_{k_last} - u_direct‖_{L², in time}
};

/// The regularization fidelity check: solve with Ψ_k for each k, report
/// successive L²-in-time gaps and the gap to the direct solve.
RegularizedSweepResult solve_fpme_regularized_sweep(const SolverConfig& config,
                                                    const std::vector<double>& ks);

/// Time series of ∫_{Γ(t)} (u₁(t) - u₂(t))⁺; trajectories must share the
/// geometry and time grid.
std::vector<double> diagnostics_contraction(const Trajectory& a, const Trajectory& b);

/// Largest increase between consecutive entries (0 when non-increasing).
double max_contraction_violation(const std::vector<double>& series);

std::vector<double> diagnostics_mass(const Trajectory& traj);

/// max_t ‖u(t)‖_∞ e^{-λt} - M with both sup-norms sampled on the same dense
/// grid; λ and M are taken from the trajectory record.
double diagnostics_maxprinciple(const Trajectory& traj);

/// Trapezoidal-in-time L² gap between two trajectories on the same grid.
double l2_in_time_gap(const Trajectory& a, const Trajectory& b);

/// Largest pointwise violation of u₁ ≤ u₂ over all nodes (dense grid).
double max_order_violation(const Trajectory& lower, const Trajectory& upper);

/// t ↦ ∫ H(u(t)) + Σ Δt·‖∇Ē(Π_NΨ(u))‖²: the discrete dissipation ledger.
std::vector<double> energy_ledger(const Trajectory& traj);

double transport_residual(const EvolvingGeometry& geo, const Trajectory& traj,
                          const std::function<double(double)>& f,
                          const std::function<double(double)>& F);

} // namespace fpme
