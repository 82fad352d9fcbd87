// geometry.hpp — prescribed evolution of the closed manifold: uniform
// dilations with radius law r(t), flow Jacobian, velocity divergence,
// eigenvalue floor, pushforward/pullback of spectral fields, and the
// discrete transport/integration-by-parts residual.

#pragma once

#include "fpme/manifold.hpp"

#include <functional>
#include <vector>

namespace fpme {

enum class RadiusLawKind { Constant, Linear, Sinusoidal };

/// r(t) ∈ {r0, r0(1+at), r0(1+a sin ωt)} on [0, T]; validated at
/// construction so that min_t r(t) > 0. The flow is the uniform dilation
/// x ↦ (r(t)/r0)·x, so J_t^0 = (r(t)/r0)^d and ∇_Γ·w = d·r'(t)/r(t).
class EvolvingGeometry {
public:
    static EvolvingGeometry constant(ManifoldFamily family, double r0, double horizon,
                                     int mode_count = 1);
    static EvolvingGeometry linear(ManifoldFamily family, double r0, double a, double horizon,
                                   int mode_count = 1);
    static EvolvingGeometry sinusoidal(ManifoldFamily family, double r0, double a, double omega,
                                       double horizon, int mode_count = 1);

    ManifoldFamily family() const { return family_; }
    RadiusLawKind law() const { return law_; }
    int dimension() const { return family_ == ManifoldFamily::Circle ? 1 : 2; }
    double horizon() const { return horizon_; }
    int mode_count() const { return mode_count_; }
    double r0() const { return r0_; }

    double radius(double t) const;
    double radius_rate(double t) const; // r'(t)

    /// Manifold at time t; throws std::out_of_range for t outside [0, T].
    ManifoldSnapshot snapshot_at(double t) const;

    double div_w(double t) const;    // d·r'(t)/r(t)
    double jacobian(double t) const; // J_t^0 = (r(t)/r0)^d

    double min_radius() const { return r_min_; }
    double max_radius() const { return r_max_; }

    /// C with |∇_Γ·w(t)| ≤ C on [0, T] (exact for the closed-form laws).
    double div_w_bound() const { return div_bound_; }

    /// Uniform spectral-gap floor: min_t λ_1(t) = c_d / max_t r(t)².
    double eigenvalue_floor() const;

    bool static_surface() const { return law_ == RadiusLawKind::Constant; }

private:
    EvolvingGeometry(ManifoldFamily family, RadiusLawKind law, double r0, double a, double omega,
                     double horizon, int mode_count);
    void check_time(double t) const;

    ManifoldFamily family_;
    RadiusLawKind law_;
    double r0_, a_, omega_, horizon_;
    int mode_count_;
    double r_min_, r_max_, div_bound_;
};

struct TimeNode {
    double t = 0.0;
    ManifoldSnapshot snapshot;
};

TimeNode time_node(const EvolvingGeometry& geo, double t);

/// Coefficients on Γ(t) of the pushed-forward field (φ_t u)(x) = u(Φ_0^t(x));
/// for dilations this is the per-mode scaling (r(t)/r0)^{d/2}.
SpectralField pushforward(const EvolvingGeometry& geo, double t, const SpectralField& on_gamma0);
SpectralField pullback(const EvolvingGeometry& geo, double t, const SpectralField& on_gamma_t);

/// Discrete residual of ∫_0^T ⟨u̇, f(u)⟩ = ∫F(u(T)) − ∫F(u_0) − ∫∫F(u)∇_Γ·w
/// for a sampled trajectory (fields live on Γ(t_j)); O(Δt) for smooth data.
double transport_residual(const EvolvingGeometry& geo, const std::vector<double>& times,
                          const std::vector<SpectralField>& fields,
                          const std::function<double(double)>& f,
                          const std::function<double(double)>& F);

} // namespace fpme
