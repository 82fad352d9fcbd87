// extension.hpp — closed-form harmonic and truncated-harmonic extensions of
// spectral boundary data into the cylinder M × [0, ∞) resp. M × [0, R],
// trace/evaluation, Dirichlet-to-Neumann maps, fractional powers, and the
// truncation decay/convergence estimates.
//
// Per-mode profiles (a = √λ_k):
//   full       p_k(y) = e^{-a y};               mean mode: constant ū
//   truncated  p_k(y) = sinh(a(R-y))/sinh(aR);  mean mode: (R-y)ū/R
// Everything is symbolic: an ExtensionField stores boundary coefficients and
// the profile kind; no y-grid is ever discretized.

#pragma once

#include "fpme/manifold.hpp"

namespace fpme {

enum class CylinderKind { Full, Truncated };

struct Cylinder {
    CylinderKind kind = CylinderKind::Full;
    double R = 0.0; // truncation height; unused for Full

    static Cylinder full() { return {CylinderKind::Full, 0.0}; }
    static Cylinder truncated(double R) {
        if (!(R > 0.0)) throw std::invalid_argument("Cylinder: truncation height must be positive");
        return {CylinderKind::Truncated, R};
    }
};

struct ExtensionField {
    SpectralField boundary;
    Cylinder cylinder;
};

ExtensionField extend_full(const SpectralField& u);
ExtensionField extend_truncated(const SpectralField& u, double R);

/// Per-mode profile evaluated at height y ≥ 0. A truncated field evaluated
/// at y > R returns the zero field (zero-extension semantics).
SpectralField evaluate_at_height(const ExtensionField& ext, double y);

/// Squared gradient energy ‖∇_ḡ v‖²_{L²}. Full: Σ √λ_k u_k² (the H(M)
/// seminorm squared); truncated: Σ √λ_k coth(√λ_k R) u_k² + |M|ū²/R.
double grad_energy(const ExtensionField& ext);

/// Squared L² norm of the extension. The full extension requires mean-zero
/// boundary data (otherwise it is not square-integrable on the cylinder).
double l2_norm_meanzero(const ExtensionField& ext);

/// Dirichlet-to-Neumann map u ↦ -∂_y v|_{y=0}: multiplier √λ_k (full) or
/// √λ_k coth(√λ_k R) with 1/R on the mean mode (truncated).
SpectralField dtn(const SpectralField& u, const Cylinder& cylinder);

/// Spectral fractional power, s ∈ {1/4, 1/2}: multiplier λ_k^s, zero on the mean.
SpectralField fractional_laplacian(const SpectralField& u, double s);

/// ⟨(-Δ)^{1/2} u, v⟩ = Σ_{k≥1} √λ_k u_k v_k.
double duality_pairing(const SpectralField& u, const SpectralField& v);

struct GapResult {
    double exact = 0.0;
    double proved_bound = 0.0;
};

/// Gradient-energy gap ‖∇(Ēu − Z_R Ē_R u)‖²_{L²(C)}: exact per-mode closed
/// form next to the proved bound
///   3 e^{-R√λ₁}|u-ū|²_H + (2/R) e^{-2R√λ₁}‖u-ū‖² + 2|M|ū²/R.
GapResult decay_gap(const SpectralField& u, double R);

/// L² gap ‖Z_R E_R u − E u‖²_{L²(C)} for mean-zero data: per-mode
/// y-quadrature on [0,R] plus the exact tail, next to the proved bound with
/// the spectral Poincaré constant C_P = 1/λ₁.
GapResult truncation_l2_gap(const SpectralField& u_meanzero, double R);

/// Closed form of the truncation_l2_gap integral (oracle for the quadrature).
double truncation_l2_gap_closed(const SpectralField& u_meanzero, double R);

} // namespace fpme
