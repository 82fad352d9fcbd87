// nonlinearity.hpp — the porous-medium nonlinearity Ψ(r) = |r|^{m-1} r,
// the smooth regularized family Ψ_k, validated general nonlinearities β,
// antiderivatives H = ∫Ψ and G = ∫Ψ⁻¹, and the height truncation T_k.

#pragma once

#include <functional>
#include <optional>
#include <string>

namespace fpme {

enum class NonlinearityKind { PowerLaw, Regularized, Custom };

/// Constants realized by the grid validation of a Regularized/Custom spec.
struct ValidatedConstants {
    double slope_min = 0.0;       // min Ψ' on [-A, A]
    double slope_max = 0.0;       // max Ψ' on [-A, A]
    double c_k = 0.0;             // 1/slope_min, so 1/C_k ≤ Ψ'
    double inv_linear_c1 = 0.0;   // |Ψ⁻¹(r)| ≤ C₁|r| + C₂ on the image of [-A, A]
    double inv_linear_c2 = 0.0;
    double inv_second_bound = 0.0; // sup |(Ψ⁻¹)''|
    double uniform_gap = 0.0;      // max |Ψ_k - Ψ| on [-A, A] (Regularized only)
};

/// Immutable description of the nonlinearity; evaluation is pure.
class NonlinearitySpec {
public:
    /// Ψ(r) = |r|^{m-1} r, m ≥ 1 (degenerate at 0 for m > 1).
    static NonlinearitySpec power_law(double m);

    /// Smooth non-degenerate regularization on the working interval [-A, A]:
    ///   Ψ_k(r) = (r² + δ_k²)^{(m-1)/2} r + c r,  δ_k = 1/k, c = 1/k,
    /// with c shrunk if needed so Ψ_k' ≤ k on [-A, A]. All conditions
    /// (Ψ_k(0)=0, 1/C_k ≤ Ψ_k' ≤ k, linear bound on Ψ_k⁻¹, bounded (Ψ_k⁻¹)'')
    /// are validated on a 10⁴-point grid; the realized constants are stored.
    /// Throws std::invalid_argument naming the condition that failed.
    static NonlinearitySpec regularized(double m, double k, double A);

    /// General β with supplied derivative; β⁻¹ is computed by safeguarded
    /// Newton unless given. Validates β(0)=0, β' ≥ C_β' > 0, (β⁻¹)' ≥ C > 0
    /// and boundedness of β', (β⁻¹)', (β⁻¹)'' on [-A, A].
    static NonlinearitySpec custom(std::function<double(double)> beta,
                                   std::function<double(double)> beta_prime, double A,
                                   std::function<double(double)> beta_inverse = nullptr,
                                   std::string name = "custom");

    NonlinearityKind kind() const { return kind_; }
    double exponent() const { return m_; }
    double regularization() const { return k_; }
    double working_interval() const { return interval_; }
    const ValidatedConstants& constants() const { return constants_; }
    const std::string& name() const { return name_; }

    double psi(double r) const;
    double psi_inv(double r) const;
    double psi_prime(double r) const;

    double antiderivative_H(double r) const; // ∫_0^r Ψ, closed form for PowerLaw
    double antiderivative_G(double r) const; // ∫_0^r Ψ⁻¹

    /// True when the nonlinearity satisfies the non-degeneracy assumptions
    /// on its working interval (Regularized and Custom kinds).
    bool nondegenerate() const { return kind_ != NonlinearityKind::PowerLaw; }

private:
    NonlinearitySpec() = default;
    void check_domain(double r) const;
    double base_psi(double r) const;       // without domain check
    double base_psi_prime(double r) const;
    void validate_on_grid();

    NonlinearityKind kind_ = NonlinearityKind::PowerLaw;
    double m_ = 1.0;
    double k_ = 0.0;       // regularization index
    double delta_ = 0.0;   // 1/k
    double lin_coeff_ = 0.0;
    double interval_ = 0.0; // working interval half-width A (0 = whole line)
    ValidatedConstants constants_;
    std::string name_;
    std::function<double(double)> beta_, beta_prime_, beta_inv_;
};

/// Truncation at height k: clamp to [-k, k]; 1-Lipschitz and idempotent.
double truncate_at_height(double r, double k);

} // namespace fpme
