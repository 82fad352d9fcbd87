#include "fpme/extension.hpp"

#include "fpme/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace fpme {

namespace {

// sinh(a(R-y))/sinh(aR) evaluated without overflow, 0 ≤ y ≤ R.
double truncated_profile(double a, double R, double y) {
    const double q_full = std::exp(-2.0 * a * R);
    const double q_part = std::exp(-2.0 * a * (R - y));
    return std::exp(-a * y) * (1.0 - q_part) / (1.0 - q_full);
}

double coth(double x) {
    const double q = std::exp(-2.0 * x);
    return (1.0 + q) / (1.0 - q);
}

void require_same_snapshot(const SpectralField& u, const SpectralField& v, const char* what) {
    if (!u.snapshot.same_as(v.snapshot))
        throw std::invalid_argument(std::string(what) + ": snapshot mismatch");
}

} // namespace

ExtensionField extend_full(const SpectralField& u) { return {u, Cylinder::full()}; }

ExtensionField extend_truncated(const SpectralField& u, double R) {
    return {u, Cylinder::truncated(R)};
}

SpectralField evaluate_at_height(const ExtensionField& ext, double y) {
    if (y < 0.0) throw std::invalid_argument("evaluate_at_height: y must be nonnegative");
    const auto& s = ext.boundary.snapshot;
    SpectralField out = SpectralField::zero(s);
    if (ext.cylinder.kind == CylinderKind::Full) {
        out.coeffs[0] = ext.boundary.coeffs[0];
        for (int k = 1; k < s.coeff_count(); ++k) {
            const double a = std::sqrt(s.eigenvalue(k));
            out.coeffs[k] = ext.boundary.coeffs[k] * std::exp(-a * y);
        }
        return out;
    }
    const double R = ext.cylinder.R;
    if (y > R) return out; // Z_R: zero beyond the truncation height
    out.coeffs[0] = ext.boundary.coeffs[0] * (R - y) / R;
    for (int k = 1; k < s.coeff_count(); ++k) {
        const double a = std::sqrt(s.eigenvalue(k));
        out.coeffs[k] = ext.boundary.coeffs[k] * truncated_profile(a, R, y);
    }
    return out;
}

double grad_energy(const ExtensionField& ext) {
    const auto& s = ext.boundary.snapshot;
    const auto& c = ext.boundary.coeffs;
    double acc = 0.0;
    if (ext.cylinder.kind == CylinderKind::Full) {
        for (int k = 1; k < s.coeff_count(); ++k) acc += std::sqrt(s.eigenvalue(k)) * c[k] * c[k];
        return acc;
    }
    const double R = ext.cylinder.R;
    for (int k = 1; k < s.coeff_count(); ++k) {
        const double a = std::sqrt(s.eigenvalue(k));
        acc += a * coth(a * R) * c[k] * c[k];
    }
    // Mean-mode profile (R-y)ū/R contributes |M|ū²/R = u_0²/R.
    acc += c[0] * c[0] / R;
    return acc;
}

double l2_norm_meanzero(const ExtensionField& ext) {
    const auto& s = ext.boundary.snapshot;
    const auto& c = ext.boundary.coeffs;
    double acc = 0.0;
    if (ext.cylinder.kind == CylinderKind::Full) {
        const double scale = l2_norm(ext.boundary);
        if (std::abs(c[0]) > 1e-12 * std::max(1.0, scale))
            throw std::domain_error(
                "l2_norm_meanzero: full extension of data with nonzero mean is not "
                "square-integrable on the infinite cylinder");
        for (int k = 1; k < s.coeff_count(); ++k)
            acc += c[k] * c[k] / (2.0 * std::sqrt(s.eigenvalue(k)));
        return acc;
    }
    const double R = ext.cylinder.R;
    for (int k = 1; k < s.coeff_count(); ++k) {
        const double a = std::sqrt(s.eigenvalue(k));
        const double q = std::exp(-2.0 * a * R);
        // (1/(2a)) (e^{2aR} - e^{-2aR} - 4aR)/(e^{2aR} + e^{-2aR} - 2).
        acc += c[k] * c[k] * (1.0 - q * q - 4.0 * a * R * q) / ((1.0 - q) * (1.0 - q) * 2.0 * a);
    }
    acc += R * c[0] * c[0] / 3.0; // ∫_0^R ((R-y)/R)² dy · |M|ū²
    return acc;
}

SpectralField dtn(const SpectralField& u, const Cylinder& cylinder) {
    const auto& s = u.snapshot;
    SpectralField out = SpectralField::zero(s);
    if (cylinder.kind == CylinderKind::Full) {
        for (int k = 1; k < s.coeff_count(); ++k)
            out.coeffs[k] = std::sqrt(s.eigenvalue(k)) * u.coeffs[k];
        return out;
    }
    const double R = cylinder.R;
    out.coeffs[0] = u.coeffs[0] / R; // -∂_y of (R-y)ū/R at y = 0
    for (int k = 1; k < s.coeff_count(); ++k) {
        const double a = std::sqrt(s.eigenvalue(k));
        out.coeffs[k] = a * coth(a * R) * u.coeffs[k];
    }
    return out;
}

SpectralField fractional_laplacian(const SpectralField& u, double s_power) {
    if (s_power != 0.25 && s_power != 0.5)
        throw std::invalid_argument("fractional_laplacian: exponent must be 1/4 or 1/2");
    const auto& s = u.snapshot;
    SpectralField out = SpectralField::zero(s);
    for (int k = 1; k < s.coeff_count(); ++k)
        out.coeffs[k] = std::pow(s.eigenvalue(k), s_power) * u.coeffs[k];
    return out;
}

double duality_pairing(const SpectralField& u, const SpectralField& v) {
    require_same_snapshot(u, v, "duality_pairing");
    const auto& s = u.snapshot;
    double acc = 0.0;
    for (int k = 1; k < s.coeff_count(); ++k)
        acc += std::sqrt(s.eigenvalue(k)) * u.coeffs[k] * v.coeffs[k];
    return acc;
}

GapResult decay_gap(const SpectralField& u, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("decay_gap: R must be positive");
    const auto& s = u.snapshot;
    const auto& c = u.coeffs;
    const double lam1 = s.lambda1();

    GapResult out;
    double semi_sq = 0.0, l2_meanzero_sq = 0.0;
    for (int k = 1; k < s.coeff_count(); ++k) {
        const double a = std::sqrt(s.eigenvalue(k));
        const double q = std::exp(-2.0 * a * R);
        // [0,R] part a e^{-2aR}(coth(aR)+1) plus tail a e^{-2aR} = 2aq/(1-q) per u_k².
        out.exact += c[k] * c[k] * 2.0 * a * q / (1.0 - q);
        semi_sq += a * c[k] * c[k];
        l2_meanzero_sq += c[k] * c[k];
    }
    out.exact += c[0] * c[0] / R; // mean mode: constant vs (R-y)ū/R profile
    out.proved_bound = 3.0 * std::exp(-R * std::sqrt(lam1)) * semi_sq +
                      (2.0 / R) * std::exp(-2.0 * R * std::sqrt(lam1)) * l2_meanzero_sq +
                      2.0 * c[0] * c[0] / R;
    return out;
}

GapResult truncation_l2_gap(const SpectralField& u, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("truncation_l2_gap: R must be positive");
    const auto& s = u.snapshot;
    const auto& c = u.coeffs;
    if (std::abs(c[0]) > 1e-12 * std::max(1.0, l2_norm(u)))
        throw std::domain_error("truncation_l2_gap: data must have zero mean");
    const double lam1 = s.lambda1();

    GapResult out;
    double semi_sq = 0.0, l2_sq = 0.0;
    for (int k = 1; k < s.coeff_count(); ++k) {
        if (c[k] == 0.0) continue;
        const double a = std::sqrt(s.eigenvalue(k));
        auto integrand = [&](double y) {
            const double d = std::exp(-a * y) - truncated_profile(a, R, y);
            return d * d;
        };
        // Composite Gauss panels; the integrand peaks near y = R on the a-scale.
        const int panels = std::max(8, static_cast<int>(std::ceil(a * R)) + 4);
        const auto& rule = gauss_legendre(16);
        double mode_int = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double y0 = R * p / panels, y1 = R * (p + 1) / panels;
            const double h = 0.5 * (y1 - y0), m = 0.5 * (y0 + y1);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                mode_int += h * rule.weights[i] * integrand(m + h * rule.nodes[i]);
        }
        const double q = std::exp(-2.0 * a * R);
        out.exact += c[k] * c[k] * (mode_int + q / (2.0 * a)); // + exact tail ∫_R^∞ e^{-2ay}
        semi_sq += a * c[k] * c[k];
        l2_sq += c[k] * c[k];
    }
    const double cp = 1.0 / lam1; // spectral Poincaré constant for mean-zero data
    out.proved_bound = cp * (3.0 * std::exp(-R * std::sqrt(lam1)) * semi_sq +
                            (2.0 / R) * std::exp(-2.0 * R * std::sqrt(lam1)) * l2_sq) +
                      std::exp(-2.0 * R * std::sqrt(lam1)) / (2.0 * std::sqrt(lam1)) * l2_sq;
    return out;
}

double truncation_l2_gap_closed(const SpectralField& u, double R) {
    const auto& s = u.snapshot;
    const auto& c = u.coeffs;
    double acc = 0.0;
    for (int k = 1; k < s.coeff_count(); ++k) {
        const double a = std::sqrt(s.eigenvalue(k));
        const double q = std::exp(-2.0 * a * R);
        // ∫_0^R (e-s)² dy + tail = q/(a(1-q)) - 2Rq²/(1-q)².
        acc += c[k] * c[k] * (q / (a * (1.0 - q)) - 2.0 * R * q * q / ((1.0 - q) * (1.0 - q)));
    }
    return acc;
}

} // namespace fpme
