// manifold.hpp — closed manifolds with analytic Laplace–Beltrami eigenpairs
// (circle of radius r, zonal sphere of radius r), spectral transforms,
// quadrature, and the fractional Sobolev norms built from the eigenvalues.
//
// Mode layout:
//   circle        coeffs = (const, cos 1, sin 1, ..., cos N, sin N), length 2N+1
//   zonal sphere  coeffs = (P_0, P_1, ..., P_N), length N+1
// All eigenfunctions are L²(M)-orthonormal; the constant mode is |M|^{-1/2}.

#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace fpme {

enum class ManifoldFamily { Circle, SphereZonal };

struct ManifoldSnapshot {
    ManifoldFamily family = ManifoldFamily::Circle;
    double radius = 1.0;
    int mode_count = 1; // retained eigenmodes beyond the constant mode

    ManifoldSnapshot() = default;
    ManifoldSnapshot(ManifoldFamily f, double r, int n) : family(f), radius(r), mode_count(n) {
        if (!(radius > 0.0)) throw std::invalid_argument("ManifoldSnapshot: radius must be positive");
        if (mode_count < 1) throw std::invalid_argument("ManifoldSnapshot: mode_count must be >= 1");
    }

    int dimension() const { return family == ManifoldFamily::Circle ? 1 : 2; }

    /// Surface measure |M|: 2πr (circle) or 4πr² (sphere).
    double measure() const {
        return family == ManifoldFamily::Circle ? 2.0 * M_PI * radius
                                                : 4.0 * M_PI * radius * radius;
    }

    int coeff_count() const {
        return family == ManifoldFamily::Circle ? 2 * mode_count + 1 : mode_count + 1;
    }

    /// Integer frequency (circle) or Legendre degree (sphere) of a coefficient index.
    int mode_frequency(int mode) const {
        check_mode(mode);
        if (family == ManifoldFamily::Circle) return (mode + 1) / 2;
        return mode;
    }

    /// λ for a coefficient index: (q/r)² on the circle, l(l+1)/r² on the sphere; λ_0 = 0.
    double eigenvalue(int mode) const {
        check_mode(mode);
        if (family == ManifoldFamily::Circle) {
            const double q = mode_frequency(mode);
            return (q / radius) * (q / radius);
        }
        const double l = mode;
        return l * (l + 1.0) / (radius * radius);
    }

    /// First nonzero eigenvalue λ_1 = c_d / r².
    double lambda1() const {
        const double cd = family == ManifoldFamily::Circle ? 1.0 : 2.0;
        return cd / (radius * radius);
    }

    bool same_as(const ManifoldSnapshot& o, double tol = 1e-12) const {
        return family == o.family && mode_count == o.mode_count &&
               std::abs(radius - o.radius) <= tol * std::max(1.0, std::abs(radius));
    }

private:
    void check_mode(int mode) const {
        if (mode < 0 || mode >= coeff_count())
            throw std::out_of_range("ManifoldSnapshot: mode index out of range");
    }
};

/// A function on a ManifoldSnapshot stored as eigenbasis coefficients.
struct SpectralField {
    ManifoldSnapshot snapshot;
    std::vector<double> coeffs;

    SpectralField() = default;
    SpectralField(ManifoldSnapshot s, std::vector<double> c);
    static SpectralField zero(const ManifoldSnapshot& s) {
        return SpectralField(s, std::vector<double>(s.coeff_count(), 0.0));
    }
};

/// Point values on the manifold's parameter grid: equispaced angle (circle)
/// or Gauss–Legendre colatitude nodes (zonal sphere).
struct GridField {
    ManifoldSnapshot snapshot;
    std::vector<double> values;
};

// Basis evaluation at a parameter point (θ on the circle, x = cos ϑ on the sphere).
double basis_value(const ManifoldSnapshot& s, int mode, double param);

/// Parameter nodes of the size-n grid (angles on the circle, cos-colatitudes on the sphere).
std::vector<double> grid_points(const ManifoldSnapshot& s, int n);
/// Quadrature weights matching grid_points; sum equals |M|.
std::vector<double> grid_weights(const ManifoldSnapshot& s, int n);

GridField synthesize(const SpectralField& field, int grid_size);
SpectralField analyze(const GridField& grid);

double integrate(const SpectralField& field); // = coeffs[0]·|M|^{1/2}
double mean(const SpectralField& field);

double hm_seminorm(const SpectralField& field); // (Σ_{k≥1} √λ_k u_k²)^{1/2}
double hm_norm(const SpectralField& field);     // (‖u‖²_{L²} + seminorm²)^{1/2}
double l2_norm(const SpectralField& field);

/// Exact K-method H^{1/2} norm: ((π/2)·Σ_k √(1+λ_k) u_k²)^{1/2}.
double h12_norm_closed(const SpectralField& field);

/// K(t,u) = (Σ_k t²(1+λ_k)/(1+t²(1+λ_k)) u_k²)^{1/2}, t > 0.
double k_functional(const SpectralField& field, double t);

/// Independent oracle for h12_norm_closed: adaptive quadrature of the
/// K-method integral on a log grid. Throws if the requested relative
/// tolerance is not reached (message carries the achieved one).
double h12_norm_quadrature(const SpectralField& field, double rel_tol = 1e-8);

/// Pseudospectral application of a scalar map: synthesize on a padded grid,
/// apply pointwise, analyze, truncate back to N modes. pad_exponent m sizes
/// the padding as ceil((m+1)/2·N) extra modes (exact for polynomial maps of
/// degree ≤ m, best effort otherwise).
SpectralField pointwise_apply(const std::function<double(double)>& f, const SpectralField& field,
                              double pad_exponent = 3.0);

/// ∫_M max(u, 0) by quadrature on a dense grid; error is O(grid^{-2}) near kinks.
double positive_part_integral(const SpectralField& field, int grid_size = 0);

/// sup-norm estimate: max |u| over a dense sampling grid.
double linf_norm(const SpectralField& field, int grid_size = 0);

/// Dense grid size used by positive_part_integral / linf_norm by default.
int dense_grid_size(const ManifoldSnapshot& s);

} // namespace fpme
