#include "fpme/manifold.hpp"

#include "fpme/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fpme {

namespace {
double basis_norm_sphere(const ManifoldSnapshot& s, int l) {
    return std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI)) / s.radius;
}
} // namespace

SpectralField::SpectralField(ManifoldSnapshot s, std::vector<double> c)
    : snapshot(s), coeffs(std::move(c)) {
    if (static_cast<int>(coeffs.size()) != snapshot.coeff_count())
        throw std::invalid_argument("SpectralField: coefficient length does not match mode layout");
    for (double v : coeffs)
        if (!std::isfinite(v)) throw std::invalid_argument("SpectralField: non-finite coefficient");
}

double basis_value(const ManifoldSnapshot& s, int mode, double param) {
    if (s.family == ManifoldFamily::Circle) {
        const double r = s.radius;
        if (mode == 0) return 1.0 / std::sqrt(2.0 * M_PI * r);
        const int q = (mode + 1) / 2;
        const double scale = 1.0 / std::sqrt(M_PI * r);
        return (mode % 2 == 1) ? scale * std::cos(q * param) : scale * std::sin(q * param);
    }
    // Zonal sphere: normalized Legendre in x = cos ϑ.
    const int l = mode;
    const double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI)) / s.radius;
    return norm * legendre_p(l, param);
}

std::vector<double> grid_points(const ManifoldSnapshot& s, int n) {
    if (n < 2) throw std::invalid_argument("grid_points: grid size must be >= 2");
    std::vector<double> pts(n);
    if (s.family == ManifoldFamily::Circle) {
        for (int j = 0; j < n; ++j) pts[j] = 2.0 * M_PI * j / n;
    } else {
        pts = gauss_legendre(n).nodes;
    }
    return pts;
}

std::vector<double> grid_weights(const ManifoldSnapshot& s, int n) {
    std::vector<double> w(n);
    if (s.family == ManifoldFamily::Circle) {
        const double wj = 2.0 * M_PI * s.radius / n;
        std::fill(w.begin(), w.end(), wj);
    } else {
        const auto& rule = gauss_legendre(n);
        const double scale = 2.0 * M_PI * s.radius * s.radius;
        for (int i = 0; i < n; ++i) w[i] = scale * rule.weights[i];
    }
    return w;
}

int dense_grid_size(const ManifoldSnapshot& s) {
    const int base = s.family == ManifoldFamily::Circle ? 4096 : 2048;
    return std::max(base, 8 * s.coeff_count());
}

GridField synthesize(const SpectralField& field, int grid_size) {
    const auto& s = field.snapshot;
    const int c = s.coeff_count();
    if (grid_size < c)
        throw std::invalid_argument("synthesize: grid too small for the mode layout");
    const auto pts = grid_points(s, grid_size);
    GridField out{s, std::vector<double>(grid_size, 0.0)};
    if (s.family == ManifoldFamily::Circle) {
        const double c0 = 1.0 / std::sqrt(2.0 * M_PI * s.radius);
        const double cq = 1.0 / std::sqrt(M_PI * s.radius);
        for (int j = 0; j < grid_size; ++j) {
            // cos/sin of qθ by the angle-addition recurrence.
            const double c1 = std::cos(pts[j]), s1 = std::sin(pts[j]);
            double cp = 1.0, sp = 0.0;
            double acc = field.coeffs[0] * c0;
            for (int q = 1; q <= s.mode_count; ++q) {
                const double cn = cp * c1 - sp * s1;
                const double sn = sp * c1 + cp * s1;
                acc += cq * (field.coeffs[2 * q - 1] * cn + field.coeffs[2 * q] * sn);
                cp = cn;
                sp = sn;
            }
            out.values[j] = acc;
        }
    } else {
        for (int i = 0; i < grid_size; ++i) {
            // Legendre recurrence inlined across degrees at fixed node.
            const double x = pts[i];
            double p0 = 1.0, p1 = x;
            double acc = field.coeffs[0] * basis_norm_sphere(s, 0);
            if (s.mode_count >= 1) acc += field.coeffs[1] * basis_norm_sphere(s, 1) * x;
            for (int l = 2; l <= s.mode_count; ++l) {
                const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
                acc += field.coeffs[l] * basis_norm_sphere(s, l) * p2;
            }
            out.values[i] = acc;
        }
    }
    return out;
}

SpectralField analyze(const GridField& grid) {
    const auto& s = grid.snapshot;
    const int n = static_cast<int>(grid.values.size());
    if (n < s.coeff_count())
        throw std::invalid_argument("analyze: grid too small (aliasing) for the mode layout");
    const auto pts = grid_points(s, n);
    const auto w = grid_weights(s, n);
    SpectralField out = SpectralField::zero(s);
    if (s.family == ManifoldFamily::Circle) {
        const double c0 = 1.0 / std::sqrt(2.0 * M_PI * s.radius);
        const double cq = 1.0 / std::sqrt(M_PI * s.radius);
        for (int j = 0; j < n; ++j) {
            const double wv = w[j] * grid.values[j];
            const double c1 = std::cos(pts[j]), s1 = std::sin(pts[j]);
            double cp = 1.0, sp = 0.0;
            out.coeffs[0] += wv;
            for (int q = 1; q <= s.mode_count; ++q) {
                const double cn = cp * c1 - sp * s1;
                const double sn = sp * c1 + cp * s1;
                out.coeffs[2 * q - 1] += wv * cn;
                out.coeffs[2 * q] += wv * sn;
                cp = cn;
                sp = sn;
            }
        }
        out.coeffs[0] *= c0;
        for (int q = 1; q <= s.mode_count; ++q) {
            out.coeffs[2 * q - 1] *= cq;
            out.coeffs[2 * q] *= cq;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const double x = pts[i];
            const double wv = w[i] * grid.values[i];
            double p0 = 1.0, p1 = x;
            out.coeffs[0] += wv * basis_norm_sphere(s, 0);
            if (s.mode_count >= 1) out.coeffs[1] += wv * basis_norm_sphere(s, 1) * x;
            for (int l = 2; l <= s.mode_count; ++l) {
                const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
                out.coeffs[l] += wv * basis_norm_sphere(s, l) * p2;
            }
        }
    }
    return out;
}

double integrate(const SpectralField& field) {
    return field.coeffs[0] * std::sqrt(field.snapshot.measure());
}

double mean(const SpectralField& field) { return integrate(field) / field.snapshot.measure(); }

double l2_norm(const SpectralField& field) {
    double acc = 0.0;
    for (double c : field.coeffs) acc += c * c;
    return std::sqrt(acc);
}

double hm_seminorm(const SpectralField& field) {
    const auto& s = field.snapshot;
    double acc = 0.0;
    for (int k = 1; k < s.coeff_count(); ++k)
        acc += std::sqrt(s.eigenvalue(k)) * field.coeffs[k] * field.coeffs[k];
    return std::sqrt(acc);
}

double hm_norm(const SpectralField& field) {
    const double semi = hm_seminorm(field);
    const double l2 = l2_norm(field);
    return std::sqrt(l2 * l2 + semi * semi);
}

double h12_norm_closed(const SpectralField& field) {
    const auto& s = field.snapshot;
    double acc = 0.0;
    for (int k = 0; k < s.coeff_count(); ++k)
        acc += std::sqrt(1.0 + s.eigenvalue(k)) * field.coeffs[k] * field.coeffs[k];
    return std::sqrt(0.5 * M_PI * acc);
}

double k_functional(const SpectralField& field, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("k_functional: t must be positive");
    const auto& s = field.snapshot;
    double acc = 0.0;
    for (int k = 0; k < s.coeff_count(); ++k) {
        const double a = t * t * (1.0 + s.eigenvalue(k));
        acc += a / (1.0 + a) * field.coeffs[k] * field.coeffs[k];
    }
    return std::sqrt(acc);
}

double h12_norm_quadrature(const SpectralField& field, double rel_tol) {
    const auto& s = field.snapshot;
    std::vector<double> lam(s.coeff_count());
    double scale = 0.0;
    for (int k = 0; k < s.coeff_count(); ++k) {
        lam[k] = s.eigenvalue(k);
        scale += (1.0 + lam[k]) * field.coeffs[k] * field.coeffs[k];
    }
    if (scale == 0.0) return 0.0;

    // ∫_0^∞ K²(t,u)/t² dt with t = e^s; integrand per mode:
    // (1+λ) e^s / (1 + e^{2s}(1+λ)), smooth on the log axis.
    auto integrand = [&](double sv) {
        const double es = std::exp(sv);
        double acc = 0.0;
        for (int k = 0; k < s.coeff_count(); ++k) {
            const double c = field.coeffs[k];
            if (c == 0.0) continue;
            const double opl = 1.0 + lam[k];
            acc += c * c * opl * es / (1.0 + es * es * opl);
        }
        return acc;
    };
    const double lam_max = lam.back();
    // Tail cut-offs: left tail ≤ (1+λmax)e^s·scale, right tail ≤ e^{-s}·scale.
    const double s_lo = -(std::log((1.0 + lam_max)) + std::log(1e4 / rel_tol));
    const double s_hi = std::log(1e4 / rel_tol);
    const double tol = 0.02 * rel_tol * scale;
    auto q = adaptive_simpson(integrand, s_lo, s_hi, tol);
    if (!q.converged) {
        std::ostringstream msg;
        msg << "h12_norm_quadrature: quadrature did not converge, achieved abs error ~"
            << q.error_estimate << " (requested " << tol << ")";
        throw std::runtime_error(msg.str());
    }
    return std::sqrt(q.value);
}

SpectralField pointwise_apply(const std::function<double(double)>& f, const SpectralField& field,
                              double pad_exponent) {
    const auto& s = field.snapshot;
    const int n_modes = s.mode_count;
    const int pad_modes = static_cast<int>(std::ceil(0.5 * (pad_exponent + 1.0) * n_modes));
    const int capacity = n_modes + std::max(pad_modes, n_modes);
    int grid;
    if (s.family == ManifoldFamily::Circle) {
        grid = 2 * capacity + 2;
    } else {
        grid = capacity + 1;
    }
    grid = std::max(grid, 2 * s.coeff_count() + 2);
    GridField g = synthesize(field, grid);
    for (double& v : g.values) {
        v = f(v);
        if (!std::isfinite(v))
            throw std::domain_error("pointwise_apply: map produced a non-finite value");
    }
    return analyze(g);
}

double positive_part_integral(const SpectralField& field, int grid_size) {
    const auto& s = field.snapshot;
    const int n = grid_size > 0 ? grid_size : dense_grid_size(s);
    GridField g = synthesize(field, n);
    const auto w = grid_weights(s, n);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += w[j] * std::max(g.values[j], 0.0);
    return acc;
}

double linf_norm(const SpectralField& field, int grid_size) {
    const auto& s = field.snapshot;
    const int n = grid_size > 0 ? grid_size : dense_grid_size(s);
    GridField g = synthesize(field, n);
    double m = 0.0;
    for (double v : g.values) m = std::max(m, std::abs(v));
    return m;
}

} // namespace fpme
