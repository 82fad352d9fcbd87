#include "fpme/harness.hpp"

#include "fpme/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fpme::harness {

bool SuiteResult::passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.pass; });
}

std::string SuiteResult::summary() const {
    std::size_t ok = 0;
    for (const auto& r : rows)
        if (r.pass) ++ok;
    std::ostringstream out;
    out << "[" << suite << "] " << ok << "/" << rows.size() << " checks passed";
    if (!csv_path.empty()) out << " -> " << csv_path;
    return out.str();
}

std::string csv_without_timestamp(const std::string& csv_text) {
    std::string out;
    out.reserve(csv_text.size());
    std::istringstream in(csv_text);
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        out += (pos == std::string::npos) ? line : line.substr(0, pos);
        out += '\n';
    }
    return out;
}

SpectralField random_field(const ManifoldSnapshot& snapshot, std::uint64_t seed,
                           const FieldGenSpec& spec) {
    if (spec.active_modes < 1 || spec.active_modes > snapshot.mode_count)
        throw ConfigError("random_field: active_modes outside [1, mode_count]");
    Rng rng(seed);
    SpectralField field = SpectralField::zero(snapshot);
    if (snapshot.family == ManifoldFamily::Circle) {
        for (int q = 1; q <= spec.active_modes; ++q) {
            const double scale = std::pow(spec.decay, q);
            field.coeffs[2 * q - 1] = scale * rng.symmetric();
            field.coeffs[2 * q] = scale * rng.symmetric();
        }
    } else {
        for (int l = 1; l <= spec.active_modes; ++l)
            field.coeffs[l] = std::pow(spec.decay, l) * rng.symmetric();
    }
    if (spec.normalize_sup) {
        const double sup = linf_norm(field);
        if (sup > 0.0)
            for (double& c : field.coeffs) c *= spec.amplitude / sup;
    } else {
        for (double& c : field.coeffs) c *= spec.amplitude;
    }
    if (!spec.mean_zero) field.coeffs[0] = spec.offset * std::sqrt(snapshot.measure());
    return field;
}

FitResult fit_rate(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit_rate: size mismatch");
    if (xs.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
    const std::size_t n = xs.size();
    std::vector<double> ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(ys[i] > 0.0)) throw std::invalid_argument("fit_rate: y values must be positive");
        ly[i] = std::log(ys[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: degenerate abscissae");
    FitResult fit;
    fit.slope = sxy / sxx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

double pde_residual_full(const SpectralField& u, int n_theta, int n_y, double y0, double y1) {
    if (n_y < 5) throw std::invalid_argument("pde_residual_full: need at least 5 y samples");
    const auto& s = u.snapshot;
    const int c = s.coeff_count();
    const double h = (y1 - y0) / (n_y - 1);

    std::vector<double> a(c), lam(c);
    for (int k = 0; k < c; ++k) {
        lam[k] = s.eigenvalue(k);
        a[k] = std::sqrt(lam[k]);
    }
    // Per-mode profile table v_k(y_j) = c_k e^{-a_k y_j}.
    std::vector<std::vector<double>> v(n_y, std::vector<double>(c));
    for (int j = 0; j < n_y; ++j)
        for (int k = 0; k < c; ++k) v[j][k] = u.coeffs[k] * std::exp(-a[k] * (y0 + j * h));

    const auto pts = grid_points(s, n_theta);
    double worst = 0.0;
    std::vector<double> r(c);
    for (int j = 2; j + 2 < n_y; ++j) {
        for (int k = 0; k < c; ++k) {
            const double vyy = (-v[j - 2][k] + 16.0 * v[j - 1][k] - 30.0 * v[j][k] +
                                16.0 * v[j + 1][k] - v[j + 2][k]) /
                               (12.0 * h * h);
            r[k] = vyy - lam[k] * v[j][k]; // v_yy + Δ_M v with Δ_M v = -λ v
        }
        for (int i = 0; i < n_theta; ++i) {
            double acc = 0.0;
            for (int k = 0; k < c; ++k) acc += r[k] * basis_value(s, k, pts[i]);
            worst = std::max(worst, std::abs(acc));
        }
    }
    return worst;
}

double dtn_richardson_error(const SpectralField& u, double h0) {
    const auto& s = u.snapshot;
    const int c = s.coeff_count();
    const auto ext = extend_full(u);
    auto one_sided = [&](double h) {
        const auto vh = evaluate_at_height(ext, h);
        std::vector<double> d(c);
        for (int k = 0; k < c; ++k) d[k] = -(vh.coeffs[k] - u.coeffs[k]) / h;
        return d;
    };
    const auto d1 = one_sided(h0);
    const auto d2 = one_sided(0.5 * h0);
    const auto d4 = one_sided(0.25 * h0);
    const auto exact = dtn(u, Cylinder::full());
    double worst = 0.0;
    for (int k = 0; k < c; ++k) {
        const double r1 = 2.0 * d2[k] - d1[k];
        const double r1h = 2.0 * d4[k] - d2[k];
        const double r2 = (4.0 * r1h - r1) / 3.0;
        worst = std::max(worst, std::abs(r2 - exact.coeffs[k]));
    }
    return worst;
}

double grad_energy_truncated_quadrature(const SpectralField& u, double R) {
    const auto& s = u.snapshot;
    double acc = u.coeffs[0] * u.coeffs[0] / R; // linear mean profile, exact
    const auto& rule = gauss_legendre(16);
    for (int k = 1; k < s.coeff_count(); ++k) {
        if (u.coeffs[k] == 0.0) continue;
        const double lam = s.eigenvalue(k);
        const double a = std::sqrt(lam);
        auto denom = 1.0 - std::exp(-2.0 * a * R);
        auto profile = [&](double y) {
            return std::exp(-a * y) * (1.0 - std::exp(-2.0 * a * (R - y))) / denom;
        };
        auto dprofile = [&](double y) {
            return (-a * std::exp(-a * y) - a * std::exp(-a * (2.0 * R - y))) / denom;
        };
        const int panels = std::max(8, static_cast<int>(std::ceil(a * R)) + 4);
        double mode_int = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double yl = R * p / panels, yr = R * (p + 1) / panels;
            const double hw = 0.5 * (yr - yl), mid = 0.5 * (yl + yr);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double y = mid + hw * rule.nodes[i];
                const double pv = profile(y), dv = dprofile(y);
                mode_int += hw * rule.weights[i] * (lam * pv * pv + dv * dv);
            }
        }
        acc += u.coeffs[k] * u.coeffs[k] * mode_int;
    }
    return acc;
}

double competitor_energy(const SpectralField& u, double eps, const std::vector<double>& poly) {
    const auto& s = u.snapshot;
    auto q = [&](double y) {
        double acc = 0.0, yp = y;
        for (double cf : poly) {
            acc += cf * yp;
            yp *= y;
        }
        return acc;
    };
    auto qp = [&](double y) {
        double acc = 0.0, yp = 1.0;
        int i = 1;
        for (double cf : poly) {
            acc += cf * i * yp;
            yp *= y;
            ++i;
        }
        return acc;
    };
    double total = 0.0;
    for (int k = 1; k < s.coeff_count(); ++k) {
        if (u.coeffs[k] == 0.0) continue;
        const double lam = s.eigenvalue(k);
        const double a = std::sqrt(lam);
        auto integrand = [&](double y) {
            const double e = std::exp(-a * y);
            const double p = e * (1.0 + eps * q(y));
            const double dp = e * (-a * (1.0 + eps * q(y)) + eps * qp(y));
            return lam * p * p + dp * dp;
        };
        const double span = 60.0 / a;
        auto res = adaptive_simpson(integrand, 0.0, span, 1e-12 * std::max(1.0, a));
        total += u.coeffs[k] * u.coeffs[k] * res.value;
    }
    return total;
}

} // namespace fpme::harness
