// numerics.hpp — small shared numerical kernels: adaptive Simpson quadrature
// and Gauss–Legendre rules (nodes cached per order).

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpme {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

namespace detail {

template <typename F>
double simpson(F&& f, double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
void adaptive_simpson_rec(F&& f, double a, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth, QuadratureResult& out) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        out.value += left + right + delta / 15.0;
        out.error_estimate += std::abs(delta) / 15.0;
        if (depth <= 0 && std::abs(delta) > 15.0 * tol) out.converged = false;
        return;
    }
    adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a,b] to absolute tolerance tol.
template <typename F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48) {
    QuadratureResult out;
    if (a == b) return out;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = detail::simpson(f, a, b, fa, fm, fb);
    detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, out);
    return out;
}

struct GaussLegendreRule {
    std::vector<double> nodes;   // on (-1, 1), ascending
    std::vector<double> weights; // sum to 2
};

/// Gauss–Legendre rule of order n; results are cached (thread-safe).
inline const GaussLegendreRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int l = 2; l <= n; ++l) {
                const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    auto [pos, inserted] = cache.emplace(n, std::move(rule));
    return pos->second;
}

/// Legendre polynomial P_l(x) by the three-term recurrence.
inline double legendre_p(int l, double x) {
    if (l == 0) return 1.0;
    if (l == 1) return x;
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= l; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

} // namespace fpme
