#include "fpme/nonlinearity.hpp"

#include "fpme/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fpme {

namespace {

constexpr int kValidationGrid = 10000;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

// Safeguarded Newton for g(x) = target with g strictly increasing.
double invert_monotone(const std::function<double(double)>& g,
                       const std::function<double(double)>& gp, double target, double lo,
                       double hi) {
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double v = g(x) - target;
        if (v > 0.0)
            hi = x;
        else
            lo = x;
        const double d = gp(x);
        double step = d > 0.0 ? v / d : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-15 * std::max(1.0, std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

} // namespace

double truncate_at_height(double r, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("truncate_at_height: k must be positive");
    return std::clamp(r, -k, k);
}

NonlinearitySpec NonlinearitySpec::power_law(double m) {
    if (!(m >= 1.0)) fail("power_law: exponent m must be >= 1");
    NonlinearitySpec spec;
    spec.kind_ = NonlinearityKind::PowerLaw;
    spec.m_ = m;
    std::ostringstream n;
    n << "power_law(m=" << m << ")";
    spec.name_ = n.str();
    return spec;
}

NonlinearitySpec NonlinearitySpec::regularized(double m, double k, double A) {
    if (!(m >= 1.0)) fail("regularized: exponent m must be >= 1");
    if (!(k >= 1.0)) fail("regularized: index k must be >= 1");
    if (!(A > 0.0)) fail("regularized: working interval must be positive");
    NonlinearitySpec spec;
    spec.kind_ = NonlinearityKind::Regularized;
    spec.m_ = m;
    spec.k_ = k;
    spec.delta_ = 1.0 / k;
    spec.lin_coeff_ = 1.0 / k;
    spec.interval_ = A;

    // Shrink the linear coefficient if the slope cap Ψ_k' ≤ k would fail.
    auto base_slope = [&](double r) {
        const double s2 = r * r + spec.delta_ * spec.delta_;
        return std::pow(s2, 0.5 * (m - 1.0)) + (m - 1.0) * r * r * std::pow(s2, 0.5 * (m - 3.0));
    };
    const double base_max = base_slope(A); // increasing in |r|
    if (base_max > k) {
        std::ostringstream msg;
        msg << "regularized: slope condition psi_k' <= k unsatisfiable on [-A, A]: base slope "
            << base_max << " > k = " << k;
        fail(msg.str());
    }
    spec.lin_coeff_ = std::min(spec.lin_coeff_, k - base_max);
    std::ostringstream n;
    n << "regularized(m=" << m << ",k=" << k << ")";
    spec.name_ = n.str();
    spec.validate_on_grid();
    return spec;
}

NonlinearitySpec NonlinearitySpec::custom(std::function<double(double)> beta,
                                          std::function<double(double)> beta_prime, double A,
                                          std::function<double(double)> beta_inverse,
                                          std::string name) {
    if (!(A > 0.0)) fail("custom: working interval must be positive");
    if (!beta || !beta_prime) fail("custom: beta and beta_prime are required");
    NonlinearitySpec spec;
    spec.kind_ = NonlinearityKind::Custom;
    spec.interval_ = A;
    spec.beta_ = std::move(beta);
    spec.beta_prime_ = std::move(beta_prime);
    spec.name_ = std::move(name);
    if (beta_inverse) {
        spec.beta_inv_ = std::move(beta_inverse);
    } else {
        auto b = spec.beta_;
        auto bp = spec.beta_prime_;
        const double lo = -A, hi = A;
        spec.beta_inv_ = [b, bp, lo, hi](double v) {
            return invert_monotone(b, bp, v, lo - 1.0, hi + 1.0);
        };
    }
    spec.validate_on_grid();
    return spec;
}

void NonlinearitySpec::check_domain(double r) const {
    if (kind_ == NonlinearityKind::PowerLaw) return;
    if (std::abs(r) > interval_ * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << name_ << ": argument " << r << " outside working interval [-" << interval_ << ", "
            << interval_ << "]";
        throw std::domain_error(msg.str());
    }
}

double NonlinearitySpec::base_psi(double r) const {
    switch (kind_) {
        case NonlinearityKind::PowerLaw:
            return std::pow(std::abs(r), m_ - 1.0) * r;
        case NonlinearityKind::Regularized:
            return std::pow(r * r + delta_ * delta_, 0.5 * (m_ - 1.0)) * r + lin_coeff_ * r;
        default:
            return beta_(r);
    }
}

double NonlinearitySpec::base_psi_prime(double r) const {
    switch (kind_) {
        case NonlinearityKind::PowerLaw:
            return m_ * std::pow(std::abs(r), m_ - 1.0);
        case NonlinearityKind::Regularized: {
            const double s2 = r * r + delta_ * delta_;
            return std::pow(s2, 0.5 * (m_ - 1.0)) +
                   (m_ - 1.0) * r * r * std::pow(s2, 0.5 * (m_ - 3.0)) + lin_coeff_;
        }
        default:
            return beta_prime_(r);
    }
}

double NonlinearitySpec::psi(double r) const {
    check_domain(r);
    return base_psi(r);
}

double NonlinearitySpec::psi_prime(double r) const {
    check_domain(r);
    return base_psi_prime(r);
}

double NonlinearitySpec::psi_inv(double r) const {
    switch (kind_) {
        case NonlinearityKind::PowerLaw:
            if (r == 0.0) return 0.0;
            return std::pow(std::abs(r), 1.0 / m_ - 1.0) * r;
        case NonlinearityKind::Regularized: {
            // Newton on the strictly increasing Ψ_k; image of [-A, A] covers r.
            const double lim = interval_ * (1.0 + 1e-9);
            if (std::abs(r) > base_psi(lim))
                throw std::domain_error(name_ + ": psi_inv argument outside image of [-A, A]");
            auto g = [this](double x) { return base_psi(x); };
            auto gp = [this](double x) { return base_psi_prime(x); };
            return invert_monotone(g, gp, r, -lim, lim);
        }
        default:
            return beta_inv_(r);
    }
}

double NonlinearitySpec::antiderivative_H(double r) const {
    check_domain(r);
    if (kind_ == NonlinearityKind::PowerLaw)
        return std::pow(std::abs(r), m_ + 1.0) / (m_ + 1.0);
    auto q = adaptive_simpson([this](double s) { return base_psi(s); }, 0.0, r, 1e-10);
    return q.value;
}

double NonlinearitySpec::antiderivative_G(double r) const {
    if (kind_ == NonlinearityKind::PowerLaw)
        return m_ / (m_ + 1.0) * std::pow(std::abs(r), (m_ + 1.0) / m_);
    auto q = adaptive_simpson([this](double s) { return psi_inv(s); }, 0.0, r, 1e-10);
    return q.value;
}

void NonlinearitySpec::validate_on_grid() {
    const double A = interval_;
    ValidatedConstants c;
    c.slope_min = std::numeric_limits<double>::infinity();
    double inv_c1 = 0.0;
    double inv_dd = 0.0;
    double gap = 0.0;

    if (std::abs(base_psi(0.0)) > 1e-14) fail(name_ + ": psi(0) = 0 violated");

    double prev_val = base_psi(-A);
    for (int i = 0; i <= kValidationGrid; ++i) {
        const double r = -A + 2.0 * A * i / kValidationGrid;
        const double v = base_psi(r);
        const double d = base_psi_prime(r);
        if (i > 0 && !(v > prev_val)) fail(name_ + ": psi not strictly increasing on [-A, A]");
        if (i > 0) prev_val = v;
        if (!(d > 0.0)) fail(name_ + ": psi' must be strictly positive on [-A, A]");
        c.slope_min = std::min(c.slope_min, d);
        c.slope_max = std::max(c.slope_max, d);
        // (Ψ⁻¹)'(v) = 1/Ψ'(r), (Ψ⁻¹)''(v) = -Ψ''(r)/Ψ'(r)³ via centered differences.
        if (i > 0 && i < kValidationGrid) {
            const double h = 2.0 * A / kValidationGrid;
            const double ddd = (base_psi_prime(r + h) - base_psi_prime(r - h)) / (2.0 * h);
            inv_dd = std::max(inv_dd, std::abs(ddd) / (d * d * d));
        }
        if (std::abs(v) > 1e-14) inv_c1 = std::max(inv_c1, std::abs(r) / std::abs(v));
        if (kind_ == NonlinearityKind::Regularized) {
            const double target = std::pow(std::abs(r), m_ - 1.0) * r;
            gap = std::max(gap, std::abs(v - target));
        }
    }
    if (kind_ == NonlinearityKind::Regularized && c.slope_max > k_ * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << name_ << ": slope cap psi' <= k violated (" << c.slope_max << " > " << k_ << ")";
        fail(msg.str());
    }
    c.c_k = 1.0 / c.slope_min;
    c.inv_linear_c1 = inv_c1;
    c.inv_linear_c2 = 0.0;
    c.inv_second_bound = inv_dd;
    c.uniform_gap = gap;

    // Round-trip consistency of the inverse.
    for (double r : {-0.83 * A, -0.21 * A, 0.0, 0.4 * A, 0.97 * A}) {
        const double rt = psi_inv(base_psi(r));
        if (std::abs(rt - r) > 1e-10 * std::max(1.0, std::abs(r)))
            fail(name_ + ": psi_inv(psi(r)) != r on the working interval");
    }
    constants_ = c;
}

} // namespace fpme
