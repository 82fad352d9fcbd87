#include "fpme/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpme {

namespace {

// Extrema of r and |d r'/r| over [0,T] from the closed-form laws; a dense
// sample backs up the candidate list.
struct LawExtrema {
    double r_min, r_max, div_bound;
};

LawExtrema law_extrema(RadiusLawKind law, double r0, double a, double omega, double T, int d) {
    auto radius = [&](double t) {
        switch (law) {
            case RadiusLawKind::Constant: return r0;
            case RadiusLawKind::Linear: return r0 * (1.0 + a * t);
            default: return r0 * (1.0 + a * std::sin(omega * t));
        }
    };
    auto rate = [&](double t) {
        switch (law) {
            case RadiusLawKind::Constant: return 0.0;
            case RadiusLawKind::Linear: return r0 * a;
            default: return r0 * a * omega * std::cos(omega * t);
        }
    };

    std::vector<double> candidates = {0.0, T};
    if (law == RadiusLawKind::Sinusoidal && omega != 0.0) {
        // r extrema at cos(ωt) = 0; |div| extrema at sin(ωt) = -a.
        for (int k = 0;; ++k) {
            const double t = (0.5 * M_PI + k * M_PI) / std::abs(omega);
            if (t > T) break;
            candidates.push_back(t);
        }
        if (std::abs(a) < 1.0) {
            const double base = std::asin(-a);
            for (int k = -1;; ++k) {
                const double t1 = (base + 2.0 * M_PI * k) / omega;
                const double t2 = (M_PI - base + 2.0 * M_PI * k) / omega;
                bool any = false;
                for (double t : {t1, t2})
                    if (t >= 0.0 && t <= T) {
                        candidates.push_back(t);
                        any = true;
                    }
                if (!any && k > static_cast<int>(std::abs(omega) * T / (2.0 * M_PI)) + 2) break;
            }
        }
    }
    const int samples = 2048;
    for (int i = 0; i <= samples; ++i) candidates.push_back(T * i / samples);

    LawExtrema e{radius(0.0), radius(0.0), 0.0};
    for (double t : candidates) {
        if (t < 0.0 || t > T) continue;
        const double r = radius(t);
        e.r_min = std::min(e.r_min, r);
        e.r_max = std::max(e.r_max, r);
        if (r > 0.0) e.div_bound = std::max(e.div_bound, std::abs(d * rate(t) / r));
    }
    return e;
}

} // namespace

EvolvingGeometry::EvolvingGeometry(ManifoldFamily family, RadiusLawKind law, double r0, double a,
                                   double omega, double horizon, int mode_count)
    : family_(family), law_(law), r0_(r0), a_(a), omega_(omega), horizon_(horizon),
      mode_count_(mode_count) {
    if (!(r0 > 0.0)) throw std::invalid_argument("EvolvingGeometry: r0 must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("EvolvingGeometry: horizon must be positive");
    if (mode_count < 1) throw std::invalid_argument("EvolvingGeometry: mode_count must be >= 1");
    const auto e = law_extrema(law_, r0_, a_, omega_, horizon_, dimension());
    if (!(e.r_min > 0.0))
        throw std::invalid_argument("EvolvingGeometry: radius law is not positive on [0, T]");
    r_min_ = e.r_min;
    r_max_ = e.r_max;
    div_bound_ = e.div_bound;
}

EvolvingGeometry EvolvingGeometry::constant(ManifoldFamily family, double r0, double horizon,
                                            int mode_count) {
    return EvolvingGeometry(family, RadiusLawKind::Constant, r0, 0.0, 0.0, horizon, mode_count);
}

EvolvingGeometry EvolvingGeometry::linear(ManifoldFamily family, double r0, double a,
                                          double horizon, int mode_count) {
    return EvolvingGeometry(family, RadiusLawKind::Linear, r0, a, 0.0, horizon, mode_count);
}

EvolvingGeometry EvolvingGeometry::sinusoidal(ManifoldFamily family, double r0, double a,
                                              double omega, double horizon, int mode_count) {
    return EvolvingGeometry(family, RadiusLawKind::Sinusoidal, r0, a, omega, horizon, mode_count);
}

void EvolvingGeometry::check_time(double t) const {
    if (t < -1e-12 || t > horizon_ * (1.0 + 1e-12))
        throw std::out_of_range("EvolvingGeometry: time outside [0, T]");
}

double EvolvingGeometry::radius(double t) const {
    check_time(t);
    switch (law_) {
        case RadiusLawKind::Constant: return r0_;
        case RadiusLawKind::Linear: return r0_ * (1.0 + a_ * t);
        default: return r0_ * (1.0 + a_ * std::sin(omega_ * t));
    }
}

double EvolvingGeometry::radius_rate(double t) const {
    check_time(t);
    switch (law_) {
        case RadiusLawKind::Constant: return 0.0;
        case RadiusLawKind::Linear: return r0_ * a_;
        default: return r0_ * a_ * omega_ * std::cos(omega_ * t);
    }
}

ManifoldSnapshot EvolvingGeometry::snapshot_at(double t) const {
    return ManifoldSnapshot(family_, radius(t), mode_count_);
}

double EvolvingGeometry::div_w(double t) const {
    return dimension() * radius_rate(t) / radius(t);
}

double EvolvingGeometry::jacobian(double t) const {
    return std::pow(radius(t) / r0_, dimension());
}

double EvolvingGeometry::eigenvalue_floor() const {
    const double cd = family_ == ManifoldFamily::Circle ? 1.0 : 2.0;
    return cd / (r_max_ * r_max_);
}

TimeNode time_node(const EvolvingGeometry& geo, double t) { return {t, geo.snapshot_at(t)}; }

namespace {

void check_field_on(const ManifoldSnapshot& expected, const SpectralField& field,
                    const char* what) {
    if (!field.snapshot.same_as(expected))
        throw std::invalid_argument(std::string(what) + ": field snapshot does not match manifold");
}

} // namespace

SpectralField pushforward(const EvolvingGeometry& geo, double t, const SpectralField& on_gamma0) {
    check_field_on(geo.snapshot_at(0.0), on_gamma0, "pushforward");
    const double scale = std::pow(geo.radius(t) / geo.r0(), 0.5 * geo.dimension());
    SpectralField out(geo.snapshot_at(t), on_gamma0.coeffs);
    for (double& c : out.coeffs) c *= scale;
    return out;
}

SpectralField pullback(const EvolvingGeometry& geo, double t, const SpectralField& on_gamma_t) {
    check_field_on(geo.snapshot_at(t), on_gamma_t, "pullback");
    const double scale = std::pow(geo.r0() / geo.radius(t), 0.5 * geo.dimension());
    SpectralField out(geo.snapshot_at(0.0), on_gamma_t.coeffs);
    for (double& c : out.coeffs) c *= scale;
    return out;
}

double transport_residual(const EvolvingGeometry& geo, const std::vector<double>& times,
                          const std::vector<SpectralField>& fields,
                          const std::function<double(double)>& f,
                          const std::function<double(double)>& F) {
    if (times.size() != fields.size())
        throw std::invalid_argument("transport_residual: times/fields size mismatch");
    if (times.size() < 2)
        throw std::invalid_argument("transport_residual: need at least 2 trajectory nodes");

    const int grid = 4 * geo.snapshot_at(0.0).coeff_count() + 2;
    double lhs = 0.0;      // ∫ ⟨u̇, f(u)⟩ dt  (midpoint in time)
    double rhs_div = 0.0;  // ∫ ∫ F(u) ∇_Γ·w dt
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
        const double dt = times[j + 1] - times[j];
        if (!(dt > 0.0))
            throw std::invalid_argument("transport_residual: times must be strictly increasing");
        const double tm = 0.5 * (times[j] + times[j + 1]);
        const auto a0 = pullback(geo, times[j], fields[j]).coeffs;
        const auto a1 = pullback(geo, times[j + 1], fields[j + 1]).coeffs;
        std::vector<double> da(a0.size()), am(a0.size());
        for (std::size_t k = 0; k < a0.size(); ++k) {
            da[k] = (a1[k] - a0[k]) / dt;
            am[k] = 0.5 * (a0[k] + a1[k]);
        }
        const auto snap0 = geo.snapshot_at(0.0);
        const SpectralField udot = pushforward(geo, tm, SpectralField(snap0, da));
        const SpectralField um = pushforward(geo, tm, SpectralField(snap0, am));
        const auto snap = geo.snapshot_at(tm);
        const auto gu = synthesize(um, grid);
        const auto gd = synthesize(udot, grid);
        const auto w = grid_weights(snap, grid);
        double pair = 0.0, intF = 0.0;
        for (int i = 0; i < grid; ++i) {
            pair += w[i] * gd.values[i] * f(gu.values[i]);
            intF += w[i] * F(gu.values[i]);
        }
        lhs += dt * pair;
        rhs_div += dt * intF * geo.div_w(tm);
    }

    auto int_F_at = [&](std::size_t idx) {
        const auto snap = fields[idx].snapshot;
        const auto g = synthesize(fields[idx], grid);
        const auto w = grid_weights(snap, grid);
        double acc = 0.0;
        for (int i = 0; i < grid; ++i) acc += w[i] * F(g.values[i]);
        return acc;
    };
    const double rhs = int_F_at(times.size() - 1) - int_F_at(0) - rhs_div;
    return lhs - rhs;
}

} // namespace fpme
