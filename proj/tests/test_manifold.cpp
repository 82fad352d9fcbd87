#include "fpme/manifold.hpp"

#include "fpme/harness.hpp"
#include "fpme/nonlinearity.hpp"
#include "fpme/numerics.hpp"

#include <doctest.h>

#include <cmath>

using namespace fpme;

namespace {

SpectralField unit_mode(const ManifoldSnapshot& s, int mode, double value = 1.0) {
    SpectralField f = SpectralField::zero(s);
    f.coeffs[mode] = value;
    return f;
}

// Quadrature oracle: coefficient (g, φ_k) on a dense grid.
double coeff_by_quadrature(const ManifoldSnapshot& s, const std::function<double(double)>& g,
                           int mode, int n = 4096) {
    const auto pts = grid_points(s, n);
    const auto w = grid_weights(s, n);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += w[j] * g(pts[j]) * basis_value(s, mode, pts[j]);
    return acc;
}

} // namespace

TEST_CASE("eigenvalues of the analytic catalog") {
    ManifoldSnapshot c1(ManifoldFamily::Circle, 1.0, 8);
    CHECK(c1.eigenvalue(0) == 0.0);
    CHECK(c1.eigenvalue(1) == doctest::Approx(1.0).epsilon(1e-15)); // cos θ
    CHECK(c1.eigenvalue(2) == doctest::Approx(1.0).epsilon(1e-15)); // sin θ

    ManifoldSnapshot c2(ManifoldFamily::Circle, 2.0, 8);
    CHECK(c2.eigenvalue(5) == doctest::Approx(2.25).epsilon(1e-15)); // freq 3: (3/2)²

    ManifoldSnapshot s1(ManifoldFamily::SphereZonal, 1.0, 8);
    CHECK(s1.eigenvalue(2) == doctest::Approx(6.0).epsilon(1e-14));

    // Eigenvalues nondecreasing in the coefficient index.
    for (int k = 1; k < c1.coeff_count(); ++k) CHECK(c1.eigenvalue(k) >= c1.eigenvalue(k - 1));
    for (int k = 1; k < s1.coeff_count(); ++k) CHECK(s1.eigenvalue(k) >= s1.eigenvalue(k - 1));

    CHECK_THROWS_AS((void)c1.eigenvalue(17), std::out_of_range);
    CHECK_THROWS_AS((void)c1.eigenvalue(-1), std::out_of_range);
}

TEST_CASE("sphere eigenvalue against the Legendre ODE residual") {
    // Brute-force oracle: the zonal Laplacian (1/sinϑ) d/dϑ(sinϑ dP_l/dϑ)
    // should equal -l(l+1) P_l; evaluate with centered differences in ϑ.
    const int l = 2;
    auto P = [&](double theta) { return legendre_p(l, std::cos(theta)); };
    const double h = 1e-5;
    for (double theta : {0.7, 1.2, 2.1}) {
        auto flux = [&](double th) { return std::sin(th) * (P(th + h) - P(th - h)) / (2.0 * h); };
        const double lap = (flux(theta + h) - flux(theta - h)) / (2.0 * h) / std::sin(theta);
        CHECK(lap == doctest::Approx(-6.0 * P(theta)).epsilon(1e-5));
    }
    CHECK(ManifoldSnapshot(ManifoldFamily::SphereZonal, 1.0, 4).eigenvalue(2) == 6.0);
}

TEST_CASE("constructor invariants") {
    CHECK_THROWS_AS(ManifoldSnapshot(ManifoldFamily::Circle, -1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(ManifoldSnapshot(ManifoldFamily::Circle, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(SpectralField(ManifoldSnapshot(ManifoldFamily::Circle, 1.0, 4),
                                  std::vector<double>(3, 0.0)),
                    std::invalid_argument);
    // Constant eigenfunction value |M|^{-1/2}.
    ManifoldSnapshot c(ManifoldFamily::Circle, 2.0, 4);
    CHECK(basis_value(c, 0, 0.3) == doctest::Approx(1.0 / std::sqrt(c.measure())).epsilon(1e-15));
    ManifoldSnapshot s(ManifoldFamily::SphereZonal, 1.5, 4);
    CHECK(basis_value(s, 0, 0.2) == doctest::Approx(1.0 / std::sqrt(s.measure())).epsilon(1e-15));
}

TEST_CASE("analyze/synthesize round trips") {
    ManifoldSnapshot c(ManifoldFamily::Circle, 1.0, 8);
    SUBCASE("single basis mode is exact") {
        const auto f = unit_mode(c, 3);
        const auto back = analyze(synthesize(f, 40));
        for (int k = 0; k < c.coeff_count(); ++k)
            CHECK(back.coeffs[k] == doctest::Approx(f.coeffs[k]).epsilon(1e-12));
    }
    SUBCASE("random band-limited field, N=32") {
        ManifoldSnapshot big(ManifoldFamily::Circle, 1.0, 32);
        harness::FieldGenSpec gen;
        gen.active_modes = 32;
        gen.decay = 0.9;
        const auto f = harness::random_field(big, 99, gen);
        const auto back = analyze(synthesize(f, 2 * big.coeff_count() + 2));
        double worst = 0.0;
        for (std::size_t k = 0; k < f.coeffs.size(); ++k)
            worst = std::max(worst, std::abs(back.coeffs[k] - f.coeffs[k]));
        CHECK(worst < 1e-12);
    }
    SUBCASE("constant c has mode-0 coefficient c·sqrt(2π)") {
        GridField g{c, std::vector<double>(64, 3.25)};
        const auto f = analyze(g);
        CHECK(f.coeffs[0] == doctest::Approx(3.25 * std::sqrt(2.0 * M_PI)).epsilon(1e-14));
        for (int k = 1; k < c.coeff_count(); ++k) CHECK(std::abs(f.coeffs[k]) < 1e-13);
    }
    SUBCASE("grid too small throws") {
        CHECK_THROWS_AS((void)synthesize(unit_mode(c, 1), 8), std::invalid_argument);
        CHECK_THROWS_AS((void)analyze(GridField{c, std::vector<double>(8, 0.0)}),
                        std::invalid_argument);
    }
    SUBCASE("sphere round trip") {
        ManifoldSnapshot s(ManifoldFamily::SphereZonal, 2.0, 12);
        harness::FieldGenSpec gen;
        gen.active_modes = 12;
        gen.decay = 0.9;
        const auto f = harness::random_field(s, 7, gen);
        const auto back = analyze(synthesize(f, 40));
        for (std::size_t k = 0; k < f.coeffs.size(); ++k)
            CHECK(back.coeffs[k] == doctest::Approx(f.coeffs[k]).epsilon(1e-12));
    }
}

TEST_CASE("integrate and mean") {
    ManifoldSnapshot c(ManifoldFamily::Circle, 1.0, 4);
    SpectralField constant = SpectralField::zero(c);
    constant.coeffs[0] = 2.0 * std::sqrt(c.measure()); // physical value 2
    CHECK(integrate(constant) == doctest::Approx(2.0 * 2.0 * M_PI).epsilon(1e-15));
    CHECK(mean(constant) == doctest::Approx(2.0).epsilon(1e-15));

    auto zero_mean = unit_mode(c, 1, 0.7);
    CHECK(integrate(zero_mean) == 0.0);

    SpectralField f = SpectralField::zero(c);
    f.coeffs[0] = std::sqrt(2.0 * M_PI);
    CHECK(mean(f) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("H(M) norms") {
    ManifoldSnapshot c(ManifoldFamily::Circle, 1.0, 4);
    const auto phi1 = unit_mode(c, 1);
    CHECK(hm_seminorm(phi1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(hm_norm(phi1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    SpectralField constant = SpectralField::zero(c);
    constant.coeffs[0] = 5.0;
    CHECK(hm_seminorm(constant) == 0.0);

    // Coefficients on modes with λ = 1 and λ = 4: seminorm² = √1 + √4 = 3.
    SpectralField two = SpectralField::zero(c);
    two.coeffs[1] = 1.0; // cos θ, λ = 1
    two.coeffs[3] = 1.0; // cos 2θ, λ = 4
    CHECK(hm_seminorm(two) * hm_seminorm(two) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("closed-form H^{1/2} norm and K-functional") {
    ManifoldSnapshot c(ManifoldFamily::Circle, 1.0, 4);
    SpectralField mean_only = SpectralField::zero(c);
    mean_only.coeffs[0] = 1.4;
    CHECK(h12_norm_closed(mean_only) ==
          doctest::Approx(std::sqrt(0.5 * M_PI) * 1.4).epsilon(1e-15));

    const auto phi1 = unit_mode(c, 1);
    CHECK(h12_norm_closed(phi1) ==
          doctest::Approx(std::sqrt(0.5 * M_PI * std::sqrt(2.0))).epsilon(1e-12));
    CHECK(h12_norm_closed(SpectralField::zero(c)) == 0.0);

    SUBCASE("K(t) limits") {
        harness::FieldGenSpec gen;
        gen.active_modes = 4;
        const auto u = harness::random_field(c, 5, gen);
        const double l2 = l2_norm(u);
        CHECK(k_functional(u, 1e8) == doctest::Approx(l2).epsilon(1e-10));
        double h1sq = 0.0;
        for (int k = 0; k < c.coeff_count(); ++k)
            h1sq += (1.0 + c.eigenvalue(k)) * u.coeffs[k] * u.coeffs[k];
        const double t = 1e-8;
        CHECK(k_functional(u, t) / t == doctest::Approx(std::sqrt(h1sq)).epsilon(1e-8));
    }
    SUBCASE("single mode λ=1, t=1: K² = 2/3") {
        const auto u = unit_mode(c, 1);
        const double K = k_functional(u, 1.0);
        CHECK(K * K == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS((void)k_functional(phi1, 0.0), std::invalid_argument);
}

TEST_CASE("K-method quadrature agrees with the closed form") {
    ManifoldSnapshot c(ManifoldFamily::Circle, 1.0, 16);
    CHECK(h12_norm_quadrature(SpectralField::zero(c)) == 0.0);

    SpectralField mean_only = SpectralField::zero(c);
    mean_only.coeffs[0] = 0.8;
    CHECK(h12_norm_quadrature(mean_only) ==
          doctest::Approx(std::sqrt(0.5 * M_PI) * 0.8).epsilon(1e-6));

    for (std::uint64_t seed : {1, 2, 3}) {
        harness::FieldGenSpec gen;
        gen.active_modes = 16;
        gen.decay = 0.8;
        gen.offset = 0.4;
        const auto u = harness::random_field(c, seed, gen);
        const double closed = h12_norm_closed(u);
        CHECK(std::abs(h12_norm_quadrature(u) - closed) <= 1e-6 * closed);
    }
}

TEST_CASE("Parseval identity for band-limited fields") {
    ManifoldSnapshot c(ManifoldFamily::Circle, 1.3, 24);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        harness::FieldGenSpec gen;
        gen.active_modes = 24;
        gen.decay = 0.85;
        gen.offset = 0.3;
        const auto u = harness::random_field(c, seed, gen);
        double sumsq = 0.0;
        for (double v : u.coeffs) sumsq += v * v;
        const int grid = 4 * c.coeff_count();
        const auto g = synthesize(u, grid);
        const auto w = grid_weights(c, grid);
        double quad = 0.0;
        for (int j = 0; j < grid; ++j) quad += w[j] * g.values[j] * g.values[j];
        CHECK(std::abs(quad - sumsq) <= 1e-10 * sumsq);
    }
}

TEST_CASE("pointwise_apply") {
    ManifoldSnapshot c(ManifoldFamily::Circle, 1.0, 8);
    harness::FieldGenSpec gen;
    gen.active_modes = 8;
    gen.decay = 0.7;
    gen.offset = 0.6;
    const auto u = harness::random_field(c, 42, gen);

    SUBCASE("identity map leaves the field unchanged") {
        const auto v = pointwise_apply([](double x) { return x; }, u);
        for (std::size_t k = 0; k < u.coeffs.size(); ++k)
            CHECK(v.coeffs[k] == doctest::Approx(u.coeffs[k]).epsilon(1e-12));
    }
    SUBCASE("square of φ_1 against the quadrature oracle") {
        const auto phi1 = unit_mode(c, 1);
        const auto sq = pointwise_apply([](double x) { return x * x; }, phi1, 2.0);
        for (int k = 0; k < c.coeff_count(); ++k) {
            const double oracle = coeff_by_quadrature(
                c, [&](double th) { return std::pow(basis_value(c, 1, th), 2); }, k);
            CHECK(sq.coeffs[k] == doctest::Approx(oracle).epsilon(1e-10));
        }
        // Known values: φ_1² = (1 + cos 2θ)/(2π).
        CHECK(sq.coeffs[0] == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
        CHECK(sq.coeffs[3] == doctest::Approx(1.0 / (2.0 * std::sqrt(M_PI))).epsilon(1e-12));
    }
    SUBCASE("power-law Ψ with m=1 is the identity") {
        NonlinearitySpec psi = NonlinearitySpec::power_law(1.0);
        const auto v = pointwise_apply([&](double x) { return psi.psi(x); }, u, 1.0);
        for (std::size_t k = 0; k < u.coeffs.size(); ++k)
            CHECK(v.coeffs[k] == doctest::Approx(u.coeffs[k]).epsilon(1e-12));
    }
    SUBCASE("odd maps preserve odd (sine-only) fields") {
        SpectralField odd = SpectralField::zero(c);
        odd.coeffs[2] = 0.8;  // sin θ
        odd.coeffs[6] = -0.3; // sin 3θ
        const auto v =
            pointwise_apply([](double x) { return x * x * x + std::sin(x); }, odd, 3.0);
        CHECK(std::abs(v.coeffs[0]) < 1e-13);
        for (int q = 1; q <= c.mode_count; ++q) CHECK(std::abs(v.coeffs[2 * q - 1]) < 1e-13);
    }
    SUBCASE("non-finite values are rejected") {
        CHECK_THROWS_AS((void)pointwise_apply([](double x) { return std::log(x - 10.0); }, u),
                        std::domain_error);
    }
}

TEST_CASE("positive part integral") {
    ManifoldSnapshot c(ManifoldFamily::Circle, 1.0, 4);
    SpectralField minus = SpectralField::zero(c);
    minus.coeffs[0] = -1.0 * std::sqrt(c.measure());
    CHECK(positive_part_integral(minus) == 0.0);

    SpectralField plus = SpectralField::zero(c);
    plus.coeffs[0] = std::sqrt(c.measure());
    CHECK(positive_part_integral(plus) == doctest::Approx(2.0 * M_PI).epsilon(1e-12));

    SpectralField sine = SpectralField::zero(c);
    sine.coeffs[2] = std::sqrt(M_PI); // sin θ
    CHECK(positive_part_integral(sine) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    const auto& rule = gauss_legendre(6);
    double acc = 0.0; // ∫_{-1}^{1} x^10 dx = 2/11
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * std::pow(rule.nodes[i], 10);
    CHECK(acc == doctest::Approx(2.0 / 11.0).epsilon(1e-14));
}
