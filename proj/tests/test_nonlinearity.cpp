#include "fpme/nonlinearity.hpp"

#include "fpme/harness.hpp"

#include <doctest.h>

#include <cmath>

using namespace fpme;

TEST_CASE("power-law values") {
    auto m2 = NonlinearitySpec::power_law(2.0);
    CHECK(m2.psi(-3.0) == doctest::Approx(-9.0).epsilon(1e-15));
    CHECK(m2.psi(2.0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(m2.psi_prime(-3.0) == doctest::Approx(6.0).epsilon(1e-15));

    auto m1 = NonlinearitySpec::power_law(1.0);
    for (double r : {-1.7, 0.0, 0.4, 3.0}) CHECK(m1.psi(r) == r);

    CHECK_THROWS_AS((void)NonlinearitySpec::power_law(0.5), std::invalid_argument);
}

TEST_CASE("psi / psi_inv / psi_prime are a consistent triple") {
    auto specs = {NonlinearitySpec::power_law(1.0), NonlinearitySpec::power_law(2.0),
                  NonlinearitySpec::power_law(3.0), NonlinearitySpec::regularized(2.0, 50.0, 4.0),
                  NonlinearitySpec::custom([](double r) { return r + 0.5 * std::atan(r); },
                                           [](double r) { return 1.0 + 0.5 / (1.0 + r * r); },
                                           6.0)};
    for (const auto& spec : specs) {
        for (double r : {-2.9, -0.7, 0.0, 0.3, 1.9}) {
            CHECK(spec.psi_inv(spec.psi(r)) == doctest::Approx(r).epsilon(1e-12));
            // slope against a centered difference
            const double h = 1e-6;
            const double fd = (spec.psi(r + h) - spec.psi(r - h)) / (2.0 * h);
            CHECK(spec.psi_prime(r) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("regularized family") {
    SUBCASE("m=1 collapses to r(1 + 1/k)") {
        auto spec = NonlinearitySpec::regularized(1.0, 10.0, 2.0);
        for (double r : {-1.5, 0.2, 1.0})
            CHECK(spec.psi(r) == doctest::Approx(r * 1.1).epsilon(1e-14));
        CHECK(spec.psi_prime(0.7) == doctest::Approx(1.1).epsilon(1e-14));
    }
    SUBCASE("m=2, k=100 value at r=1") {
        auto spec = NonlinearitySpec::regularized(2.0, 100.0, 2.0);
        CHECK(spec.psi(1.0) == doctest::Approx(std::sqrt(1.0 + 1e-4) + 0.01).epsilon(1e-12));
    }
    SUBCASE("uniform gap to Ψ shrinks monotonically in k") {
        double prev = 1e300;
        for (double k : {10.0, 100.0, 1000.0}) {
            auto spec = NonlinearitySpec::regularized(2.0, k, 1.0);
            CHECK(spec.constants().uniform_gap < prev);
            prev = spec.constants().uniform_gap;
        }
        CHECK(prev < 2e-3);
    }
    SUBCASE("section conditions hold with the stored constants") {
        auto spec = NonlinearitySpec::regularized(2.0, 25.0, 3.0);
        const auto& c = spec.constants();
        CHECK(spec.psi(0.0) == 0.0);
        CHECK(c.slope_min > 0.0);
        CHECK(c.slope_max <= 25.0 * (1.0 + 1e-12));
        // re-validate on a fresh grid
        for (int i = 0; i <= 2000; ++i) {
            const double r = -3.0 + 6.0 * i / 2000;
            const double d = spec.psi_prime(r);
            CHECK(d >= 1.0 / c.c_k * (1.0 - 1e-12));
            CHECK(d <= c.slope_max * (1.0 + 1e-12));
            CHECK(std::abs(spec.psi_inv(spec.psi(r))) <=
                  c.inv_linear_c1 * std::abs(spec.psi(r)) + c.inv_linear_c2 + 1e-12);
        }
    }
    SUBCASE("slope cap failure is reported") {
        // base slope m(A²+δ²)^{(m-1)/2} ≈ 300 exceeds k = 2
        CHECK_THROWS_AS((void)NonlinearitySpec::regularized(3.0, 2.0, 10.0),
                        std::invalid_argument);
    }
    SUBCASE("outside the working interval → domain error") {
        auto spec = NonlinearitySpec::regularized(2.0, 10.0, 1.0);
        CHECK_THROWS_AS((void)spec.psi(1.5), std::domain_error);
        CHECK_THROWS_AS((void)spec.psi_prime(-1.5), std::domain_error);
    }
}

TEST_CASE("custom nonlinearities are validated at construction") {
    SUBCASE("arctan shift passes") {
        auto spec = NonlinearitySpec::custom([](double r) { return r + 0.5 * std::atan(r); },
                                             [](double r) { return 1.0 + 0.5 / (1.0 + r * r); },
                                             5.0);
        CHECK(spec.nondegenerate());
        CHECK(spec.constants().slope_min >= 1.0);
        CHECK(spec.constants().slope_max <= 1.5);
    }
    SUBCASE("β(0) ≠ 0 fails") {
        CHECK_THROWS_AS((void)NonlinearitySpec::custom([](double r) { return r + 1.0; },
                                                       [](double) { return 1.0; }, 2.0),
                        std::invalid_argument);
    }
    SUBCASE("non-monotone β fails") {
        CHECK_THROWS_AS((void)NonlinearitySpec::custom([](double r) { return r * r * r - r; },
                                                       [](double r) { return 3 * r * r - 1.0; },
                                                       2.0),
                        std::invalid_argument);
    }
}

TEST_CASE("antiderivatives H and G") {
    auto m2 = NonlinearitySpec::power_law(2.0);
    CHECK(m2.antiderivative_H(2.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(m2.antiderivative_G(4.0) == doctest::Approx(16.0 / 3.0).epsilon(1e-14));
    CHECK(m2.antiderivative_H(0.0) == 0.0);
    CHECK(m2.antiderivative_G(0.0) == 0.0);
    CHECK(m2.antiderivative_H(-2.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));

    SUBCASE("identity H(Ψ⁻¹(u)) = uΨ⁻¹(u) − G(u)") {
        auto specs = {NonlinearitySpec::power_law(2.0),
                      NonlinearitySpec::regularized(2.0, 20.0, 3.0),
                      NonlinearitySpec::custom([](double r) { return r + 0.5 * std::atan(r); },
                                               [](double r) { return 1.0 + 0.5 / (1.0 + r * r); },
                                               6.0)};
        for (const auto& spec : specs) {
            for (double u : {-2.0, -0.4, 0.9, 2.4}) {
                const double lhs = spec.antiderivative_H(spec.psi_inv(u));
                const double rhs = u * spec.psi_inv(u) - spec.antiderivative_G(u);
                CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));
            }
        }
    }
    SUBCASE("H and G are nonnegative and H is convex") {
        harness::Rng rng(5);
        auto reg = NonlinearitySpec::regularized(2.0, 15.0, 2.0);
        for (int i = 0; i < 50; ++i) {
            const double x = 2.0 * rng.symmetric();
            const double y = 2.0 * rng.symmetric();
            CHECK(reg.antiderivative_H(x) >= 0.0);
            CHECK(reg.antiderivative_G(reg.psi(x)) >= 0.0);
            const double mid = reg.antiderivative_H(0.5 * (x + y));
            const double avg =
                0.5 * (reg.antiderivative_H(x) + reg.antiderivative_H(y));
            CHECK(mid <= avg + 1e-12);
        }
    }
    SUBCASE("|G(u)| ≤ (C₁|u| + C₂)|u| with the stored constants") {
        auto reg = NonlinearitySpec::regularized(3.0, 40.0, 2.0);
        const auto& c = reg.constants();
        harness::Rng rng(9);
        for (int i = 0; i < 50; ++i) {
            const double r = 2.0 * rng.symmetric();
            const double u = reg.psi(r);
            CHECK(std::abs(reg.antiderivative_G(u)) <=
                  (c.inv_linear_c1 * std::abs(u) + c.inv_linear_c2) * std::abs(u) + 1e-12);
        }
    }
}

TEST_CASE("truncation at height") {
    CHECK(truncate_at_height(5.0, 2.0) == 2.0);
    CHECK(truncate_at_height(-5.0, 2.0) == -2.0);
    CHECK(truncate_at_height(1.5, 2.0) == 1.5);
    CHECK_THROWS_AS((void)truncate_at_height(1.0, 0.0), std::invalid_argument);

    SUBCASE("1-Lipschitz and idempotent") {
        harness::Rng rng(3);
        for (int i = 0; i < 100; ++i) {
            const double x = 10.0 * rng.symmetric();
            const double y = 10.0 * rng.symmetric();
            const double k = 0.1 + 5.0 * rng.uniform();
            CHECK(std::abs(truncate_at_height(x, k) - truncate_at_height(y, k)) <=
                  std::abs(x - y) + 1e-15);
            CHECK(truncate_at_height(truncate_at_height(x, k), k) == truncate_at_height(x, k));
        }
    }
}

TEST_CASE("odd symmetry of the regularized family") {
    auto reg = NonlinearitySpec::regularized(2.5, 30.0, 2.0);
    for (double r : {0.1, 0.7, 1.9})
        CHECK(reg.psi(-r) == doctest::Approx(-reg.psi(r)).epsilon(1e-14));
}
