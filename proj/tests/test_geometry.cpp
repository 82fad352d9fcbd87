#include "fpme/geometry.hpp"

#include "fpme/harness.hpp"
#include "fpme/numerics.hpp"
#include "fpme/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace fpme;

TEST_CASE("snapshot_at for the three radius laws") {
    auto constant = EvolvingGeometry::constant(ManifoldFamily::Circle, 1.0, 2.0, 4);
    CHECK(constant.snapshot_at(0.7).radius == doctest::Approx(1.0).epsilon(1e-15));

    auto linear = EvolvingGeometry::linear(ManifoldFamily::Circle, 1.0, 0.5, 2.0, 4);
    CHECK(linear.snapshot_at(1.0).radius == doctest::Approx(1.5).epsilon(1e-15));

    auto sinus = EvolvingGeometry::sinusoidal(ManifoldFamily::Circle, 1.0, 0.1, 2.0 * M_PI, 1.0, 4);
    CHECK(sinus.snapshot_at(0.25).radius == doctest::Approx(1.1).epsilon(1e-14));

    CHECK_THROWS_AS((void)linear.snapshot_at(3.0), std::out_of_range);
    CHECK_THROWS_AS((void)linear.snapshot_at(-0.5), std::out_of_range);
}

TEST_CASE("radius law must stay positive on the horizon") {
    CHECK_THROWS_AS(EvolvingGeometry::linear(ManifoldFamily::Circle, 1.0, -0.6, 2.0, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        EvolvingGeometry::sinusoidal(ManifoldFamily::Circle, 1.0, -1.2, 2.0 * M_PI, 2.0, 4),
        std::invalid_argument);
    CHECK_NOTHROW(EvolvingGeometry::linear(ManifoldFamily::Circle, 1.0, -0.4, 2.0, 4));
}

TEST_CASE("velocity divergence and flow Jacobian") {
    auto constant = EvolvingGeometry::constant(ManifoldFamily::SphereZonal, 2.0, 1.0, 4);
    CHECK(constant.div_w(0.4) == 0.0);
    CHECK(constant.jacobian(0.4) == 1.0);

    auto circle = EvolvingGeometry::linear(ManifoldFamily::Circle, 1.0, 1.0, 1.0, 4);
    CHECK(circle.div_w(0.0) == doctest::Approx(1.0).epsilon(1e-15));

    auto sphere = EvolvingGeometry::linear(ManifoldFamily::SphereZonal, 1.0, 1.0, 1.0, 4);
    CHECK(sphere.div_w(0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sphere.jacobian(1.0) == doctest::Approx(4.0).epsilon(1e-14));

    CHECK(circle.jacobian(0.0) == 1.0);
}

TEST_CASE("surface area evolves by the integral of the divergence") {
    // d/dt |Γ(t)| = ∫ ∇_Γ·w  ⇒  |Γ(T)| - |Γ(0)| = ∫_0^T div_w(t)·|Γ(t)| dt.
    auto check_law = [](const EvolvingGeometry& geo) {
        const double T = geo.horizon();
        auto area = [&](double t) { return geo.snapshot_at(t).measure(); };
        const auto integral =
            adaptive_simpson([&](double t) { return geo.div_w(t) * area(t); }, 0.0, T, 1e-12);
        const double lhs = area(T) - area(0.0);
        CHECK(std::abs(integral.value - lhs) <= 1e-8 * std::max(1.0, std::abs(lhs)));
    };
    check_law(EvolvingGeometry::constant(ManifoldFamily::Circle, 1.2, 1.0, 2));
    check_law(EvolvingGeometry::linear(ManifoldFamily::Circle, 1.0, 0.5, 1.0, 2));
    check_law(EvolvingGeometry::linear(ManifoldFamily::SphereZonal, 1.0, 0.3, 1.0, 2));
    check_law(EvolvingGeometry::sinusoidal(ManifoldFamily::Circle, 1.0, 0.2, 3.0, 1.5, 2));
}

TEST_CASE("eigenvalue floor matches the closed-form extrema") {
    auto growing = EvolvingGeometry::linear(ManifoldFamily::Circle, 1.0, 0.5, 1.0, 4);
    CHECK(growing.eigenvalue_floor() == doctest::Approx(1.0 / (1.5 * 1.5)).epsilon(1e-12));

    auto sphere = EvolvingGeometry::sinusoidal(ManifoldFamily::SphereZonal, 1.0, 0.25, 5.0, 2.0, 4);
    // max radius 1.25 reached inside [0, 2]; λ_1 = 2/r².
    CHECK(sphere.eigenvalue_floor() == doctest::Approx(2.0 / (1.25 * 1.25)).epsilon(1e-10));

    // min_t λ_1(t) sampled directly agrees with the floor (grid resolution).
    double sampled = 1e300;
    for (int i = 0; i <= 1000; ++i)
        sampled = std::min(sampled, sphere.snapshot_at(2.0 * i / 1000).lambda1());
    CHECK(sphere.eigenvalue_floor() == doctest::Approx(sampled).epsilon(1e-4));
}

TEST_CASE("divergence bound is attained") {
    auto geo = EvolvingGeometry::sinusoidal(ManifoldFamily::Circle, 1.0, 0.3, 4.0, 2.0, 4);
    double sampled = 0.0;
    for (int i = 0; i <= 20000; ++i)
        sampled = std::max(sampled, std::abs(geo.div_w(2.0 * i / 20000)));
    CHECK(geo.div_w_bound() >= sampled * (1.0 - 1e-12));
    CHECK(geo.div_w_bound() <= sampled * (1.0 + 1e-6));
}

TEST_CASE("pushforward and pullback") {
    auto geo = EvolvingGeometry::linear(ManifoldFamily::Circle, 1.0, 1.0, 3.0, 6);
    const auto snap0 = geo.snapshot_at(0.0);

    SUBCASE("t = 0 is the identity") {
        harness::FieldGenSpec gen;
        gen.active_modes = 6;
        const auto u = harness::random_field(snap0, 3, gen);
        const auto v = pushforward(geo, 0.0, u);
        for (std::size_t k = 0; k < u.coeffs.size(); ++k)
            CHECK(v.coeffs[k] == doctest::Approx(u.coeffs[k]).epsilon(1e-15));
    }
    SUBCASE("constants stay constants; mode-0 coefficient scales by sqrt 2 at radius 2") {
        SpectralField c = SpectralField::zero(snap0);
        c.coeffs[0] = 3.0 * std::sqrt(snap0.measure()); // physical constant 3
        const auto v = pushforward(geo, 1.0, c);        // radius doubles
        CHECK(v.coeffs[0] == doctest::Approx(c.coeffs[0] * std::sqrt(2.0)).epsilon(1e-14));
        CHECK(mean(v) == doctest::Approx(3.0).epsilon(1e-14));
    }
    SUBCASE("pullback inverts pushforward to 1e-14") {
        harness::FieldGenSpec gen;
        gen.active_modes = 6;
        gen.offset = 0.5;
        const auto u = harness::random_field(snap0, 17, gen);
        const auto back = pullback(geo, 2.0, pushforward(geo, 2.0, u));
        for (std::size_t k = 0; k < u.coeffs.size(); ++k)
            CHECK(std::abs(back.coeffs[k] - u.coeffs[k]) < 1e-14);
    }
    SUBCASE("snapshot mismatch is rejected") {
        const auto wrong = SpectralField::zero(geo.snapshot_at(1.0));
        CHECK_THROWS_AS((void)pushforward(geo, 1.0, wrong), std::invalid_argument);
        CHECK_THROWS_AS((void)pullback(geo, 1.0, SpectralField::zero(snap0)),
                        std::invalid_argument);
    }
}

TEST_CASE("transport identity residual") {
    SUBCASE("constant-in-time solution on a static surface") {
        auto geo = EvolvingGeometry::constant(ManifoldFamily::Circle, 1.0, 1.0, 6);
        harness::FieldGenSpec gen;
        gen.active_modes = 6;
        gen.offset = 0.7;
        const auto u = harness::random_field(geo.snapshot_at(0.0), 4, gen);
        std::vector<double> times;
        std::vector<SpectralField> fields;
        for (int j = 0; j <= 10; ++j) {
            times.push_back(0.1 * j);
            fields.push_back(u);
        }
        const double res = transport_residual(
            geo, times, fields, [](double r) { return r * r; },
            [](double r) { return r * r * r / 3.0; });
        CHECK(std::abs(res) < 1e-12);
    }

    SUBCASE("fewer than two nodes is an error") {
        auto geo = EvolvingGeometry::constant(ManifoldFamily::Circle, 1.0, 1.0, 4);
        std::vector<double> times = {0.0};
        std::vector<SpectralField> fields = {SpectralField::zero(geo.snapshot_at(0.0))};
        CHECK_THROWS_AS((void)transport_residual(
                            geo, times, fields, [](double) { return 1.0; },
                            [](double r) { return r; }),
                        std::invalid_argument);
    }

    SUBCASE("m=1 heat flow: residual is O(dt) and halves under refinement") {
        auto residual_at = [](double dt) {
            auto geo = EvolvingGeometry::linear(ManifoldFamily::Circle, 1.0, 0.5, 1.0, 8);
            SpectralField u0 = SpectralField::zero(geo.snapshot_at(0.0));
            u0.coeffs[0] = 0.8 * std::sqrt(geo.snapshot_at(0.0).measure());
            u0.coeffs[1] = 0.5;
            u0.coeffs[4] = 0.2;
            SolverConfig cfg{geo, NonlinearitySpec::power_law(1.0), u0, Cylinder::full(), dt,
                             ImplicitEulerOpts{}};
            const auto traj = solve_fpme(cfg);
            return transport_residual(geo, traj, [](double) { return 1.0; },
                                      [](double r) { return r; });
        };
        // f ≡ 1, F(s) = s: the identity reduces to the transport theorem and
        // the residual measures the mass drift of the time discretization.
        const double r1 = std::abs(residual_at(0.02));
        const double r2 = std::abs(residual_at(0.01));
        CHECK(r1 < 5e-3);
        CHECK(r2 < 0.65 * r1);
    }

    SUBCASE("f = id, F = s²/2 on the dilating m=1 solution: refinement") {
        auto residual_at = [](double dt) {
            auto geo = EvolvingGeometry::linear(ManifoldFamily::Circle, 1.0, 0.5, 0.5, 8);
            SpectralField u0 = SpectralField::zero(geo.snapshot_at(0.0));
            u0.coeffs[0] = 0.6 * std::sqrt(geo.snapshot_at(0.0).measure());
            u0.coeffs[1] = 1.0;
            u0.coeffs[3] = 0.4;
            SolverConfig cfg{geo, NonlinearitySpec::power_law(1.0), u0, Cylinder::full(), dt,
                             ImplicitEulerOpts{}};
            const auto traj = solve_fpme(cfg);
            return std::abs(transport_residual(geo, traj, [](double r) { return r; },
                                               [](double r) { return 0.5 * r * r; }));
        };
        const double r1 = residual_at(0.02);
        const double r2 = residual_at(0.01);
        CHECK(r1 < 1e-3);
        CHECK(r2 < 0.65 * r1);
    }
}
