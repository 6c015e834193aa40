#include <catch2/catch_amalgamated.hpp>

#include "acspec/energy.hpp"
#include "acspec/solve.hpp"

using namespace acspec;

namespace {

// Two antipodal interfaces at x = L/4 and x = 3L/4, constant in y(/z).
ScalarField pair_profile(const GridPtr& g, double eps) {
    double L = g->length(0);
    return sample_field(g, [&](std::array<double, 3> p) {
        double d = std::fabs(p[0] - 0.5 * L);
        d = std::min(d, L - d);
        return std::tanh((0.25 * L - d) / (std::sqrt(2.0) * eps));
    });
}

ScalarField bump(const GridPtr& g, std::array<double, 3> c, double r) {
    return sample_field(g, [&](std::array<double, 3> p) {
        double d2 = g->periodic_distance2(p, c);
        double q = d2 / (r * r);
        return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
    });
}

}  // namespace

TEST_CASE("quartic potential: values, derivatives, sigma") {
    auto pot = Potential::quartic();
    pot.validate();

    auto at = [&](double u) { return std::array<double, 3>{pot.W(u), pot.Wp(u), pot.Wpp(u)}; };
    for (double s : {-1.0, 1.0}) {
        auto v = at(s);
        REQUIRE(v[0] == 0.0);
        REQUIRE(v[1] == 0.0);
        REQUIRE(v[2] == 2.0);
    }
    auto z = at(0.0);
    REQUIRE(z[0] == 0.25);
    REQUIRE(z[1] == 0.0);
    REQUIRE(z[2] == -1.0);

    REQUIRE(pot.sigma == Catch::Approx(std::sqrt(2.0) / 3.0).epsilon(1e-14));
    REQUIRE(std::fabs(pot.sigma_by_quadrature() - pot.sigma) <= 1e-10);

    // Psi is the primitive of √(W/2): check by differencing
    for (double t : {-0.8, -0.2, 0.3, 0.99}) {
        double d = 1e-6;
        double fd = (pot.Psi(t + d) - pot.Psi(t - d)) / (2 * d);
        REQUIRE(fd == Catch::Approx(std::sqrt(pot.W(t) / 2.0)).margin(1e-9));
    }
}

TEST_CASE("energy: wells, constant zero state, two-interface oracle") {
    auto g = build_torus_grid(2, {1.0, 1.0, 0.0}, {64, 64, 1});
    ScalarField ones(g, 1.0);
    auto e1 = energy_full(ones, 0.3);
    REQUIRE(e1.total == 0.0);

    ScalarField zero(g, 0.0);
    for (double eps : {0.07, 0.5, 2.0}) {
        auto e0 = energy_full(zero, eps);
        REQUIRE(e0.dirichlet == 0.0);
        REQUIRE(e0.potential == Catch::Approx(0.25 / eps).epsilon(1e-13));
        REQUIRE(e0.total == Catch::Approx(0.25 / eps).epsilon(1e-13));
    }
    REQUIRE_THROWS_AS(energy_full(zero, -0.1), Error);

    // two-interface profile: E ≈ 4σ = 2σ per unit interface × total length 2
    auto g2 = build_torus_grid(2, {1.0, 1.0, 0.0}, {512, 8, 1});
    double eps = 0.05;
    auto u = pair_profile(g2, eps);
    double four_sigma = 4.0 * Potential::quartic().sigma;
    REQUIRE(energy_full(u, eps).total == Catch::Approx(four_sigma).epsilon(0.02));
}

TEST_CASE("residual: exact zeros and tanh heteroclinic") {
    auto g = build_torus_grid(2, {2.0, 1.0, 0.0}, {256, 8, 1});
    ScalarField pm(g, -1.0), zero(g, 0.0);
    for (double v : residual(pm, 0.1).values) REQUIRE(v == 0.0);
    for (double v : residual(zero, 0.1).values) REQUIRE(v == 0.0);
    REQUIRE_THROWS_AS(residual(zero, 0.0), Error);

    // sampled pair profile: residual is pure discretization error O(h²/ε⁴)
    double eps = 0.1;
    auto u = pair_profile(g, eps);
    double h = g->spacing(0);
    // |d⁴/dx⁴ tanh(x/(√2ε))| ≤ 4.0859/(√2ε)⁴
    double bound = (h * h / 12.0) * 4.0859 / std::pow(std::sqrt(2.0) * eps, 4);
    double res = residual_linf(u, eps);
    REQUIRE(res <= 5.0 * bound);
    // refinement: residual drops by ~4 when N doubles
    auto g2 = build_torus_grid(2, {2.0, 1.0, 0.0}, {512, 8, 1});
    double res2 = residual_linf(pair_profile(g2, eps), eps);
    REQUIRE(res / res2 >= 3.3);
    REQUIRE(res / res2 <= 4.7);
}

TEST_CASE("second variation: positive well, constant direction, polarization") {
    auto g = build_torus_grid(2, {1.0, 1.0, 0.0}, {64, 64, 1});
    auto full = full_mask(g);
    double eps = 0.25;

    ScalarField ones(g, 1.0);
    auto phi = bump(g, {0.5, 0.5, 0}, 0.3);
    REQUIRE(second_variation(ones, eps, phi, full) > 0.0);

    ScalarField zero(g, 0.0);
    ScalarField cphi(g, 1.0);
    REQUIRE(second_variation(zero, eps, cphi, full) == Catch::Approx(-1.0 / eps).epsilon(1e-12));

    // symmetric bilinear: B(φ+ψ) + B(φ-ψ) = 2B(φ) + 2B(ψ)
    auto psi = bump(g, {0.2, 0.7, 0}, 0.25);
    ScalarField plus(g), minus(g);
    for (std::size_t i = 0; i < g->nodes(); ++i) {
        plus[i] = phi[i] + psi[i];
        minus[i] = phi[i] - psi[i];
    }
    SplitMix64 rng(3);
    ScalarField ubg(g);
    for (auto& v : ubg.values) v = 0.3 * rng.sym();
    double lhs = second_variation(ubg, eps, plus, full) + second_variation(ubg, eps, minus, full);
    double rhs =
        2 * second_variation(ubg, eps, phi, full) + 2 * second_variation(ubg, eps, psi, full);
    REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-10));

    // support enforcement
    auto half = box_mask(g, "half", {0, 0, 0}, {0.5, 1.0, 0});
    REQUIRE_THROWS_AS(second_variation(ones, eps, cphi, half), Error);
}

TEST_CASE("weighted second variation identity on converged data") {
    auto g = build_torus_grid(2, {1.0, 1.0, 0.0}, {128, 16, 1});
    double eps = 0.08;
    auto pot = Potential::quartic();

    SECTION("trivial at the well") {
        ScalarField ones(g, 1.0);
        ScalarField phi = bump(g, {0.5, 0.5, 0}, 0.3);
        auto r = weighted_second_variation_identity(ones, eps, phi, full_mask(g));
        REQUIRE(r.lhs == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(r.rhs == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("rejects non-critical input") {
        SplitMix64 rng(8);
        ScalarField junk(g);
        for (auto& v : junk.values) v = 0.5 * rng.sym();
        ScalarField phi = bump(g, {0.5, 0.5, 0}, 0.3);
        REQUIRE_THROWS_AS(weighted_second_variation_identity(junk, eps, phi, full_mask(g)), Error);
    }

    SECTION("flat metric: defect within tolerance on the converged pair") {
        auto u0 = pair_profile(g, eps);
        auto cp = newton_refine(u0, eps, 1e-11);
        ScalarField phi = bump(g, {0.25, 0.5, 0}, 0.45);
        auto r = weighted_second_variation_identity(cp.u, eps, phi, full_mask(g), Metric(), pot);
        double tol = 1e-3 * (std::fabs(r.lhs) + std::fabs(r.rhs) + 1.0);
        REQUIRE(r.defect <= tol);
    }

    SECTION("conformal metric: Ric term active, defect within tolerance") {
        auto metric = Metric::conformal_cosine({1.0, 1.0, 0.0}, 0.02, {0, 1, 0});
        auto u0 = pair_profile(g, eps);
        auto cp = newton_refine(u0, eps, 1e-10, metric);
        ScalarField phi = bump(g, {0.25, 0.5, 0}, 0.45);
        auto r = weighted_second_variation_identity(cp.u, eps, phi, full_mask(g), metric, pot);
        double tol = 1e-3 * (std::fabs(r.lhs) + std::fabs(r.rhs) + 1.0);
        REQUIRE(r.defect <= tol);
    }
}

TEST_CASE("total equals dirichlet plus potential") {
    auto g = build_torus_grid(2, {1.0, 1.0, 0.0}, {32, 32, 1});
    SplitMix64 rng(5);
    ScalarField u(g);
    for (auto& v : u.values) v = rng.sym();
    auto e = energy_full(u, 0.2);
    REQUIRE(e.total == Catch::Approx(e.dirichlet + e.potential).epsilon(1e-12));
}
