#pragma once

#include <cmath>

#include "acspec/grid.hpp"

namespace acspec {

// Canonical initial data. All profiles are smooth and periodic; tanh walls
// are periodized by summing over one layer of lattice images, which keeps the
// wrap seam below the physical interaction terms.

// Two parallel interfaces normal to axis 0, at x = L/4 and x = 3L/4.
inline ScalarField pair_seed(const GridPtr& g, double eps) {
    const double L = g->length(0);
    const double s = std::sqrt(2.0) * eps;
    return sample_field(g, [&](std::array<double, 3> p) {
        double v = -1.0;
        for (int k = -1; k <= 1; ++k) {
            v += std::tanh((p[0] - 0.25 * L + k * L) / s);
            v -= std::tanh((p[0] - 0.75 * L + k * L) / s);
        }
        return v;
    });
}

// Single interface pair at arbitrary wall positions a < b on axis 0.
inline ScalarField walls_seed(const GridPtr& g, double eps, double a, double b) {
    const double L = g->length(0);
    const double s = std::sqrt(2.0) * eps;
    return sample_field(g, [&](std::array<double, 3> p) {
        double v = -1.0;
        for (int k = -1; k <= 1; ++k) {
            v += std::tanh((p[0] - a + k * L) / s);
            v -= std::tanh((p[0] - b + k * L) / s);
        }
        return v;
    });
}

// Radial droplet of the upper phase: u = +1 inside radius r, -1 outside,
// with a tanh cross-section q(|x - c|).
inline ScalarField radial_seed(const GridPtr& g, double eps, std::array<double, 3> center,
                               double r) {
    const double s = std::sqrt(2.0) * eps;
    return sample_field(g, [&](std::array<double, 3> p) {
        double d = std::sqrt(g->periodic_distance2(p, center));
        return std::tanh((r - d) / s);
    });
}

// Smoothed sign(sin(2π x / L)) data.
inline ScalarField smoothed_sign_seed(const GridPtr& g, double eps) {
    const double L = g->length(0);
    const double s = std::sqrt(2.0) * eps;
    return sample_field(g, [&](std::array<double, 3> p) {
        return std::tanh(std::sin(2.0 * kPi * p[0] / L) / s);
    });
}

// Deterministic small random data in [-amp, amp].
inline ScalarField random_seed(const GridPtr& g, double amp, std::uint64_t seed) {
    SplitMix64 rng(seed);
    ScalarField u(g);
    for (auto& v : u.values) v = amp * rng.sym();
    return u;
}

}  // namespace acspec
