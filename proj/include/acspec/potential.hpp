#pragma once

#include <cmath>
#include <functional>

#include "acspec/common.hpp"

namespace acspec {

// Double-well potential W with minima exactly at ±1, W(±1) = 0, W''(±1) > 0,
// together with the heteroclinic constant σ = ∫_{-1}^{1} √(W/2) ds and the
// primitive Ψ(t) = ∫_0^t √(W/2) ds. Pluggable behind the evaluator triple;
// the default is the quartic W(u) = (1-u²)²/4.
struct Potential {
    std::function<double(double)> W;
    std::function<double(double)> Wp;
    std::function<double(double)> Wpp;
    std::function<double(double)> Psi;
    double sigma = 0.0;
    std::string name;

    static Potential quartic() {
        Potential p;
        p.name = "quartic";
        p.W = [](double u) { double q = 1.0 - u * u; return 0.25 * q * q; };
        p.Wp = [](double u) { return u * u * u - u; };
        p.Wpp = [](double u) { return 3.0 * u * u - 1.0; };
        // √(W/2) = |1-u²| / (2√2); closed-form primitive on each branch.
        p.Psi = [](double t) {
            const double c = 1.0 / (2.0 * std::sqrt(2.0));
            double a = std::fabs(t);
            double v;
            if (a <= 1.0) {
                v = c * (a - a * a * a / 3.0);
            } else {
                v = c * (2.0 / 3.0) + c * (a * a * a / 3.0 - a + 2.0 / 3.0);
            }
            return t < 0 ? -v : v;
        };
        p.sigma = std::sqrt(2.0) / 3.0;
        return p;
    }

    // Composite-Simpson quadrature of ∫_{-1}^{1}√(W/2); used to cross-check
    // the closed-form sigma of a plugged-in potential.
    double sigma_by_quadrature(int panels = 4096) const {
        double h = 2.0 / panels;
        KahanSum s;
        auto f = [&](double x) { return std::sqrt(std::max(0.0, W(x)) / 2.0); };
        for (int i = 0; i < panels; ++i) {
            double a = -1.0 + i * h;
            s.add(h / 6.0 * (f(a) + 4.0 * f(a + h / 2.0) + f(a + h)));
        }
        return s.value();
    }

    void validate() const {
        check(std::fabs(W(1.0)) < 1e-14 && std::fabs(W(-1.0)) < 1e-14, "BadPotential",
              "W(±1) must vanish");
        check(std::fabs(Wp(1.0)) < 1e-14 && std::fabs(Wp(-1.0)) < 1e-14, "BadPotential",
              "W'(±1) must vanish");
        check(Wpp(1.0) > 0.0 && Wpp(-1.0) > 0.0, "BadPotential", "W''(±1) must be positive");
        check(sigma > 0.0, "BadPotential", "sigma must be positive");
        check(std::fabs(sigma_by_quadrature() - sigma) <= 1e-10, "BadPotential",
              "sigma does not match quadrature of √(W/2)");
    }
};

}  // namespace acspec
