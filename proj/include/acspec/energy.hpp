#pragma once

#include <cmath>

#include "acspec/metric.hpp"
#include "acspec/operators.hpp"
#include "acspec/potential.hpp"

namespace acspec {

struct EnergyBreakdown {
    double dirichlet = 0.0;  // ∫ ε|∇u|²/2
    double potential = 0.0;  // ∫ W(u)/ε
    double total = 0.0;
    std::string region = "full";
};

// Masked Dirichlet part in flux form; faces are attributed to their lower
// node, so the full-grid variant matches the assembled stiffness form exactly.
inline double dirichlet_part(const ScalarField& u, const RegionMask& mask,
                             const Metric& metric = Metric()) {
    const TorusGrid& g = *u.grid;
    const double cv = g.cell_volume();
    KahanSum s;
    for (int a = 0; a < g.dim(); ++a) {
        const double ih2 = 1.0 / (g.spacing(a) * g.spacing(a));
        for (std::size_t i = 0; i < g.nodes(); ++i) {
            if (!mask[i]) continue;
            std::size_t ip = detail::shift1(g, i, a, +1);
            double d = u[ip] - u[i];
            double w = 1.0;
            if (!metric.is_flat())
                w = 0.5 * (metric.face_weight(g.position(i), g.dim()) +
                           metric.face_weight(g.position(ip), g.dim()));
            s.add(w * d * d * ih2 * cv);
        }
    }
    return s.value();
}

inline EnergyBreakdown energy(const ScalarField& u, double eps, const RegionMask& mask,
                              const Metric& metric = Metric(),
                              const Potential& pot = Potential::quartic()) {
    check(eps > 0.0, "InvalidEpsilon", "energy: eps must be positive");
    u.check_finite("energy input");
    EnergyBreakdown e;
    e.region = mask.label;
    e.dirichlet = 0.5 * eps * dirichlet_part(u, mask, metric);
    ScalarField w(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) w[i] = pot.W(u[i]);
    e.potential = integrate(w, mask, metric) / eps;
    e.total = e.dirichlet + e.potential;
    return e;
}

inline EnergyBreakdown energy_full(const ScalarField& u, double eps,
                                   const Metric& metric = Metric(),
                                   const Potential& pot = Potential::quartic()) {
    return energy(u, eps, full_mask(u.grid), metric, pot);
}

// Residual of Eq. Δu - ε⁻²W'(u) = 0, nodewise.
inline ScalarField residual(const ScalarField& u, double eps, const Metric& metric = Metric(),
                            const Potential& pot = Potential::quartic()) {
    check(eps > 0.0, "InvalidEpsilon", "residual: eps must be positive");
    ScalarField r = laplacian(u, metric);
    const double ie2 = 1.0 / (eps * eps);
    for (std::size_t i = 0; i < u.size(); ++i) r[i] -= ie2 * pot.Wp(u[i]);
    return r;
}

inline double residual_linf(const ScalarField& u, double eps, const Metric& metric = Metric(),
                            const Potential& pot = Potential::quartic()) {
    ScalarField r = residual(u, eps, metric, pot);
    double m = 0.0;
    for (double v : r.values) m = std::max(m, std::fabs(v));
    return m;
}

inline void require_supported(const ScalarField& phi, const RegionMask& mask) {
    check(phi.grid->same_shape(*mask.grid), "GridMismatch", "test function/mask grids differ");
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (!mask[i] && phi[i] != 0.0)
            fail("UnsupportedTestFunction", "test function does not vanish outside the mask");
}

// Second variation of E_ε at u:  δ²E_ε(u)(φ,φ) = ∫ ε|∇φ|² + (W''(u)/ε)φ².
// The Dirichlet part uses the flux quadrature, which is bit-consistent with
// the assembled operator of the spectrum module.
inline double second_variation(const ScalarField& u, double eps, const ScalarField& phi,
                               const RegionMask& mask, const Metric& metric = Metric(),
                               const Potential& pot = Potential::quartic()) {
    check(eps > 0.0, "InvalidEpsilon", "second_variation: eps must be positive");
    require_supported(phi, mask);
    double dir = dirichlet_form(phi, metric);
    ScalarField q(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) q[i] = pot.Wpp(u[i]) * phi[i] * phi[i];
    double potpart = integrate_full(q, metric) / eps;
    return eps * dir + potpart;
}

// Rescaled functional ℰ_ε = ε⁻¹E_ε; its second variation is the natural
// object for the |∇u|φ identity below.
inline double second_variation_rescaled(const ScalarField& u, double eps, const ScalarField& phi,
                                        const RegionMask& mask, const Metric& metric = Metric(),
                                        const Potential& pot = Potential::quartic()) {
    return second_variation(u, eps, phi, mask, metric, pot) / eps;
}

struct IdentityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double defect = 0.0;
};

// δ²ℰ_ε(u)(|∇u|φ, |∇u|φ) = ∫ |∇u|²|∇φ|² - (|∇²u|² - |∇|∇u||² + Ric(∇u,∇u))φ².
// Both sides are evaluated by independent discrete routes; the defect is the
// discretization error of the identity. u must be a converged critical point.
inline IdentityCheck weighted_second_variation_identity(
    const ScalarField& u, double eps, const ScalarField& phi, const RegionMask& mask,
    const Metric& metric = Metric(), const Potential& pot = Potential::quartic(),
    double critical_tol = 1e-4) {
    check(eps > 0.0, "InvalidEpsilon", "identity: eps must be positive");
    require_supported(phi, mask);
    double res = residual_linf(u, eps, metric, pot);
    check(res <= critical_tol, "NotCritical",
          "identity requires a converged critical point (residual " + std::to_string(res) + ")");

    const TorusGrid& g = *u.grid;
    FrameFields F = compute_frame(u, metric);

    ScalarField weighted(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) weighted[i] = F.norm_grad[i] * phi[i];
    IdentityCheck out;
    out.lhs = second_variation_rescaled(u, eps, weighted, full_mask(u.grid), metric, pot);

    // |∇φ|² from central differences; |∇|∇u|| via the pointwise identity
    // ∇|∇u| = ∇²u·ν (valid where ∇u ≠ 0), which keeps the large cancellation
    // |∇²u|² - |∇|∇u||² stable for near-flat level sets.
    VectorField gphi(u.grid);
    for (int a = 0; a < g.dim(); ++a) partial_coord(phi, a, gphi.comp[a]);
    double max_ng = 0.0;
    for (double v : F.norm_grad) max_ng = std::max(max_ng, v);
    const double floor = 1e-10 * max_ng;
    ScalarField integrand(u.grid);
    const int m = g.dim();
    for (std::size_t i = 0; i < g.nodes(); ++i) {
        double ef = metric.is_flat() ? 1.0 : std::exp(-metric.f(g.position(i)));
        double gp2 = 0.0, gn2 = 0.0, hess2 = 0.0;
        for (int a = 0; a < m; ++a) {
            gp2 += gphi.comp[a][i] * gphi.comp[a][i];
            for (int b = 0; b < m; ++b) {
                double h = F.hess.at(a, b, i);
                hess2 += h * h;
            }
        }
        gp2 *= ef * ef;
        if (F.norm_grad[i] > floor) {
            for (int a = 0; a < m; ++a) {
                double hn = 0.0;
                for (int b = 0; b < m; ++b)
                    hn += F.hess.at(a, b, i) * F.grad.comp[b][i] / F.norm_grad[i];
                gn2 += hn * hn;
            }
        }
        double ric_term = 0.0;
        if (!metric.is_flat()) {
            std::array<double, 3> gu{0, 0, 0};
            for (int a = 0; a < m; ++a) gu[a] = F.grad.comp[a][i];
            double ng = F.norm_grad[i];
            if (ng > 0) {
                std::array<double, 3> n{gu[0] / ng, gu[1] / ng, gu[2] / ng};
                ric_term = metric.ricci_nn(g.position(i), m, n) * ng * ng;
            }
        }
        double ng2 = F.norm_grad[i] * F.norm_grad[i];
        integrand[i] = ng2 * gp2 - (hess2 - gn2 + ric_term) * phi[i] * phi[i];
    }
    out.rhs = integrate_full(integrand, metric);
    out.defect = std::fabs(out.lhs - out.rhs);
    return out;
}

}  // namespace acspec
