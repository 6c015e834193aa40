#pragma once

#include <array>
#include <cmath>

#include "acspec/grid.hpp"
#include "acspec/metric.hpp"

namespace acspec {

namespace detail {

// Index of neighbour shifted by ±1 along axis, with periodic wrap.
inline std::size_t shift1(const TorusGrid& g, std::size_t idx, int axis, int dir) {
    std::size_t n = g.res(axis), st = g.stride(axis);
    std::size_t ia = (idx / st) % n;
    if (dir > 0) return ia + 1 == n ? idx - (n - 1) * st : idx + st;
    return ia == 0 ? idx + (n - 1) * st : idx - st;
}

}  // namespace detail

// Plain coordinate partial ∂_a u by second-order central differences.
inline void partial_coord(const ScalarField& u, int axis, std::vector<double>& out) {
    const TorusGrid& g = *u.grid;
    out.resize(g.nodes());
    const double inv2h = 1.0 / (2.0 * g.spacing(axis));
    parallel_for(g.nodes(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            std::size_t ip = detail::shift1(g, i, axis, +1);
            std::size_t im = detail::shift1(g, i, axis, -1);
            out[i] = (u[ip] - u[im]) * inv2h;
        }
    });
}

// Gradient with raised index: components e^{-2f} ∂_a u (plain ∂_a u when flat).
inline VectorField gradient(const ScalarField& u, const Metric& metric = Metric()) {
    u.check_finite("gradient input");
    const TorusGrid& g = *u.grid;
    VectorField v(u.grid);
    for (int a = 0; a < g.dim(); ++a) partial_coord(u, a, v.comp[a]);
    if (!metric.is_flat()) {
        for (std::size_t i = 0; i < g.nodes(); ++i) {
            double w = std::exp(-2.0 * metric.f(g.position(i)));
            for (int a = 0; a < g.dim(); ++a) v.comp[a][i] *= w;
        }
    }
    return v;
}

// Coordinate Hessian: diagonal entries by centered second differences, mixed
// partials by nested centered differences (symmetric by construction).
inline SymTensorField hessian(const ScalarField& u) {
    u.check_finite("hessian input");
    const TorusGrid& g = *u.grid;
    SymTensorField H(u.grid);
    for (int a = 0; a < g.dim(); ++a) {
        const double ih2 = 1.0 / (g.spacing(a) * g.spacing(a));
        auto& d = H.comp[SymTensorField::pack(g.dim(), a, a)];
        parallel_for(g.nodes(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                std::size_t ip = detail::shift1(g, i, a, +1);
                std::size_t im = detail::shift1(g, i, a, -1);
                d[i] = (u[ip] - 2.0 * u[i] + u[im]) * ih2;
            }
        });
        for (int b = a + 1; b < g.dim(); ++b) {
            const double w = 1.0 / (4.0 * g.spacing(a) * g.spacing(b));
            auto& m = H.comp[SymTensorField::pack(g.dim(), a, b)];
            parallel_for(g.nodes(), [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    std::size_t ipp = detail::shift1(g, detail::shift1(g, i, a, +1), b, +1);
                    std::size_t ipm = detail::shift1(g, detail::shift1(g, i, a, +1), b, -1);
                    std::size_t imp = detail::shift1(g, detail::shift1(g, i, a, -1), b, +1);
                    std::size_t imm = detail::shift1(g, detail::shift1(g, i, a, -1), b, -1);
                    m[i] = (u[ipp] - u[ipm] - u[imp] + u[imm]) * w;
                }
            });
        }
    }
    return H;
}

// Laplace–Beltrami: flat 5/7-point stencil, or e^{-2f}(Δ₀u + (m-2)⟨∇₀f,∇₀u⟩)
// with analytic conformal weights.
inline ScalarField laplacian(const ScalarField& u, const Metric& metric = Metric()) {
    u.check_finite("laplacian input");
    const TorusGrid& g = *u.grid;
    ScalarField out(u.grid);
    std::array<double, 3> ih2{};
    for (int a = 0; a < g.dim(); ++a) ih2[a] = 1.0 / (g.spacing(a) * g.spacing(a));
    parallel_for(g.nodes(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double s = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                std::size_t ip = detail::shift1(g, i, a, +1);
                std::size_t im = detail::shift1(g, i, a, -1);
                s += (u[ip] - 2.0 * u[i] + u[im]) * ih2[a];
            }
            out[i] = s;
        }
    });
    if (!metric.is_flat()) {
        const int m = g.dim();
        parallel_for(g.nodes(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                auto p = g.position(i);
                auto gf = metric.grad_f(p);
                double adv = 0.0;
                for (int a = 0; a < m; ++a) {
                    std::size_t ip = detail::shift1(g, i, a, +1);
                    std::size_t im = detail::shift1(g, i, a, -1);
                    adv += gf[a] * (u[ip] - u[im]) / (2.0 * g.spacing(a));
                }
                out[i] = std::exp(-2.0 * metric.f(p)) * (out[i] + double(m - 2) * adv);
            }
        });
    }
    return out;
}

// ∫ field dV_g over the masked nodes (midpoint quadrature with the metric
// volume element). Kahan-compensated so 1e-12-level identities hold.
inline double integrate(const ScalarField& u, const RegionMask& mask,
                        const Metric& metric = Metric()) {
    check(u.grid->same_shape(*mask.grid), "GridMismatch", "integrate: field/mask grids differ");
    const TorusGrid& g = *u.grid;
    KahanSum s;
    const double cv = g.cell_volume();
    if (metric.is_flat()) {
        for (std::size_t i = 0; i < g.nodes(); ++i)
            if (mask[i]) s.add(u[i] * cv);
    } else {
        for (std::size_t i = 0; i < g.nodes(); ++i)
            if (mask[i]) s.add(u[i] * metric.volume_weight(g.position(i), g.dim()) * cv);
    }
    return s.value();
}

inline double integrate_full(const ScalarField& u, const Metric& metric = Metric()) {
    const TorusGrid& g = *u.grid;
    KahanSum s;
    const double cv = g.cell_volume();
    if (metric.is_flat()) {
        for (std::size_t i = 0; i < g.nodes(); ++i) s.add(u[i] * cv);
    } else {
        for (std::size_t i = 0; i < g.nodes(); ++i)
            s.add(u[i] * metric.volume_weight(g.position(i), g.dim()) * cv);
    }
    return s.value();
}

// Dirichlet form ∫ |∇φ|²_g dV_g in flux form: forward differences on faces
// with face-averaged weight e^{(m-2)f}. This is exactly the quadratic form of
// the assembled stiffness operator, so energies and operators agree to
// rounding, not just to O(h²).
inline double dirichlet_form(const ScalarField& phi, const Metric& metric = Metric()) {
    const TorusGrid& g = *phi.grid;
    const double cv = g.cell_volume();
    KahanSum s;
    for (int a = 0; a < g.dim(); ++a) {
        const double ih2 = 1.0 / (g.spacing(a) * g.spacing(a));
        for (std::size_t i = 0; i < g.nodes(); ++i) {
            std::size_t ip = detail::shift1(g, i, a, +1);
            double d = phi[ip] - phi[i];
            double w = 1.0;
            if (!metric.is_flat())
                w = 0.5 * (metric.face_weight(g.position(i), g.dim()) +
                           metric.face_weight(g.position(ip), g.dim()));
            s.add(w * d * d * ih2 * cv);
        }
    }
    return s.value();
}

// Riemannian divergence of a (raised-index) vector field:
// div_g X = Σ ∂_a X^a + m ⟨∇f, X⟩.
inline ScalarField divergence(const VectorField& X, const Metric& metric = Metric()) {
    const TorusGrid& g = *X.grid;
    ScalarField out(X.grid);
    std::vector<double> d;
    for (int a = 0; a < g.dim(); ++a) {
        ScalarField comp;
        comp.grid = X.grid;
        comp.values = X.comp[a];
        partial_coord(comp, a, d);
        for (std::size_t i = 0; i < g.nodes(); ++i) out[i] += d[i];
    }
    if (!metric.is_flat()) {
        const int m = g.dim();
        for (std::size_t i = 0; i < g.nodes(); ++i) {
            auto gf = metric.grad_f(g.position(i));
            double adv = 0.0;
            for (int a = 0; a < m; ++a) adv += gf[a] * X.comp[a][i];
            out[i] += double(m) * adv;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Orthonormal-frame point data. In the frame E_a = e^{-f}∂_a all curvature
// quantities of the level sets reduce to Euclidean linear algebra on these
// components:
//   grad:  ∇u(E_a)        = e^{-f} ∂_a u
//   hess:  ∇²u(E_a,E_b)   = e^{-2f} (∂²u - Christoffel correction)
//   ric:   Ric(E_a,E_b)   = e^{-2f} Ric_coord
struct FrameFields {
    GridPtr grid;
    VectorField grad;       // frame components
    SymTensorField hess;    // frame components of the covariant Hessian
    std::vector<double> norm_grad;  // |∇u|_g per node
};

inline FrameFields compute_frame(const ScalarField& u, const Metric& metric = Metric()) {
    const TorusGrid& g = *u.grid;
    FrameFields F;
    F.grid = u.grid;
    F.grad = VectorField(u.grid);
    for (int a = 0; a < g.dim(); ++a) partial_coord(u, a, F.grad.comp[a]);
    F.hess = hessian(u);
    const int m = g.dim();
    if (!metric.is_flat()) {
        parallel_for(g.nodes(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                auto p = g.position(i);
                auto gf = metric.grad_f(p);
                double fdotg = 0.0;
                for (int c = 0; c < m; ++c) fdotg += gf[c] * F.grad.comp[c][i];
                double ef = std::exp(-metric.f(p)), ef2 = ef * ef;
                // covariant correction: Γ^c_{ab}∂_c u with conformal Γ
                for (int a = 0; a < m; ++a)
                    for (int b = a; b < m; ++b) {
                        double corr = gf[a] * F.grad.comp[b][i] + gf[b] * F.grad.comp[a][i];
                        if (a == b) corr -= fdotg;
                        F.hess.at(a, b, i) = ef2 * (F.hess.at(a, b, i) - corr);
                    }
                for (int a = 0; a < m; ++a) F.grad.comp[a][i] *= ef;
            }
        });
    }
    F.norm_grad.resize(g.nodes());
    for (std::size_t i = 0; i < g.nodes(); ++i) {
        double s = 0.0;
        for (int a = 0; a < m; ++a) s += F.grad.comp[a][i] * F.grad.comp[a][i];
        F.norm_grad[i] = std::sqrt(s);
    }
    return F;
}

}  // namespace acspec
