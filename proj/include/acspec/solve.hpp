#pragma once

#include <memory>
#include <optional>

#include "acspec/energy.hpp"
#include "acspec/fft.hpp"
#include "acspec/linsolve.hpp"
#include "acspec/schedule.hpp"
#include "acspec/spectrum.hpp"

namespace acspec {

struct CriticalPoint {
    ScalarField u;
    double epsilon = 0.0;
    double residual_linf = 0.0;
    EnergyBreakdown energy;
    double sup_norm = 0.0;
    int morse_index = -1;  // -1 until certified by the spectrum module
    std::string method;
    std::string flag;  // non-fatal warnings (e.g. under-resolved regime)
};

struct SolverOptions {
    double tol_res = 1e-8;
    int max_steps = 20000;
    double newton_threshold_scale = 10.0;  // admissible entry residual: scale/ε²
    int newton_max_iters = 50;
    double sup_norm_tol = 1e-8;  // maximum-principle slack
    std::uint64_t seed = 1;
};

inline double sup_norm(const ScalarField& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::fabs(v));
    return m;
}

namespace detail {

inline CriticalPoint finish_point(ScalarField u, double eps, const Metric& metric,
                                  const Potential& pot, const std::string& method,
                                  const SolverOptions& opts) {
    CriticalPoint cp;
    cp.epsilon = eps;
    cp.residual_linf = residual_linf(u, eps, metric, pot);
    cp.energy = energy_full(u, eps, metric, pot);
    cp.sup_norm = sup_norm(u);
    cp.method = method;
    cp.u = std::move(u);
    check(cp.sup_norm <= 1.0 + opts.sup_norm_tol, "MaximumPrincipleViolation",
          "converged point has sup norm " + std::to_string(cp.sup_norm));
    return cp;
}

}  // namespace detail

// Semi-implicit gradient flow for E_ε: implicit constant-coefficient
// diffusion (inverted spectrally, which is exact for the stencil), explicit
// W'. The time step adapts so that the discrete energy never increases.
inline CriticalPoint gradient_flow(const ScalarField& u0, double eps, double tol_res,
                                   int max_steps, const Metric& metric = Metric(),
                                   const Potential& pot = Potential::quartic(),
                                   const SolverOptions& opts = SolverOptions()) {
    check(eps > 0.0, "InvalidEpsilon", "gradient_flow: eps must be positive");
    u0.check_finite("gradient_flow initial data");
    ScalarField u = u0;
    const TorusGrid& g = *u.grid;
    SpectralStencil fft(u.grid);

    // implicit coefficient must dominate the conformal diffusion
    double beta = 1.0;
    if (!metric.is_flat()) {
        for (std::size_t i = 0; i < g.nodes(); ++i)
            beta = std::max(beta, std::exp(-2.0 * metric.f(g.position(i))));
    }

    double dt = 0.1 * eps;
    const double dt_min = 1e-8 * eps, dt_max = 10.0 * eps;
    double e_prev = energy_full(u, eps, metric, pot).total;
    std::vector<double> rhs(g.nodes()), unew(g.nodes());

    for (int step = 0; step < max_steps; ++step) {
        ScalarField r = residual(u, eps, metric, pot);
        double res = 0.0;
        for (double v : r.values) res = std::max(res, std::fabs(v));
        if (res <= tol_res) return detail::finish_point(u, eps, metric, pot, "gradient_flow", opts);

        // (I + dt·ε·β·(-Δ)) u⁺ = u + dt·(ε·Δ_g u - W'(u)/ε + ε·β·Δ u_exp-part)
        ScalarField lap0 = laplacian(u);  // flat stencil part
        bool accepted = false;
        while (!accepted) {
            for (std::size_t i = 0; i < g.nodes(); ++i)
                rhs[i] = u[i] + dt * eps * (r[i] - beta * lap0[i]);
            fft.solve_shifted(rhs, unew, 1.0, dt * eps * beta);
            ScalarField cand;
            cand.grid = u.grid;
            cand.values = unew;
            double e_new = energy_full(cand, eps, metric, pot).total;
            if (e_new <= e_prev + 1e-13 * (1.0 + std::fabs(e_prev))) {
                u.values.swap(cand.values);
                e_prev = e_new;
                accepted = true;
                dt = std::min(dt * 1.2, dt_max);
            } else {
                dt *= 0.5;
                check(dt >= dt_min, "NonConvergence",
                      "gradient_flow: time step underflow while enforcing energy decrease");
            }
        }
        if (sup_norm(u) > 2.0) fail("Divergence", "gradient_flow: sup norm exceeded 2");
    }
    fail("NonConvergence", "gradient_flow: residual above tolerance after max_steps");
}

// Newton iteration on Δu - ε⁻²W'(u) = 0. The symmetric Jacobian system is
// solved by MINRES preconditioned with the spectral inverse of (-Δ + 2ε⁻²);
// no factorization, robust to the near-null translation modes of interface
// solutions. Numerically singular linearizations are reported:
//   - constant inputs are probed against the exact stencil symbol,
//   - otherwise stagnation of the inner solver flags SingularJacobian.
inline CriticalPoint newton_refine(const ScalarField& u0, double eps, double tol_res,
                                   const Metric& metric = Metric(),
                                   const Potential& pot = Potential::quartic(),
                                   const SolverOptions& opts = SolverOptions()) {
    check(eps > 0.0, "InvalidEpsilon", "newton_refine: eps must be positive");
    const TorusGrid& g = *u0.grid;
    const double ie2 = 1.0 / (eps * eps);
    SpectralStencil fft(u0.grid);

    // Constant-field singularity probe: L = Δ - ε⁻²W''(c) has exact symbol.
    {
        bool constant = true;
        for (double v : u0.values)
            if (v != u0.values[0]) {
                constant = false;
                break;
            }
        if (constant && metric.is_flat()) {
            double q = ie2 * pot.Wpp(u0.values[0]);
            double m = fft.min_abs_shifted_symbol(q, 1.0);  // |μ + q| over modes
            if (m <= 1e-8 * (1.0 + ie2))
                fail("SingularJacobian",
                     "linearization at the constant state is numerically singular");
        }
    }

    ScalarField u = u0;
    double res = residual_linf(u, eps, metric, pot);
    double threshold = opts.newton_threshold_scale / (eps * eps);
    check(res <= threshold, "NonConvergence",
          "newton_refine: entry residual too large for local convergence");
    if (res <= tol_res) return detail::finish_point(u, eps, metric, pot, "newton", opts);

    const double cv = g.cell_volume();
    std::vector<double> bvol(g.nodes(), 1.0);
    if (!metric.is_flat())
        for (std::size_t i = 0; i < g.nodes(); ++i)
            bvol[i] = metric.volume_weight(g.position(i), g.dim());

    for (int it = 0; it < opts.newton_max_iters; ++it) {
        ScalarField F = residual(u, eps, metric, pot);
        // A = K + diag(ε⁻²W''(u)·b·cv); rhs = diag(b·cv)·F
        std::vector<double> q(g.nodes());
        for (std::size_t i = 0; i < g.nodes(); ++i) q[i] = ie2 * pot.Wpp(u[i]) * bvol[i] * cv;
        auto apply_a = [&](const std::vector<double>& xin, std::vector<double>& yout) {
            yout.assign(g.nodes(), 0.0);
            for (int a = 0; a < g.dim(); ++a) {
                const double ih2 = 1.0 / (g.spacing(a) * g.spacing(a));
                for (std::size_t i = 0; i < g.nodes(); ++i) {
                    std::size_t ip = detail::shift1(g, i, a, +1);
                    double w = 1.0;
                    if (!metric.is_flat())
                        w = 0.5 * (metric.face_weight(g.position(i), g.dim()) +
                                   metric.face_weight(g.position(ip), g.dim()));
                    double flux = w * ih2 * cv * (xin[i] - xin[ip]);
                    yout[i] += flux;
                    yout[ip] -= flux;
                }
            }
            for (std::size_t i = 0; i < g.nodes(); ++i) yout[i] += q[i] * xin[i];
        };
        auto apply_minv = [&](const std::vector<double>& xin, std::vector<double>& yout) {
            fft.solve_shifted(xin, yout, 2.0 * ie2 * cv, cv);
        };
        std::vector<double> rhs(g.nodes()), delta;
        for (std::size_t i = 0; i < g.nodes(); ++i) rhs[i] = bvol[i] * cv * F[i];

        double inner_tol = std::min(1e-2, 0.1 * res / (1.0 + res));
        inner_tol = std::max(inner_tol, 1e-11);
        auto lin = minres(apply_a, apply_minv, rhs, delta, inner_tol, 4000);
        if (!lin.converged && lin.rel_residual > 0.5)
            fail("SingularJacobian",
                 "newton_refine: inner solver stagnated (relative residual " +
                     std::to_string(lin.rel_residual) + ")");

        for (std::size_t i = 0; i < g.nodes(); ++i) u[i] += delta[i];
        double res_new = residual_linf(u, eps, metric, pot);
        if (res_new > 0.8 * res && res_new > tol_res) {
            // A failed step near the rounding floor usually means the inner
            // solve drifted along a numerically null direction. Retry once
            // with a tight inner tolerance before giving up.
            for (std::size_t i = 0; i < g.nodes(); ++i) u[i] -= delta[i];
            auto lin2 = minres(apply_a, apply_minv, rhs, delta, 1e-11, 6000);
            (void)lin2;
            for (std::size_t i = 0; i < g.nodes(); ++i) u[i] += delta[i];
            res_new = residual_linf(u, eps, metric, pot);
            if (res_new > 0.8 * res && res_new > tol_res) {
                for (std::size_t i = 0; i < g.nodes(); ++i) u[i] -= delta[i];
                fail("NonConvergence",
                     "newton_refine: residual stagnated at " + std::to_string(res));
            }
        }
        if (res_new <= tol_res) return detail::finish_point(u, eps, metric, pot, "newton", opts);
        res = res_new;
    }
    fail("NonConvergence", "newton_refine: max iterations reached");
}

struct MountainPassOptions {
    int path_points = 33;
    int string_sub_steps = 4;
    int max_string_iters = 4000;
    double switch_residual_scale = 0.2;  // attempt Newton when res ≤ scale/ε²
    double energy_floor = 0.0;           // 0 means the default 0.9·2σ
    double tol_res = 1e-9;
};

// Discretized-path min-max between the two wells: a simplified string method
// (gradient-flow all interior images, reparameterize to equal arclength)
// drives the path onto the minimal energy path; the maximal image converges
// toward the saddle and is polished by newton_refine. The Morse index of the
// result is certified spectrally, never assumed from the construction.
inline CriticalPoint mountain_pass(const GridPtr& grid, double eps,
                                   std::pair<double, double> endpoints, double tol_res,
                                   const Metric& metric = Metric(),
                                   const Potential& pot = Potential::quartic(),
                                   const MountainPassOptions& mp = MountainPassOptions(),
                                   const SolverOptions& opts = SolverOptions()) {
    check(eps > 0.0, "InvalidEpsilon", "mountain_pass: eps must be positive");
    check(mp.path_points >= 16, "InvalidArgument", "mountain_pass: need at least 16 path points");
    check(endpoints.first != endpoints.second, "DegeneratePath",
          "mountain_pass: endpoints coincide");
    const TorusGrid& g = *grid;

    std::string flag;
    double diameter = 0.0;
    for (int a = 0; a < g.dim(); ++a) diameter = std::max(diameter, g.length(a));
    if (eps >= diameter) flag = "interface width exceeds domain";

    const int m = mp.path_points;
    std::vector<ScalarField> path;
    path.reserve(m);
    // seeded path: nucleate a band of the upper well and widen it
    const double c0 = 0.5 * g.length(0);
    for (int j = 0; j < m; ++j) {
        double t = double(j) / double(m - 1);
        double w = t * g.length(0);
        ScalarField uj = sample_field(grid, [&](std::array<double, 3> p) {
            double d = std::fabs(p[0] - c0);
            d = std::min(d, g.length(0) - d);
            double v = std::tanh((0.5 * w - d) / (std::sqrt(2.0) * eps));
            return endpoints.first + 0.5 * (v + 1.0) * (endpoints.second - endpoints.first);
        });
        path.push_back(std::move(uj));
    }
    path.front() = ScalarField(grid, endpoints.first);
    path.back() = ScalarField(grid, endpoints.second);

    SpectralStencil fft(grid);
    double beta = 1.0;
    if (!metric.is_flat())
        for (std::size_t i = 0; i < g.nodes(); ++i)
            beta = std::max(beta, std::exp(-2.0 * metric.f(g.position(i))));
    const double dt = 0.05 * eps;
    std::vector<double> rhs(g.nodes()), unew(g.nodes());

    auto flow_once = [&](ScalarField& u) {
        ScalarField r = residual(u, eps, metric, pot);
        ScalarField lap0 = laplacian(u);
        for (std::size_t i = 0; i < g.nodes(); ++i)
            rhs[i] = u[i] + dt * eps * (r[i] - beta * lap0[i]);
        fft.solve_shifted(rhs, unew, 1.0, dt * eps * beta);
        u.values.assign(unew.begin(), unew.end());
    };
    auto l2dist = [&](const ScalarField& a, const ScalarField& b) {
        KahanSum s;
        for (std::size_t i = 0; i < g.nodes(); ++i) {
            double d = a[i] - b[i];
            s.add(d * d);
        }
        return std::sqrt(s.value());
    };

    const double switch_tol = mp.switch_residual_scale / (eps * eps);
    for (int iter = 0; iter < mp.max_string_iters; ++iter) {
        for (int j = 1; j + 1 < m; ++j)
            for (int s = 0; s < mp.string_sub_steps; ++s) flow_once(path[j]);

        // reparameterize to equal L² arclength (linear interpolation)
        std::vector<double> arc(m, 0.0);
        for (int j = 1; j < m; ++j) arc[j] = arc[j - 1] + l2dist(path[j], path[j - 1]);
        if (arc.back() > 0) {
            std::vector<ScalarField> fresh;
            fresh.reserve(m);
            fresh.push_back(path.front());
            for (int j = 1; j + 1 < m; ++j) {
                double target = arc.back() * double(j) / double(m - 1);
                int seg = 1;
                while (seg < m - 1 && arc[seg] < target) ++seg;
                double denom = arc[seg] - arc[seg - 1];
                double t = denom > 0 ? (target - arc[seg - 1]) / denom : 0.0;
                ScalarField mix(grid);
                for (std::size_t i = 0; i < g.nodes(); ++i)
                    mix[i] = (1.0 - t) * path[seg - 1][i] + t * path[seg][i];
                fresh.push_back(std::move(mix));
            }
            fresh.push_back(path.back());
            path.swap(fresh);
        }

        // locate the path maximum and test for a Newton hand-off
        int jmax = 0;
        double emax = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j) {
            double e = energy_full(path[j], eps, metric, pot).total;
            if (e > emax) {
                emax = e;
                jmax = j;
            }
        }
        if (jmax == 0 || jmax == m - 1) continue;  // barrier not yet formed
        double res = residual_linf(path[jmax], eps, metric, pot);
        if (res <= switch_tol) {
            try {
                CriticalPoint cp = newton_refine(path[jmax], eps, tol_res, metric, pot, opts);
                double floor = mp.energy_floor > 0 ? mp.energy_floor : 0.9 * 2.0 * pot.sigma;
                if (cp.energy.total < floor) continue;  // slid off the barrier; keep iterating
                cp.method = "mountain_pass";
                cp.flag = flag;
                auto mi = morse_index(cp.u, eps, full_mask(cp.u.grid), metric, pot);
                cp.morse_index = mi.index;
                if (cp.morse_index > 1)
                    fail("IndexViolation", "mountain_pass produced certified index " +
                                               std::to_string(cp.morse_index));
                return cp;
            } catch (const Error& e) {
                if (e.kind == "IndexViolation") throw;
                // Newton not yet in its basin; keep evolving the string.
            }
        }
    }
    fail("NonConvergence", "mountain_pass: string iteration budget exhausted");
}

// Periodic multilinear interpolation onto a new grid.
inline ScalarField interpolate_to(const ScalarField& u, const GridPtr& target) {
    const TorusGrid& gs = *u.grid;
    const TorusGrid& gt = *target;
    check(gs.dim() == gt.dim(), "GridMismatch", "interpolation requires equal dimension");
    ScalarField out(target);
    for (std::size_t i = 0; i < gt.nodes(); ++i) {
        auto p = gt.position(i);
        double acc = 0.0;
        // multilinear weights per axis
        std::array<std::size_t, 3> i0{0, 0, 0};
        std::array<double, 3> w{0, 0, 0};
        for (int a = 0; a < gs.dim(); ++a) {
            double x = p[a] / gs.spacing(a);
            double fl = std::floor(x);
            i0[a] = gs.wrap(long(fl), a);
            w[a] = x - fl;
        }
        int corners = 1 << gs.dim();
        for (int c = 0; c < corners; ++c) {
            double wt = 1.0;
            std::size_t idx = 0;
            for (int a = 0; a < gs.dim(); ++a) {
                bool hi = (c >> a) & 1;
                wt *= hi ? w[a] : 1.0 - w[a];
                std::size_t ia = hi ? gs.wrap(long(i0[a]) + 1, a) : i0[a];
                idx += ia * gs.stride(a);
            }
            acc += wt * u[idx];
        }
        out[i] = acc;
    }
    return out;
}

struct ContinuationStep {
    CriticalPoint point;
    std::size_t step = 0;
    bool index_changed = false;
};

// Continue a converged solution along a decreasing ε schedule, re-converging
// at every step and certifying the Morse index. Records an energy bound and
// flags index changes.
inline std::vector<ContinuationStep> continue_in_eps(const CriticalPoint& seed,
                                                     const EpsSchedule& schedule,
                                                     const Metric& metric = Metric(),
                                                     const Potential& pot = Potential::quartic(),
                                                     const SolverOptions& opts = SolverOptions()) {
    const TorusGrid& g0 = *seed.u.grid;
    std::array<double, 3> lengths{g0.length(0), g0.length(1), g0.length(2)};
    schedule.validate(g0.dim(), lengths);
    check(seed.residual_linf <= 1e-3, "InvalidArgument", "continuation seed is not converged");

    std::vector<ContinuationStep> out;
    ScalarField current = seed.u;
    int prev_index = seed.morse_index;
    for (std::size_t k = 0; k < schedule.steps(); ++k) {
        try {
            auto grid = build_torus_grid(g0.dim(), lengths, schedule.resolution[k]);
            if (!current.grid->same_shape(*grid)) current = interpolate_to(current, grid);
            double eps = schedule.eps[k];
            double rough = residual_linf(current, eps, metric, pot);
            if (rough > 0.05 / (eps * eps))
                current = gradient_flow(current, eps, 0.05 / (eps * eps), opts.max_steps, metric,
                                        pot, opts)
                              .u;
            CriticalPoint cp = newton_refine(current, eps, opts.tol_res, metric, pot, opts);
            cp.method = "continuation";
            auto mi = morse_index(cp.u, eps, full_mask(cp.u.grid), metric, pot);
            cp.morse_index = mi.index;
            ContinuationStep st;
            st.step = k;
            st.index_changed = prev_index >= 0 && mi.index != prev_index;
            prev_index = mi.index;
            current = cp.u;
            st.point = std::move(cp);
            out.push_back(std::move(st));
        } catch (const Error& e) {
            throw Error(e.kind, "at schedule step " + std::to_string(k) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace acspec
