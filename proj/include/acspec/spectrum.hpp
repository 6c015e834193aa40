#pragma once

#include <Eigen/Sparse>

#include <string>
#include <vector>

#include "acspec/eig.hpp"
#include "acspec/energy.hpp"
#include "acspec/grid.hpp"
#include "acspec/metric.hpp"
#include "acspec/potential.hpp"

namespace acspec {

// L_i = Δ - ε⁻²W''(u) on a node mask with Dirichlet conditions outside.
// Eigenvalues follow the paper sign convention Lφ + λφ = 0, so the assembled
// matrix represents -L = -Δ + ε⁻²W''(u), symmetrized against the metric
// volume weights: Ã = M^{-1/2}(K + P)M^{-1/2} with K the face-weighted
// stiffness, P the potential term and M the lumped mass.
struct SchrodingerOperator {
    GridPtr grid;
    RegionMask mask;
    double eps = 0.0;
    Metric metric;
    std::vector<std::int64_t> comp_of;   // node -> compressed index or -1
    std::vector<std::size_t> node_of;    // compressed index -> node
    std::vector<double> sqrt_mass;       // √(b_i · cell volume) per compressed node
    Eigen::SparseMatrix<double> matrix;  // symmetric, paper-sign eigenvalues

    std::size_t size() const { return node_of.size(); }

    ScalarField to_field(const Eigen::VectorXd& y) const {
        ScalarField phi(grid);
        for (std::size_t r = 0; r < node_of.size(); ++r)
            phi[node_of[r]] = y[long(r)] / sqrt_mass[r];
        return phi;
    }
};

inline SchrodingerOperator assemble(const ScalarField& u, double eps, const RegionMask& mask,
                                    const Metric& metric = Metric(),
                                    const Potential& pot = Potential::quartic()) {
    check(eps > 0.0, "InvalidEpsilon", "assemble: eps must be positive");
    check(u.grid->same_shape(*mask.grid), "GridMismatch", "assemble: field/mask grids differ");
    const TorusGrid& g = *u.grid;

    SchrodingerOperator op;
    op.grid = u.grid;
    op.mask = mask;
    op.eps = eps;
    op.metric = metric;
    op.comp_of.assign(g.nodes(), -1);
    for (std::size_t i = 0; i < g.nodes(); ++i)
        if (mask[i]) {
            op.comp_of[i] = std::int64_t(op.node_of.size());
            op.node_of.push_back(i);
        }
    const std::size_t n = op.node_of.size();
    check(n > 0, "EmptyRegion", "assemble: mask selects no nodes");

    const double cv = g.cell_volume();
    const double ie2 = 1.0 / (eps * eps);
    std::vector<double> b(n, 1.0);
    op.sqrt_mass.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (!metric.is_flat()) b[r] = metric.volume_weight(g.position(op.node_of[r]), g.dim());
        op.sqrt_mass[r] = std::sqrt(b[r] * cv);
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * std::size_t(2 * g.dim() + 1));
    std::vector<double> diag(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t i = op.node_of[r];
        for (int a = 0; a < g.dim(); ++a) {
            const double ih2 = 1.0 / (g.spacing(a) * g.spacing(a));
            for (int dir : {+1, -1}) {
                std::size_t j = detail::shift1(g, i, a, dir);
                double w = 1.0;
                if (!metric.is_flat())
                    w = 0.5 * (metric.face_weight(g.position(i), g.dim()) +
                               metric.face_weight(g.position(j), g.dim()));
                double k = w * ih2 * cv;
                diag[r] += k;
                auto c = op.comp_of[j];
                if (c >= 0 && dir > 0) {
                    // add the face once, symmetric entries
                    double off = -k / (op.sqrt_mass[r] * op.sqrt_mass[std::size_t(c)]);
                    trip.emplace_back(int(r), int(c), off);
                    trip.emplace_back(int(c), int(r), off);
                } else if (c >= 0 && dir < 0) {
                    // handled by the +1 pass from the other side
                }
            }
        }
        diag[r] += ie2 * pot.Wpp(u[i]) * b[r] * cv;
        trip.emplace_back(int(r), int(r), diag[r] / (op.sqrt_mass[r] * op.sqrt_mass[r]));
    }
    op.matrix.resize(long(n), long(n));
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    op.matrix.makeCompressed();
    return op;
}

struct SpectrumResult {
    std::vector<double> eigenvalues;  // ascending, paper sign
    std::vector<ScalarField> eigenfields;
    std::vector<double> residuals;
    std::string solver;
};

struct EigenOptions {
    enum class Force { Auto, Dense, Lanczos } force = Force::Auto;
    std::size_t dense_cap = 4096;
    double tol = 1e-9;
    std::uint64_t seed = 0x5eedULL;
    bool want_vectors = true;
};

inline SpectrumResult eigen_smallest(const SchrodingerOperator& op, int p,
                                     const EigenOptions& opts = EigenOptions()) {
    check(p >= 1, "InvalidArgument", "eigen_smallest: p must be >= 1");
    check(std::size_t(p) <= op.size(), "InvalidArgument",
          "eigen_smallest: p exceeds masked node count");
    EigPairs pairs;
    bool dense = op.size() <= opts.dense_cap;
    if (opts.force == EigenOptions::Force::Dense) dense = true;
    if (opts.force == EigenOptions::Force::Lanczos) dense = false;
    pairs = dense ? dense_smallest(op.matrix, p)
                  : lanczos_smallest(op.matrix, p, opts.tol, opts.seed);
    SpectrumResult out;
    out.solver = pairs.solver;
    out.eigenvalues = pairs.values;
    out.residuals = pairs.residuals;
    if (opts.want_vectors)
        for (auto& v : pairs.vectors) out.eigenfields.push_back(op.to_field(v));
    return out;
}

struct MorseIndexResult {
    int index = 0;
    int near_zero = 0;
    double tol_zero = 0.0;
};

inline double default_tol_zero(double eps) { return 1e-7 * (1.0 + 1.0 / (eps * eps)); }

// Count of strictly negative eigenvalues (λ < -tol_zero). Small regions use
// the dense oracle; large ones use LDLᵀ inertia counts, which are exact for
// the assembled matrix by Sylvester's law.
inline MorseIndexResult morse_index(const ScalarField& u, double eps, const RegionMask& mask,
                                    const Metric& metric = Metric(),
                                    const Potential& pot = Potential::quartic(),
                                    std::size_t dense_cap = 2048) {
    auto op = assemble(u, eps, mask, metric, pot);
    MorseIndexResult r;
    r.tol_zero = default_tol_zero(eps);
    if (op.size() <= dense_cap) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_dense(op.matrix),
                                                          Eigen::EigenvaluesOnly);
        check(es.info() == Eigen::Success, "EigFailure", "dense eigensolver failed");
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            double l = es.eigenvalues()[i];
            if (l < -r.tol_zero)
                ++r.index;
            else if (l <= r.tol_zero)
                ++r.near_zero;
        }
    } else {
        int below_minus = count_below(op.matrix, -r.tol_zero);
        int below_plus = count_below(op.matrix, r.tol_zero);
        r.index = below_minus;
        r.near_zero = below_plus - below_minus;
    }
    return r;
}

struct MonotonicityRow {
    int q = 0;
    double lambda_w1 = 0.0;
    double lambda_w2 = 0.0;
    bool ok = false;
};

// Dirichlet domain monotonicity: W1 ⊆ W2 implies λ_q(W1) ≥ λ_q(W2) - 1e-9.
inline std::vector<MonotonicityRow> spectrum_monotonicity_check(
    const ScalarField& u, double eps, const RegionMask& w1, const RegionMask& w2, int p,
    const Metric& metric = Metric(), const Potential& pot = Potential::quartic(),
    const EigenOptions& opts = EigenOptions()) {
    check(w1.subset_of(w2), "InvalidArgument", "monotonicity check requires W1 ⊆ W2");
    auto s1 = eigen_smallest(assemble(u, eps, w1, metric, pot), p, opts);
    auto s2 = eigen_smallest(assemble(u, eps, w2, metric, pot), p, opts);
    std::vector<MonotonicityRow> rows;
    for (int q = 0; q < p; ++q) {
        MonotonicityRow r;
        r.q = q + 1;
        r.lambda_w1 = s1.eigenvalues[q];
        r.lambda_w2 = s2.eigenvalues[q];
        r.ok = r.lambda_w1 >= r.lambda_w2 - 1e-9;
        rows.push_back(r);
    }
    for (auto& r : rows)
        if (!r.ok)
            fail("AssertionFailure", "spectrum monotonicity violated at q = " + std::to_string(r.q));
    return rows;
}

struct BallStability {
    std::array<double, 3> center{};
    int index = 0;
    bool stable = false;
};

// §4.1 Stability Condition scan: per-ball Morse index over a cover of the
// interface band {|u| < band_level}.
inline std::vector<BallStability> stability_scan(const ScalarField& u, double eps,
                                                 const std::vector<std::array<double, 3>>& centers,
                                                 double radius, const Metric& metric = Metric(),
                                                 const Potential& pot = Potential::quartic(),
                                                 double band_level = 0.9) {
    const TorusGrid& g = *u.grid;
    std::vector<RegionMask> balls;
    balls.reserve(centers.size());
    for (std::size_t k = 0; k < centers.size(); ++k)
        balls.push_back(ball_mask(u.grid, "ball" + std::to_string(k), centers[k], radius));
    std::size_t missed = 0;
    for (std::size_t i = 0; i < g.nodes(); ++i) {
        if (std::fabs(u[i]) >= band_level) continue;
        bool covered = false;
        for (auto& b : balls)
            if (b[i]) {
                covered = true;
                break;
            }
        if (!covered) ++missed;
    }
    check(missed == 0, "CoverageFailure",
          "stability scan: " + std::to_string(missed) + " interface nodes not covered by balls");
    std::vector<BallStability> table;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        BallStability row;
        row.center = centers[k];
        row.index = morse_index(u, eps, balls[k], metric, pot).index;
        row.stable = row.index == 0;
        table.push_back(row);
    }
    return table;
}

}  // namespace acspec
