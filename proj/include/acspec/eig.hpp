#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <vector>

#include "acspec/common.hpp"

namespace acspec {

struct EigPairs {
    std::vector<double> values;                 // ascending
    std::vector<Eigen::VectorXd> vectors;       // matching order
    std::vector<double> residuals;              // ‖Av - λv‖ / ‖v‖
    std::string solver;
};

inline Eigen::MatrixXd to_dense(const Eigen::SparseMatrix<double>& A) {
    return Eigen::MatrixXd(A);
}

// Dense oracle: full symmetric eigendecomposition, smallest p pairs.
inline EigPairs dense_smallest(const Eigen::SparseMatrix<double>& A, int p) {
    const int n = int(A.rows());
    check(p >= 1 && p <= n, "InvalidArgument", "dense_smallest: bad p");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_dense(A));
    check(es.info() == Eigen::Success, "EigFailure", "dense eigensolver failed");
    EigPairs out;
    out.solver = "dense";
    for (int k = 0; k < p; ++k) {
        out.values.push_back(es.eigenvalues()[k]);
        out.vectors.push_back(es.eigenvectors().col(k));
        Eigen::VectorXd r = A * out.vectors.back() - out.values.back() * out.vectors.back();
        out.residuals.push_back(r.norm());
    }
    return out;
}

// Shift-invert block Lanczos with full reorthogonalization. The shift is a
// Gershgorin lower bound, so A - σI is SPD and admits a sparse Cholesky
// factorization; the Krylov basis of (A - σI)⁻¹ is expanded blockwise and
// Ritz pairs are extracted from the projection of A onto that basis. Blocks
// (not single vectors) are essential here: the operators have numerically
// degenerate clusters which single-vector Lanczos cannot resolve.
inline EigPairs lanczos_smallest(const Eigen::SparseMatrix<double>& A, int p,
                                 double tol = 1e-9, std::uint64_t seed = 0x5eedULL) {
    const int n = int(A.rows());
    check(p >= 1 && p <= n, "InvalidArgument", "lanczos_smallest: bad p");

    // Gershgorin lower bound.
    std::vector<double> offsum(n, 0.0), diag(n, 0.0);
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
            if (it.row() == it.col())
                diag[it.row()] = it.value();
            else
                offsum[it.row()] += std::fabs(it.value());
        }
    double lower = std::numeric_limits<double>::infinity(), scale = 0.0;
    for (int i = 0; i < n; ++i) {
        lower = std::min(lower, diag[i] - offsum[i]);
        scale = std::max(scale, std::fabs(diag[i]) + offsum[i]);
    }
    double sigma = lower - std::max(1e-8 * scale, 1e-8);

    Eigen::SparseMatrix<double> S = A;
    for (int i = 0; i < n; ++i) S.coeffRef(i, i) -= sigma;
    S.makeCompressed();
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(S);
    if (llt.info() != Eigen::Success) {
        sigma = lower - std::max(1e-3 * scale, 1.0);
        S = A;
        for (int i = 0; i < n; ++i) S.coeffRef(i, i) -= sigma;
        S.makeCompressed();
        llt.compute(S);
        check(llt.info() == Eigen::Success, "EigFailure", "shifted Cholesky failed");
    }

    const int b = std::min(n, std::max(4, std::min(p + 2, 12)));
    const int m_max = std::min(n, std::max(8 * b, 6 * p + 48));

    Eigen::MatrixXd V(n, 0), AV(n, 0);
    SplitMix64 rng(seed);
    Eigen::MatrixXd X(n, b);
    for (int j = 0; j < b; ++j)
        for (int i = 0; i < n; ++i) X(i, j) = rng.sym();

    auto orthonormalize = [&](Eigen::MatrixXd& Z) {
        // full reorthogonalization (two classical Gram-Schmidt passes), then QR
        for (int pass = 0; pass < 2; ++pass)
            if (V.cols() > 0) Z -= V * (V.transpose() * Z);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
        Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(Z.rows(), Z.cols());
        Eigen::MatrixXd R = qr.matrixQR().topRows(Z.cols()).triangularView<Eigen::Upper>();
        // drop numerically dependent columns, reinject deterministic noise
        Eigen::MatrixXd kept(Z.rows(), Z.cols());
        int nk = 0;
        double rmax = 0.0;
        for (int j = 0; j < Z.cols(); ++j) rmax = std::max(rmax, std::fabs(R(j, j)));
        for (int j = 0; j < Z.cols(); ++j) {
            if (rmax == 0.0 || std::fabs(R(j, j)) <= 1e-12 * rmax) {
                Eigen::VectorXd f(Z.rows());
                for (int i = 0; i < Z.rows(); ++i) f(i) = rng.sym();
                if (V.cols() > 0) f -= V * (V.transpose() * f);
                f -= kept.leftCols(nk) * (kept.leftCols(nk).transpose() * f);
                double nrm = f.norm();
                if (nrm < 1e-12) continue;
                kept.col(nk++) = f / nrm;
            } else {
                kept.col(nk++) = Q.col(j);
            }
        }
        Z = kept.leftCols(nk);
    };

    EigPairs out;
    out.solver = "lanczos";
    orthonormalize(X);

    while (V.cols() < m_max) {
        if (X.cols() == 0) break;
        int old = int(V.cols());
        V.conservativeResize(Eigen::NoChange, old + X.cols());
        V.rightCols(X.cols()) = X;
        AV.conservativeResize(Eigen::NoChange, old + X.cols());
        AV.rightCols(X.cols()) = A * X;

        if (V.cols() >= p) {
            Eigen::MatrixXd H = V.transpose() * AV;
            H = 0.5 * (H + H.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
            bool ok = true;
            std::vector<double> vals(p);
            std::vector<Eigen::VectorXd> vecs(p);
            std::vector<double> res(p);
            for (int k = 0; k < p; ++k) {
                vals[k] = es.eigenvalues()[k];
                vecs[k] = V * es.eigenvectors().col(k);
                Eigen::VectorXd r = A * vecs[k] - vals[k] * vecs[k];
                res[k] = r.norm();
                if (res[k] > tol * (std::fabs(vals[k]) + 1.0)) ok = false;
            }
            if (ok) {
                out.values = std::move(vals);
                out.vectors = std::move(vecs);
                out.residuals = std::move(res);
                return out;
            }
        }
        // expand: apply (A - σI)⁻¹ to the newest block
        Eigen::MatrixXd Z = llt.solve(V.rightCols(X.cols()));
        X = Z;
        orthonormalize(X);
    }
    // report what we have
    int achieved = 0;
    if (V.cols() > 0) {
        Eigen::MatrixXd H = V.transpose() * AV;
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        for (int k = 0; k < std::min<int>(p, int(V.cols())); ++k) {
            Eigen::VectorXd x = V * es.eigenvectors().col(k);
            Eigen::VectorXd r = A * x - es.eigenvalues()[k] * x;
            if (r.norm() <= tol * (std::fabs(es.eigenvalues()[k]) + 1.0)) ++achieved;
        }
    }
    fail("NoConvergence",
         "lanczos_smallest: converged " + std::to_string(achieved) + " of " + std::to_string(p));
}

// Eigenvalue counts by Sylvester inertia of LDLᵀ factorizations:
//   #{λ < t} = negative entries of D in A - tI = LDLᵀ.
// Falls back to tiny deterministic shift perturbations when a pivot is
// exactly zero (factorization failure).
inline int count_below(const Eigen::SparseMatrix<double>& A, double t) {
    const int n = int(A.rows());
    for (int attempt = 0; attempt < 5; ++attempt) {
        double shift = t * (1.0 + (attempt ? attempt * 1e-9 : 0.0)) + (attempt ? attempt * 1e-12 : 0.0);
        Eigen::SparseMatrix<double> S = A;
        for (int i = 0; i < n; ++i) S.coeffRef(i, i) -= shift;
        S.makeCompressed();
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(S);
        if (ldlt.info() != Eigen::Success) continue;
        auto D = ldlt.vectorD();
        bool clean = true;
        int neg = 0;
        double dmax = 0.0;
        for (int i = 0; i < n; ++i) dmax = std::max(dmax, std::fabs(D[i]));
        for (int i = 0; i < n; ++i) {
            if (!(std::fabs(D[i]) > 0.0) || !std::isfinite(D[i])) clean = false;
            if (D[i] < 0.0) ++neg;
        }
        (void)dmax;
        if (clean) return neg;
    }
    fail("EigFailure", "inertia count failed (repeated zero pivots)");
}

}  // namespace acspec
