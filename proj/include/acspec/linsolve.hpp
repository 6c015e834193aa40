#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "acspec/common.hpp"

namespace acspec {

using LinOp = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct MinresResult {
    bool converged = false;
    int iterations = 0;
    double rel_residual = 1.0;  // preconditioned-norm estimate
};

// Preconditioned MINRES (Paige–Saunders) for symmetric A with SPD
// preconditioner M (apply_minv computes M⁻¹v). Safe for indefinite and
// numerically singular A: for consistent right-hand sides it converges to a
// least-squares solution; the caller detects singular systems via stagnation.
inline MinresResult minres(const LinOp& apply_a, const LinOp& apply_minv,
                           const std::vector<double>& b, std::vector<double>& x, double rtol,
                           int maxit) {
    const std::size_t n = b.size();
    x.assign(n, 0.0);
    MinresResult out;

    auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
        KahanSum s;
        for (std::size_t i = 0; i < u.size(); ++i) s.add(u[i] * v[i]);
        return s.value();
    };

    std::vector<double> r1 = b, r2 = b, y(n), v(n), w(n, 0.0), w1(n, 0.0), w2(n, 0.0), tmp(n);
    apply_minv(r1, y);
    double beta1 = dot(r1, y);
    if (beta1 <= 0.0) {  // b = 0 (or M not SPD on b)
        out.converged = beta1 == 0.0;
        out.rel_residual = 0.0;
        return out;
    }
    beta1 = std::sqrt(beta1);

    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1, cs = -1.0, sn = 0.0;
    double oldeps = 0.0;

    for (int k = 1; k <= maxit; ++k) {
        for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / beta;
        apply_a(v, tmp);
        if (k >= 2)
            for (std::size_t i = 0; i < n; ++i) tmp[i] -= (beta / oldb) * r1[i];
        double alfa = dot(v, tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] -= (alfa / beta) * r2[i];
        r1 = r2;
        r2 = tmp;
        apply_minv(r2, y);
        oldb = beta;
        double beta2 = dot(r2, y);
        check(beta2 >= -1e-30, "LinSolve", "preconditioner lost positive-definiteness");
        beta = std::sqrt(std::max(0.0, beta2));

        oldeps = epsln;
        double delta = cs * dbar + sn * alfa;
        double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::sqrt(gbar * gbar + beta * beta);
        gamma = std::max(gamma, 1e-300);
        cs = gbar / gamma;
        sn = beta / gamma;
        double phi = cs * phibar;
        phibar = sn * phibar;

        w1 = w2;
        w2 = w;
        for (std::size_t i = 0; i < n; ++i)
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        for (std::size_t i = 0; i < n; ++i) x[i] += phi * w[i];

        out.iterations = k;
        out.rel_residual = phibar / beta1;
        if (out.rel_residual <= rtol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace acspec
