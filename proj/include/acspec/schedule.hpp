#pragma once

#include <vector>

#include "acspec/grid.hpp"

namespace acspec {

// A strictly decreasing list of ε values with a per-step grid resolution.
// Every step must resolve the interface: ε·N_a/L_a ≥ m_min on each axis.
struct EpsSchedule {
    std::vector<double> eps;
    std::vector<std::array<std::size_t, 3>> resolution;  // one entry per step
    double m_min = 8.0;

    std::size_t steps() const { return eps.size(); }

    void validate(int dim, const std::array<double, 3>& lengths) const {
        check(!eps.empty(), "InvalidSchedule", "empty schedule");
        check(resolution.size() == eps.size(), "InvalidSchedule",
              "schedule resolution list must match eps list");
        for (std::size_t k = 0; k < eps.size(); ++k) {
            check(eps[k] > 0.0, "InvalidSchedule", "eps must be positive");
            if (k > 0)
                check(eps[k] < eps[k - 1], "InvalidSchedule", "eps must be strictly decreasing");
            for (int a = 0; a < dim; ++a) {
                double nodes_per_width = eps[k] * double(resolution[k][a]) / lengths[a];
                check(nodes_per_width >= m_min - 1e-12, "InvalidSchedule",
                      "step " + std::to_string(k) + ": interface resolved by " +
                          std::to_string(nodes_per_width) + " nodes < m_min on an axis");
            }
        }
    }
};

// Fixed-resolution schedule (the same grid at every step).
inline EpsSchedule fixed_schedule(std::vector<double> eps, std::array<std::size_t, 3> res,
                                  double m_min = 8.0) {
    EpsSchedule s;
    s.eps = std::move(eps);
    s.resolution.assign(s.eps.size(), res);
    s.m_min = m_min;
    return s;
}

// Power-of-two resolution policy: the smallest N = 2^k with ε·N/L ≥ m_target
// per axis, capped at n_cap.
inline EpsSchedule pow2_schedule(std::vector<double> eps, int dim,
                                 const std::array<double, 3>& lengths, double m_target,
                                 std::size_t n_cap, double m_min = 8.0) {
    EpsSchedule s;
    s.eps = std::move(eps);
    s.m_min = m_min;
    for (double e : s.eps) {
        std::array<std::size_t, 3> r{1, 1, 1};
        for (int a = 0; a < dim; ++a) {
            std::size_t n = 8;
            while (e * double(n) / lengths[a] < m_target && n < n_cap) n *= 2;
            r[a] = n;
        }
        s.resolution.push_back(r);
    }
    return s;
}

}  // namespace acspec
