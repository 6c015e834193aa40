#pragma once

#include <array>
#include <cmath>

#include "acspec/grid.hpp"

namespace acspec {

enum class MetricKind { Flat, Conformal };

// Metric on the torus: either flat or conformally flat g = e^{2f} δ with a
// closed-form exponent f(x) = amp · Π_a cos(2π k_a x_a / L_a) (axes with
// k_a = 0 contribute a factor 1). All derivatives of f and the Ricci tensor
// are evaluated analytically; nothing is obtained by differencing the factor.
class Metric {
public:
    Metric() = default;  // flat

    static Metric flat() { return Metric(); }

    static Metric conformal_cosine(std::array<double, 3> lengths, double amplitude,
                                   std::array<int, 3> freq) {
        Metric m;
        m.kind_ = amplitude == 0.0 ? MetricKind::Flat : MetricKind::Conformal;
        m.lengths_ = lengths;
        m.amp_ = amplitude;
        m.freq_ = freq;
        return m;
    }

    MetricKind kind() const { return kind_; }
    bool is_flat() const { return kind_ == MetricKind::Flat; }

    double f(const std::array<double, 3>& p) const {
        if (is_flat()) return 0.0;
        double v = amp_;
        for (int a = 0; a < 3; ++a)
            if (freq_[a] != 0) v *= std::cos(2.0 * kPi * freq_[a] * p[a] / lengths_[a]);
        return v;
    }

    std::array<double, 3> grad_f(const std::array<double, 3>& p) const {
        std::array<double, 3> g{0, 0, 0};
        if (is_flat()) return g;
        for (int a = 0; a < 3; ++a) {
            if (freq_[a] == 0) continue;
            double v = amp_;
            for (int b = 0; b < 3; ++b) {
                if (freq_[b] == 0) continue;
                double w = 2.0 * kPi * freq_[b] / lengths_[b];
                v *= (b == a) ? -w * std::sin(w * p[b]) : std::cos(w * p[b]);
            }
            g[a] = v;
        }
        return g;
    }

    std::array<std::array<double, 3>, 3> hess_f(const std::array<double, 3>& p) const {
        std::array<std::array<double, 3>, 3> h{};
        if (is_flat()) return h;
        for (int a = 0; a < 3; ++a) {
            for (int b = a; b < 3; ++b) {
                if (freq_[a] == 0 || freq_[b] == 0) continue;
                double v = amp_;
                for (int c = 0; c < 3; ++c) {
                    if (freq_[c] == 0) continue;
                    double w = 2.0 * kPi * freq_[c] / lengths_[c];
                    int order = (c == a) + (c == b);
                    if (order == 0)
                        v *= std::cos(w * p[c]);
                    else if (order == 1)
                        v *= -w * std::sin(w * p[c]);
                    else
                        v *= -w * w * std::cos(w * p[c]);
                }
                h[a][b] = h[b][a] = v;
            }
        }
        return h;
    }

    double laplacian_f(const std::array<double, 3>& p, int dim) const {
        if (is_flat()) return 0.0;
        auto h = hess_f(p);
        double s = 0.0;
        for (int a = 0; a < dim; ++a) s += h[a][a];
        return s;
    }

    // Conformal-change formula in flat background, coordinate components:
    //   Ric = -(m-2)(Hess f - df⊗df) - (Δf + (m-2)|∇f|²) δ,  m = dim.
    std::array<std::array<double, 3>, 3> ricci_coord(const std::array<double, 3>& p, int dim) const {
        std::array<std::array<double, 3>, 3> r{};
        if (is_flat()) return r;
        auto hf = hess_f(p);
        auto gf = grad_f(p);
        double lap = 0.0, g2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            lap += hf[a][a];
            g2 += gf[a] * gf[a];
        }
        double m2 = double(dim - 2);
        double trace_term = lap + m2 * g2;
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) {
                r[a][b] = -m2 * (hf[a][b] - gf[a] * gf[b]);
                if (a == b) r[a][b] -= trace_term;
            }
        return r;
    }

    // Ric(ν,ν) for a g-unit normal whose orthonormal-frame components are n
    // (Euclidean-unit vector): frame components of Ric are e^{-2f}·coord.
    double ricci_nn(const std::array<double, 3>& p, int dim, const std::array<double, 3>& n) const {
        if (is_flat()) return 0.0;
        auto r = ricci_coord(p, dim);
        double s = 0.0;
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) s += r[a][b] * n[a] * n[b];
        return std::exp(-2.0 * f(p)) * s;
    }

    double volume_weight(const std::array<double, 3>& p, int dim) const {
        return is_flat() ? 1.0 : std::exp(dim * f(p));
    }
    // Face weight of the Dirichlet form: ∫|∇φ|²_g dV_g carries e^{(m-2)f}.
    double face_weight(const std::array<double, 3>& p, int dim) const {
        return is_flat() ? 1.0 : std::exp((dim - 2) * f(p));
    }

private:
    MetricKind kind_ = MetricKind::Flat;
    std::array<double, 3> lengths_{1, 1, 1};
    double amp_ = 0.0;
    std::array<int, 3> freq_{0, 0, 0};
};

}  // namespace acspec
