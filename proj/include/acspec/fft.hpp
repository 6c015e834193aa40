#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <vector>

#include "acspec/grid.hpp"

namespace acspec {

// Real-to-complex FFT helper bound to one grid shape. Used to invert
// constant-coefficient stencil operators (c_mass + c_diff·(-Δ_d)) exactly:
// the 5/7-point stencil is circulant, so it diagonalizes in the DFT basis
// with symbol μ_k = Σ_a (2 - 2cos(2π k_a/N_a))/h_a².
class SpectralStencil {
public:
    explicit SpectralStencil(GridPtr grid) : grid_(std::move(grid)) {
        const TorusGrid& g = *grid_;
        n_real_ = g.nodes();
        int rank = g.dim();
        int dims[3] = {int(g.res(0)), int(g.res(1)), int(g.res(2))};
        n_complex_ = 1;
        for (int a = 0; a < rank - 1; ++a) n_complex_ *= g.res(a);
        n_complex_ *= g.res(rank - 1) / 2 + 1;
        real_.resize(n_real_);
        cplx_.resize(n_complex_);
        {
            std::lock_guard<std::mutex> lock(plan_mutex());
            fwd_ = fftw_plan_dft_r2c(rank, dims, real_.data(),
                                     reinterpret_cast<fftw_complex*>(cplx_.data()), FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r(rank, dims, reinterpret_cast<fftw_complex*>(cplx_.data()),
                                     real_.data(), FFTW_ESTIMATE);
        }
        check(fwd_ != nullptr && bwd_ != nullptr, "FFT", "plan creation failed");
        build_symbol();
    }
    ~SpectralStencil() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    SpectralStencil(const SpectralStencil&) = delete;
    SpectralStencil& operator=(const SpectralStencil&) = delete;

    // out = (c_mass·I + c_diff·(-Δ_d))⁻¹ rhs ; requires c_mass + c_diff·μ > 0.
    void solve_shifted(const std::vector<double>& rhs, std::vector<double>& out, double c_mass,
                       double c_diff) {
        std::copy(rhs.begin(), rhs.end(), real_.begin());
        fftw_execute(fwd_);
        const double scale = 1.0 / double(n_real_);
        for (std::size_t k = 0; k < n_complex_; ++k) {
            double denom = c_mass + c_diff * symbol_[k];
            cplx_[k] *= scale / denom;
        }
        fftw_execute(bwd_);
        out.assign(real_.begin(), real_.end());
    }

    // Smallest |c_mass + c_diff·μ_k| over all modes (singularity probe for
    // constant-coefficient linearizations).
    double min_abs_shifted_symbol(double c_mass, double c_diff) const {
        double m = std::numeric_limits<double>::infinity();
        for (double mu : symbol_) m = std::min(m, std::fabs(c_mass + c_diff * mu));
        return m;
    }

private:
    static std::mutex& plan_mutex() {
        static std::mutex m;
        return m;
    }
    void build_symbol() {
        const TorusGrid& g = *grid_;
        symbol_.resize(n_complex_);
        int rank = g.dim();
        std::size_t last = g.res(rank - 1) / 2 + 1;
        for (std::size_t idx = 0; idx < n_complex_; ++idx) {
            std::size_t rem = idx;
            std::size_t kk[3] = {0, 0, 0};
            kk[rank - 1] = rem % last;
            rem /= last;
            for (int a = rank - 2; a >= 0; --a) {
                kk[a] = rem % g.res(a);
                rem /= g.res(a);
            }
            double mu = 0.0;
            for (int a = 0; a < rank; ++a) {
                double h = g.spacing(a);
                double theta = 2.0 * kPi * double(kk[a]) / double(g.res(a));
                mu += (2.0 - 2.0 * std::cos(theta)) / (h * h);
            }
            symbol_[idx] = mu;
        }
    }

    GridPtr grid_;
    std::size_t n_real_ = 0, n_complex_ = 0;
    std::vector<double> real_;
    std::vector<std::complex<double>> cplx_;
    std::vector<double> symbol_;
    fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

}  // namespace acspec
