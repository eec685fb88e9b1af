#pragma once

// Fourier operators on a uniform periodic grid, backed by FFTW.
// The Nyquist mode is discarded by every operator so that the first
// derivative is antisymmetric and D.D is exactly the Laplacian used by
// the Poisson solve (summation by parts holds to roundoff).

#include <fftw3.h>

#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace lpvm {

class PeriodicSpectrum {
public:
    PeriodicSpectrum(int n, double L) : n_(n), L_(L) {
        if (n < 2) throw std::invalid_argument("PeriodicSpectrum: need at least 2 nodes");
        real_ = fftw_alloc_real(n_);
        modes_ = fftw_alloc_complex(n_ / 2 + 1);
        forward_ = fftw_plan_dft_r2c_1d(n_, real_, modes_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_1d(n_, modes_, real_, FFTW_ESTIMATE);
    }
    PeriodicSpectrum(const PeriodicSpectrum&) = delete;
    PeriodicSpectrum& operator=(const PeriodicSpectrum&) = delete;
    ~PeriodicSpectrum() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(real_);
        fftw_free(modes_);
    }

    double wavenumber(int k) const { return 2.0 * std::numbers::pi * k / L_; }

    std::vector<double> derivative(std::span<const double> f) {
        return apply(f, [&](int k) { return std::complex<double>(0.0, wavenumber(k)); });
    }

    std::vector<double> second_derivative(std::span<const double> f) {
        return apply(f, [&](int k) {
            const double w = wavenumber(k);
            return std::complex<double>(-w * w, 0.0);
        });
    }

    /// Zero-mean u with u'' = rhs (the mean of rhs is ignored).
    std::vector<double> inverse_laplacian(std::span<const double> rhs) {
        return apply(rhs, [&](int k) {
            if (k == 0) return std::complex<double>(0.0, 0.0);
            const double w = wavenumber(k);
            return std::complex<double>(-1.0 / (w * w), 0.0);
        });
    }

private:
    std::vector<double> apply(std::span<const double> f,
                              const std::function<std::complex<double>(int)>& symbol) {
        if (static_cast<int>(f.size()) != n_)
            throw std::invalid_argument("PeriodicSpectrum: size mismatch");
        for (int j = 0; j < n_; ++j) real_[j] = f[j];
        fftw_execute(forward_);
        const int kmax = n_ / 2;
        for (int k = 0; k <= kmax; ++k) {
            std::complex<double> m(modes_[k][0], modes_[k][1]);
            m = (n_ % 2 == 0 && k == kmax) ? std::complex<double>(0.0, 0.0) : m * symbol(k);
            modes_[k][0] = m.real() / n_;
            modes_[k][1] = m.imag() / n_;
        }
        fftw_execute(backward_);
        return std::vector<double>(real_, real_ + n_);
    }

    int n_;
    double L_;
    double* real_ = nullptr;
    fftw_complex* modes_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

inline std::vector<double> spectral_derivative(std::span<const double> f, double L) {
    PeriodicSpectrum s(static_cast<int>(f.size()), L);
    return s.derivative(f);
}

inline std::vector<double> spectral_second_derivative(std::span<const double> f, double L) {
    PeriodicSpectrum s(static_cast<int>(f.size()), L);
    return s.second_derivative(f);
}

}  // namespace lpvm
