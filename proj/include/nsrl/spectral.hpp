#pragma once

#include "nsrl/field.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nsrl {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

// Real-to-half-complex 3D FFT on a Grid, backed by FFTW with FFTW_ESTIMATE plans.
// Half-spectrum layout is [kz][ky][kx] with kx in [0, n/2]. forward() is unnormalised;
// inverse() divides by n^3 so inverse(forward(f)) == f.
class SpectralTransform {
public:
    explicit SpectralTransform(const Grid& grid);
    ~SpectralTransform();
    SpectralTransform(const SpectralTransform&) = delete;
    SpectralTransform& operator=(const SpectralTransform&) = delete;

    const Grid& grid() const noexcept { return grid_; }
    std::size_t spectrum_size() const noexcept { return spectrum_size_; }

    Spectrum forward(std::span<const double> values) const;
    std::vector<double> inverse(std::span<const Complex> spectrum) const;

private:
    Grid grid_;
    std::size_t spectrum_size_;
    double* real_buf_;
    void* complex_buf_;
    void* forward_plan_;
    void* inverse_plan_;
};

// Integer mode index along an axis of length n for storage index m (m <= n/2 maps to m,
// otherwise m - n). The Nyquist mode n/2 is reported positive.
inline int mode_index(int m, int n) noexcept { return m <= n / 2 ? m : m - n; }

// Visits every half-spectrum entry with its linear index and integer mode triple.
template <class Fn>
void for_each_mode(const Grid& grid, Fn&& fn)
{
    const int n = grid.n();
    const int nh = n / 2 + 1;
    std::size_t idx = 0;
    for (int kz = 0; kz < n; ++kz) {
        const int mz = mode_index(kz, n);
        for (int ky = 0; ky < n; ++ky) {
            const int my = mode_index(ky, n);
            for (int kx = 0; kx < nh; ++kx, ++idx) fn(idx, kx, my, mz);
        }
    }
}

// 2/3-rule mask: keep a mode iff 3|m| < n on every axis.
bool dealias_keep(int mx, int my, int mz, int n) noexcept;

} // namespace nsrl
