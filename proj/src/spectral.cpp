#include "nsrl/spectral.hpp"

#include "nsrl/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstdlib>
#include <mutex>

namespace nsrl {

namespace {

// The FFTW planner is not thread-safe; execution with fftw_execute_dft_* is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace

SpectralTransform::SpectralTransform(const Grid& grid)
    : grid_(grid), spectrum_size_(static_cast<std::size_t>(grid.n()) * grid.n() * (grid.n() / 2 + 1))
{
    const int n = grid.n();
    std::lock_guard lock(planner_mutex());
    real_buf_ = fftw_alloc_real(grid.size());
    auto* cbuf = fftw_alloc_complex(spectrum_size_);
    complex_buf_ = cbuf;
    if (real_buf_ == nullptr || cbuf == nullptr) throw std::bad_alloc();
    forward_plan_ = fftw_plan_dft_r2c_3d(n, n, n, real_buf_, cbuf, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_3d(n, n, n, cbuf, real_buf_, FFTW_ESTIMATE);
    if (forward_plan_ == nullptr || inverse_plan_ == nullptr) throw Error("fftw: planning failed");
}

SpectralTransform::~SpectralTransform()
{
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
    fftw_free(real_buf_);
    fftw_free(complex_buf_);
}

Spectrum SpectralTransform::forward(std::span<const double> values) const
{
    if (values.size() != grid_.size()) throw DomainError("fft: input size does not match grid");
    auto* cbuf = static_cast<fftw_complex*>(complex_buf_);
    std::copy(values.begin(), values.end(), real_buf_);
    fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), real_buf_, cbuf);
    Spectrum out(spectrum_size_);
    for (std::size_t i = 0; i < spectrum_size_; ++i) out[i] = Complex(cbuf[i][0], cbuf[i][1]);
    return out;
}

std::vector<double> SpectralTransform::inverse(std::span<const Complex> spectrum) const
{
    if (spectrum.size() != spectrum_size_) throw DomainError("fft: spectrum size does not match grid");
    auto* cbuf = static_cast<fftw_complex*>(complex_buf_);
    for (std::size_t i = 0; i < spectrum_size_; ++i) {
        cbuf[i][0] = spectrum[i].real();
        cbuf[i][1] = spectrum[i].imag();
    }
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), cbuf, real_buf_);
    const double scale = 1.0 / static_cast<double>(grid_.size());
    std::vector<double> out(grid_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = real_buf_[i] * scale;
    return out;
}

bool dealias_keep(int mx, int my, int mz, int n) noexcept
{
    return 3 * std::abs(mx) < n && 3 * std::abs(my) < n && 3 * std::abs(mz) < n;
}

} // namespace nsrl
