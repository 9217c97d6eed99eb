// Self-contained complex FFT used by the propagation kernels: iterative
// radix-2 for power-of-two lengths, Bluestein's chirp-z algorithm for
// everything else. Forward transform is unscaled, inverse divides by N.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "eitmem/grid.hpp"

namespace eitmem {

namespace fft_detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n)
{
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

// In-place iterative Cooley-Tukey, n a power of two.
inline void fft_pow2(complexd* data, std::size_t n, bool inverse)
{
    // bit reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(data[i], data[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const complexd wstep(std::cos(angle), std::sin(angle));
        for (std::size_t start = 0; start < n; start += len) {
            complexd w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const complexd even = data[start + k];
                const complexd odd = data[start + k + len / 2] * w;
                data[start + k] = even + odd;
                data[start + k + len / 2] = even - odd;
                w *= wstep;
            }
        }
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            data[i] *= scale;
    }
}

// Bluestein chirp-z transform for arbitrary n, expressed through a
// power-of-two cyclic convolution.
inline void fft_bluestein(complexd* data, std::size_t n, bool inverse)
{
    const double sign = inverse ? 1.0 : -1.0;
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<complexd> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the chirp argument small for large k
        const std::size_t k2 = (k * k) % (2 * n);
        const double angle = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = complexd(std::cos(angle), std::sin(angle));
    }
    std::vector<complexd> a(m, complexd(0.0, 0.0));
    std::vector<complexd> b(m, complexd(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k)
        a[k] = data[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k)
        b[k] = b[m - k] = std::conj(chirp[k]);
    fft_pow2(a.data(), m, false);
    fft_pow2(b.data(), m, false);
    for (std::size_t k = 0; k < m; ++k)
        a[k] *= b[k];
    fft_pow2(a.data(), m, true);
    for (std::size_t k = 0; k < n; ++k)
        data[k] = a[k] * chirp[k];
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k)
            data[k] *= scale;
    }
}

} // namespace fft_detail

/// In-place 1D FFT of arbitrary length.
inline void fft(complexd* data, std::size_t n, bool inverse)
{
    if (n == 0)
        throw std::invalid_argument("fft: empty input");
    if (n == 1)
        return;
    if (fft_detail::is_pow2(n))
        fft_detail::fft_pow2(data, n, inverse);
    else
        fft_detail::fft_bluestein(data, n, inverse);
}

/// In-place 2D FFT over a row-major nx-by-ny buffer.
inline void fft2(complexd* data, int nx, int ny, bool inverse)
{
    for (int row = 0; row < ny; ++row)
        fft(data + static_cast<std::size_t>(row) * nx, static_cast<std::size_t>(nx), inverse);
    std::vector<complexd> column(static_cast<std::size_t>(ny));
    for (int col = 0; col < nx; ++col) {
        for (int row = 0; row < ny; ++row)
            column[static_cast<std::size_t>(row)] = data[static_cast<std::size_t>(row) * nx + col];
        fft(column.data(), static_cast<std::size_t>(ny), inverse);
        for (int row = 0; row < ny; ++row)
            data[static_cast<std::size_t>(row) * nx + col] = column[static_cast<std::size_t>(row)];
    }
}

/// Spatial frequency (cycles/m) of FFT bin i for n samples of pitch d.
inline double fft_frequency(int i, int n, double d)
{
    const int half = (n + 1) / 2;
    const int idx = (i < half) ? i : i - n;
    return static_cast<double>(idx) / (static_cast<double>(n) * d);
}

} // namespace eitmem
