// Fourier-optics propagation kernels: free-space angular spectrum, the
// focal-plane-to-focal-plane lens transform, and band-limited transverse
// shifts. All of them conserve the photon-number normalization of
// ComplexFieldGrid (unitary transforms; evanescent content is discarded).
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "eitmem/fft.hpp"
#include "eitmem/grid.hpp"

namespace eitmem {

/// Two-lens 4-f relay geometry. Spacings default to the focal lengths and
/// must satisfy the 4-f condition.
struct OpticalLayout {
    double f1 = 0.300;
    double f2 = 0.500;
    double d_mask_lens1 = 0.300;
    double d_lens1_cloud = 0.300;
    double d_cloud_lens2 = 0.500;
    double d_lens2_camera = 0.500;

    static OpticalLayout four_f(double focal1, double focal2)
    {
        OpticalLayout layout;
        layout.f1 = focal1;
        layout.f2 = focal2;
        layout.d_mask_lens1 = layout.d_lens1_cloud = focal1;
        layout.d_cloud_lens2 = layout.d_lens2_camera = focal2;
        layout.validate();
        return layout;
    }

    void validate() const
    {
        if (!(f1 > 0.0) || !(f2 > 0.0))
            throw std::invalid_argument("OpticalLayout: focal lengths must be positive");
        auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); };
        if (!close(d_mask_lens1, f1) || !close(d_lens1_cloud, f1)
            || !close(d_cloud_lens2, f2) || !close(d_lens2_camera, f2))
            throw std::invalid_argument("OpticalLayout: plane spacings violate the 4-f condition");
    }

    double magnification() const { return f2 / f1; }
};

namespace prop_detail {

// Unitary DFT with both index origins at the grid center (sample n/2).
// Exact integer phase bookkeeping keeps the transform reproducible for
// non-power-of-two sizes as well.
inline void centered_fft2_unitary(std::vector<complexd>& data, int nx, int ny, bool inverse)
{
    const double two_pi = 2.0 * std::numbers::pi;
    const long cx = nx / 2;
    const long cy = ny / 2;
    const double sign = inverse ? 1.0 : -1.0;

    auto axis_phases = [&](int n, long c) {
        std::vector<complexd> w(static_cast<std::size_t>(n));
        for (long j = 0; j < n; ++j) {
            const long m = (j * c) % n;
            const double angle = -sign * two_pi * static_cast<double>(m) / static_cast<double>(n);
            w[static_cast<std::size_t>(j)] = complexd(std::cos(angle), std::sin(angle));
        }
        return w;
    };
    const std::vector<complexd> wx = axis_phases(nx, cx);
    const std::vector<complexd> wy = axis_phases(ny, cy);

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            data[static_cast<std::size_t>(j) * nx + i] *= wx[static_cast<std::size_t>(i)] * wy[static_cast<std::size_t>(j)];

    fft2(data.data(), nx, ny, inverse);
    if (inverse) {
        // undo fft2's 1/N so the scaling below makes the transform unitary
        const double n_total = static_cast<double>(nx) * static_cast<double>(ny);
        for (auto& v : data)
            v *= n_total;
    }

    const double gx = -sign * two_pi * static_cast<double>((cx * cx) % nx) / static_cast<double>(nx);
    const double gy = -sign * two_pi * static_cast<double>((cy * cy) % ny) / static_cast<double>(ny);
    const complexd global = complexd(std::cos(gx), std::sin(gx)) * complexd(std::cos(gy), std::sin(gy));
    const double scale = 1.0 / std::sqrt(static_cast<double>(nx) * static_cast<double>(ny));

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            data[static_cast<std::size_t>(j) * nx + i] *=
                global * wx[static_cast<std::size_t>(i)] * wy[static_cast<std::size_t>(j)] * scale;
}

} // namespace prop_detail

/// Advance a field by `distance` through free space with the angular-spectrum
/// transfer function. Evanescent components are hard-zeroed; the propagating
/// band is phase-only, so its energy is conserved. The common carrier phase
/// exp(i k d) is dropped (envelope convention).
inline ComplexFieldGrid propagate_angular_spectrum(const ComplexFieldGrid& field, double distance)
{
    if (!std::isfinite(distance))
        throw std::invalid_argument("propagate_angular_spectrum: distance must be finite");
    const int nx = field.grid.nx;
    const int ny = field.grid.ny;
    const double k = 2.0 * std::numbers::pi / field.wavelength;

    ComplexFieldGrid out = field;
    fft2(out.amplitude.data(), nx, ny, false);
    for (int j = 0; j < ny; ++j) {
        const double ky = 2.0 * std::numbers::pi * fft_frequency(j, ny, field.grid.dy);
        for (int i = 0; i < nx; ++i) {
            const double kx = 2.0 * std::numbers::pi * fft_frequency(i, nx, field.grid.dx);
            const double kt2 = kx * kx + ky * ky;
            complexd& v = out.amplitude[static_cast<std::size_t>(j) * nx + i];
            if (kt2 >= k * k) {
                v = complexd(0.0, 0.0);
                continue;
            }
            const double kz = std::sqrt(k * k - kt2);
            const double phase = distance * (kz - k);
            v *= complexd(std::cos(phase), std::sin(phase));
        }
    }
    fft2(out.amplitude.data(), nx, ny, true);
    return out;
}

/// Focal-plane-to-focal-plane thin-lens transform: a unitary scaled Fourier
/// transform. The output grid pitch is lambda*f/(n*dx) per axis. Sets
/// aliasing_warning when a non-negligible energy fraction lands in the
/// outermost two samples of the output window (content at the edge of the
/// representable band). Tilt metadata passes through untouched; callers
/// realize tilts as shifts where physically meaningful (see shift_field).
inline ComplexFieldGrid lens_transform(const ComplexFieldGrid& field, double focal_length)
{
    if (!(focal_length > 0.0))
        throw std::invalid_argument("lens_transform: focal length must be positive");
    const int nx = field.grid.nx;
    const int ny = field.grid.ny;

    ComplexFieldGrid out = field;
    out.grid.dx = field.wavelength * focal_length / (nx * field.grid.dx);
    out.grid.dy = field.wavelength * focal_length / (ny * field.grid.dy);
    prop_detail::centered_fft2_unitary(out.amplitude, nx, ny, false);

    const double total = energy(out);
    if (total > 0.0) {
        double rim = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                if (i < 2 || i >= nx - 2 || j < 2 || j >= ny - 2)
                    rim += std::norm(out.at(i, j));
        if (rim > 1e-6 * total)
            out.aliasing_warning = true;
    }
    return out;
}

/// Circular shift by whole samples. Exact (no interpolation, no ringing);
/// the camera compositor uses this to realize beam-tilt offsets.
inline ComplexFieldGrid shift_field_samples(const ComplexFieldGrid& field, int sx, int sy)
{
    const int nx = field.grid.nx;
    const int ny = field.grid.ny;
    ComplexFieldGrid out = field;
    if (sx == 0 && sy == 0)
        return out;
    for (int j = 0; j < ny; ++j) {
        const int src_j = ((j - sy) % ny + ny) % ny;
        for (int i = 0; i < nx; ++i) {
            const int src_i = ((i - sx) % nx + nx) % nx;
            out.amplitude[static_cast<std::size_t>(j) * nx + i] =
                field.amplitude[static_cast<std::size_t>(src_j) * nx + src_i];
        }
    }
    return out;
}

/// Band-limited circular shift by (delta_x, delta_y) meters.
inline ComplexFieldGrid shift_field(const ComplexFieldGrid& field, double delta_x, double delta_y)
{
    if (delta_x == 0.0 && delta_y == 0.0)
        return field;
    const int nx = field.grid.nx;
    const int ny = field.grid.ny;
    ComplexFieldGrid out = field;
    fft2(out.amplitude.data(), nx, ny, false);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int j = 0; j < ny; ++j) {
        const double fy = fft_frequency(j, ny, field.grid.dy);
        for (int i = 0; i < nx; ++i) {
            const double fx = fft_frequency(i, nx, field.grid.dx);
            const double phase = -two_pi * (fx * delta_x + fy * delta_y);
            out.amplitude[static_cast<std::size_t>(j) * nx + i] *= complexd(std::cos(phase), std::sin(phase));
        }
    }
    fft2(out.amplitude.data(), nx, ny, true);
    return out;
}

/// Gaussian beam with 1/e^2 intensity radius `waist`, normalized to
/// `photons` expected photons.
inline ComplexFieldGrid gaussian_beam(const TransverseGrid& grid, double waist, double wavelength,
                                      double photons)
{
    if (!(waist > 0.0))
        throw std::invalid_argument("gaussian_beam: waist must be positive");
    ComplexFieldGrid field(grid, wavelength);
    double sum = 0.0;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double r2 = grid.x(i) * grid.x(i) + grid.y(j) * grid.y(j);
            const double a = std::exp(-r2 / (waist * waist));
            field.at(i, j) = complexd(a, 0.0);
            sum += a * a;
        }
    }
    if (sum > 0.0 && photons > 0.0) {
        const double scale = std::sqrt(photons / sum);
        for (auto& a : field.amplitude)
            a *= scale;
    } else {
        for (auto& a : field.amplitude)
            a = complexd(0.0, 0.0);
    }
    return field;
}

} // namespace eitmem
