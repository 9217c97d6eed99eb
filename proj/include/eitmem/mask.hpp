// Image masks: loading an 8-bit graymap onto a field grid as an intensity
// transmittance, and procedural digit glyphs used as the shipped default
// test patterns.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "eitmem/grid.hpp"
#include "eitmem/pgm.hpp"

namespace eitmem {

/// Imprint a grayscale mask on a flat-phase field. The gray value is an
/// intensity transmittance (amplitude goes as sqrt(gray/255)); the result is
/// rescaled so its energy equals total_photons. Resampling onto the grid is
/// bilinear; a mask raster matching the grid dimensions maps sample-for-sample.
inline ComplexFieldGrid load_mask(const Raster8& mask, const TransverseGrid& grid,
                                  double total_photons, double wavelength = 795e-9)
{
    if (mask.width <= 0 || mask.height <= 0 || mask.pixels.empty())
        throw std::invalid_argument("load_mask: empty mask image");
    if (total_photons < 0.0)
        throw std::invalid_argument("load_mask: total_photons must be nonnegative");
    grid.validate();

    ComplexFieldGrid field(grid, wavelength);
    double sum = 0.0;
    for (int j = 0; j < grid.ny; ++j) {
        // pixel-center mapping: grid sample k of n covers mask coordinate
        // (k+0.5)/n * size - 0.5
        const double v = (j + 0.5) / grid.ny * mask.height - 0.5;
        const double vc = std::min(std::max(v, 0.0), static_cast<double>(mask.height - 1));
        const int v0 = static_cast<int>(std::floor(vc));
        const int v1 = std::min(v0 + 1, mask.height - 1);
        const double fv = vc - v0;
        for (int i = 0; i < grid.nx; ++i) {
            const double u = (i + 0.5) / grid.nx * mask.width - 0.5;
            const double uc = std::min(std::max(u, 0.0), static_cast<double>(mask.width - 1));
            const int u0 = static_cast<int>(std::floor(uc));
            const int u1 = std::min(u0 + 1, mask.width - 1);
            const double fu = uc - u0;
            const double gray = (1.0 - fv) * ((1.0 - fu) * mask.at(u0, v0) + fu * mask.at(u1, v0))
                              + fv * ((1.0 - fu) * mask.at(u0, v1) + fu * mask.at(u1, v1));
            const double amp = std::sqrt(gray / 255.0);
            field.at(i, j) = complexd(amp, 0.0);
            sum += amp * amp;
        }
    }

    if (total_photons == 0.0) {
        for (auto& a : field.amplitude)
            a = complexd(0.0, 0.0);
        return field;
    }
    if (sum <= 0.0)
        throw std::invalid_argument("load_mask: all-black mask cannot carry photons");
    const double scale = std::sqrt(total_photons / sum);
    for (auto& a : field.amplitude)
        a *= scale;
    return field;
}

namespace glyph_detail {

// 5x7 dot-matrix digits, one row per byte, MSB-side 5 bits used.
inline const std::array<std::array<std::uint8_t, 7>, 10>& digit_font()
{
    static const std::array<std::array<std::uint8_t, 7>, 10> font = {{
        {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110}, // 0
        {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}, // 1
        {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111}, // 2
        {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110}, // 3
        {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010}, // 4
        {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110}, // 5
        {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110}, // 6
        {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000}, // 7
        {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110}, // 8
        {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100}, // 9
    }};
    return font;
}

} // namespace glyph_detail

/// Render a digit glyph as an 8-bit raster covering `extent` meters per side,
/// with the glyph `glyph_height` meters tall, centered. Binary 0/255 pixels.
inline Raster8 render_digit_glyph(int digit, int nx, int ny, double extent_x, double extent_y,
                                  double glyph_height)
{
    if (digit < 0 || digit > 9)
        throw std::invalid_argument("render_digit_glyph: digit must be 0..9");
    if (!(glyph_height > 0.0))
        throw std::invalid_argument("render_digit_glyph: glyph height must be positive");
    const auto& rows = glyph_detail::digit_font()[static_cast<std::size_t>(digit)];
    const double glyph_width = glyph_height * 5.0 / 7.0;

    Raster8 raster;
    raster.width = nx;
    raster.height = ny;
    raster.pixels.assign(static_cast<std::size_t>(nx) * ny, 0);
    for (int j = 0; j < ny; ++j) {
        const double y = (j + 0.5) / ny * extent_y - extent_y / 2.0;
        for (int i = 0; i < nx; ++i) {
            const double x = (i + 0.5) / nx * extent_x - extent_x / 2.0;
            const double gx = (x + glyph_width / 2.0) / glyph_width;
            const double gy = (y + glyph_height / 2.0) / glyph_height;
            if (gx < 0.0 || gx >= 1.0 || gy < 0.0 || gy >= 1.0)
                continue;
            const int col = std::min(static_cast<int>(gx * 5.0), 4);
            const int row = std::min(static_cast<int>(gy * 7.0), 6);
            if (rows[static_cast<std::size_t>(row)] & (1u << (4 - col)))
                raster.at(i, j) = 255;
        }
    }
    return raster;
}

/// Mask source: either "glyph:<digit>" or a path to an 8-bit PGM file.
inline Raster8 resolve_mask(const std::string& spec, int nx, int ny, double extent_x,
                            double extent_y, double glyph_height)
{
    if (spec.rfind("glyph:", 0) == 0) {
        const std::string digits = spec.substr(6);
        if (digits.size() != 1 || digits[0] < '0' || digits[0] > '9')
            throw std::invalid_argument("mask spec '" + spec + "': expected glyph:<single digit>");
        return render_digit_glyph(digits[0] - '0', nx, ny, extent_x, extent_y, glyph_height);
    }
    return read_pgm8(spec);
}

} // namespace eitmem
