// Real-valued images (accumulated counts, subtracted images) shared between
// detection and analysis.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "eitmem/pgm.hpp"

namespace eitmem {

struct RealImage {
    int width = 0;
    int height = 0;
    std::vector<double> values; // row-major

    RealImage() = default;
    RealImage(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0) {}

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }

    double total() const
    {
        double sum = 0.0;
        for (double v : values)
            sum += v;
        return sum;
    }
};

/// Axis-aligned pixel region [x0, x1) x [y0, y1).
struct PixelRegion {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
};

inline RealImage crop(const RealImage& image, const PixelRegion& region)
{
    if (region.x0 < 0 || region.y0 < 0 || region.x1 > image.width || region.y1 > image.height
        || region.width() <= 0 || region.height() <= 0)
        throw std::invalid_argument("crop: region outside image");
    RealImage out(region.width(), region.height());
    for (int y = region.y0; y < region.y1; ++y)
        for (int x = region.x0; x < region.x1; ++x)
            out.at(x - region.x0, y - region.y0) = image.at(x, y);
    return out;
}

inline double region_sum(const RealImage& image, const PixelRegion& region)
{
    double sum = 0.0;
    for (int y = region.y0; y < region.y1; ++y)
        for (int x = region.x0; x < region.x1; ++x)
            sum += image.at(x, y);
    return sum;
}

inline RealImage clamped_nonnegative(const RealImage& image)
{
    RealImage out = image;
    for (double& v : out.values)
        v = std::max(0.0, v);
    return out;
}

/// Export to a 16-bit graymap. If scale_to_full_range, the maximum maps to
/// 65535 (scale factor reported back through *scale_out); otherwise values
/// are rounded and clamped as-is.
inline Raster16 to_raster16(const RealImage& image, bool scale_to_full_range, double* scale_out = nullptr)
{
    Raster16 raster;
    raster.width = image.width;
    raster.height = image.height;
    raster.pixels.resize(image.values.size());
    double scale = 1.0;
    if (scale_to_full_range) {
        double peak = 0.0;
        for (double v : image.values)
            peak = std::max(peak, v);
        scale = peak > 0.0 ? 65535.0 / peak : 1.0;
    }
    if (scale_out)
        *scale_out = scale;
    for (std::size_t i = 0; i < image.values.size(); ++i) {
        const double v = std::round(std::max(0.0, image.values[i]) * scale);
        raster.pixels[i] = static_cast<std::uint16_t>(std::min(v, 65535.0));
    }
    return raster;
}

} // namespace eitmem
