// Transverse sampling grid and complex optical field amplitudes.
//
// Convention: amplitudes are in sqrt-photons per sample, so the summed
// squared modulus of a field is its expected photon number. Beam tilts are
// carried as a transverse wavevector offset next to the sampled envelope
// instead of as a phase ramp on the grid (the ramps for the probe angles
// used here would alias at any practical pitch).
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace eitmem {

using complexd = std::complex<double>;

/// Uniformly sampled transverse plane. Pitches are in meters.
struct TransverseGrid {
    int nx = 0;
    int ny = 0;
    double dx = 0.0;
    double dy = 0.0;

    TransverseGrid() = default;
    TransverseGrid(int nx_, int ny_, double dx_, double dy_)
        : nx(nx_), ny(ny_), dx(dx_), dy(dy_)
    {
        validate();
    }

    /// Square grid spanning `extent` meters per side.
    static TransverseGrid square(int n, double extent)
    {
        if (n < 2)
            throw std::invalid_argument("TransverseGrid: need at least 2 samples per axis");
        return TransverseGrid(n, n, extent / n, extent / n);
    }

    void validate() const
    {
        if (nx < 2 || ny < 2)
            throw std::invalid_argument("TransverseGrid: need at least 2 samples per axis");
        if (!(dx > 0.0) || !(dy > 0.0))
            throw std::invalid_argument("TransverseGrid: sample pitch must be positive");
        if (!std::isfinite(static_cast<double>(nx) * dx) || !std::isfinite(static_cast<double>(ny) * dy))
            throw std::invalid_argument("TransverseGrid: physical extent must be finite");
    }

    std::size_t samples() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    double width() const { return nx * dx; }
    double height() const { return ny * dy; }

    /// Physical x coordinate of column i, centered on the grid.
    double x(int i) const { return (i - nx / 2) * dx; }
    /// Physical y coordinate of row j, centered on the grid.
    double y(int j) const { return (j - ny / 2) * dy; }

    bool operator==(const TransverseGrid& o) const
    {
        return nx == o.nx && ny == o.ny && dx == o.dx && dy == o.dy;
    }
};

/// Complex field envelope sampled on a TransverseGrid.
///
/// `tilt_x`/`tilt_y` hold the transverse wavevector (rad/m) of the carrier
/// that has been factored out of the envelope; `aliasing_warning` is set by
/// operations whose output spills into the edge of the representable window.
struct ComplexFieldGrid {
    TransverseGrid grid;
    std::vector<complexd> amplitude;
    double wavelength = 795e-9;
    double tilt_x = 0.0;
    double tilt_y = 0.0;
    bool aliasing_warning = false;

    ComplexFieldGrid() = default;
    ComplexFieldGrid(const TransverseGrid& g, double lambda)
        : grid(g), amplitude(g.samples(), complexd(0.0, 0.0)), wavelength(lambda)
    {
        if (!(wavelength > 0.0))
            throw std::invalid_argument("ComplexFieldGrid: wavelength must be positive");
    }

    complexd& at(int ix, int iy) { return amplitude[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    const complexd& at(int ix, int iy) const
    {
        return amplitude[static_cast<std::size_t>(iy) * grid.nx + ix];
    }

    void check_finite() const
    {
        for (const auto& a : amplitude)
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
                throw std::runtime_error("ComplexFieldGrid: non-finite amplitude");
    }
};

/// Expected photon number of a field: sum of |amplitude|^2 over samples.
inline double energy(const ComplexFieldGrid& field)
{
    double sum = 0.0;
    for (const auto& a : field.amplitude)
        sum += std::norm(a);
    return sum;
}

/// a*F + b*G on matching grids.
inline ComplexFieldGrid linear_combination(complexd a, const ComplexFieldGrid& f,
                                           complexd b, const ComplexFieldGrid& g)
{
    if (!(f.grid == g.grid))
        throw std::invalid_argument("linear_combination: grid mismatch");
    ComplexFieldGrid out = f;
    for (std::size_t i = 0; i < out.amplitude.size(); ++i)
        out.amplitude[i] = a * f.amplitude[i] + b * g.amplitude[i];
    return out;
}

inline ComplexFieldGrid scaled(const ComplexFieldGrid& f, complexd c)
{
    ComplexFieldGrid out = f;
    for (auto& a : out.amplitude)
        a *= c;
    return out;
}

/// Per-sample expected photon map |amplitude|^2.
inline std::vector<double> intensity_map(const ComplexFieldGrid& f)
{
    std::vector<double> out(f.amplitude.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::norm(f.amplitude[i]);
    return out;
}

} // namespace eitmem
