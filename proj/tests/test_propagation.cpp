#include <doctest.h>

#include <cmath>
#include <complex>

#include "eitmem/propagation.hpp"
#include "eitmem/rng.hpp"

using namespace eitmem;

namespace {

ComplexFieldGrid random_bandlimited_field(const TransverseGrid& grid, std::uint64_t seed)
{
    // a handful of low-order Gaussians: smooth, well inside the band limit
    ComplexFieldGrid field(grid, 795e-9);
    Rng rng(seed);
    for (int blob = 0; blob < 4; ++blob) {
        const double x0 = rng.uniform(-0.2, 0.2) * grid.width();
        const double y0 = rng.uniform(-0.2, 0.2) * grid.height();
        const double w = grid.width() * rng.uniform(0.05, 0.15);
        const complexd amp(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                const double dx = grid.x(i) - x0;
                const double dy = grid.y(j) - y0;
                field.at(i, j) += amp * std::exp(-(dx * dx + dy * dy) / (w * w));
            }
    }
    return field;
}

double fitted_waist(const ComplexFieldGrid& field)
{
    // 1/e^2 intensity radius from the second moment of |a|^2 along x
    double sum = 0.0, sum_x2 = 0.0;
    for (int j = 0; j < field.grid.ny; ++j)
        for (int i = 0; i < field.grid.nx; ++i) {
            const double w = std::norm(field.at(i, j));
            sum += w;
            sum_x2 += w * field.grid.x(i) * field.grid.x(i);
        }
    return 2.0 * std::sqrt(sum_x2 / sum);
}

double max_relative_difference(const ComplexFieldGrid& a, const ComplexFieldGrid& b)
{
    double peak = 0.0;
    for (const auto& v : a.amplitude)
        peak = std::max(peak, std::abs(v));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.amplitude.size(); ++i)
        worst = std::max(worst, std::abs(a.amplitude[i] - b.amplitude[i]) / peak);
    return worst;
}

} // namespace

TEST_SUITE("propagation")
{
    TEST_CASE("zero distance is the identity for band-limited fields")
    {
        const auto field = random_bandlimited_field(TransverseGrid::square(64, 6.4e-3), 11);
        const auto out = propagate_angular_spectrum(field, 0.0);
        CHECK(max_relative_difference(field, out) < 1e-12);
    }

    TEST_CASE("angular spectrum conserves energy")
    {
        const auto field = random_bandlimited_field(TransverseGrid::square(64, 6.4e-3), 23);
        const auto out = propagate_angular_spectrum(field, 0.137);
        CHECK(energy(out) == doctest::Approx(energy(field)).epsilon(1e-10));
    }

    TEST_CASE("forward then backward propagation is the identity")
    {
        const auto field = random_bandlimited_field(TransverseGrid::square(64, 6.4e-3), 29);
        const auto out = propagate_angular_spectrum(propagate_angular_spectrum(field, 0.035), -0.035);
        CHECK(max_relative_difference(field, out) < 1e-9);
        CHECK(energy(out) == doctest::Approx(energy(field)).epsilon(1e-9));
    }

    TEST_CASE("gaussian beam spreads by the analytic waist law")
    {
        // oracle: w(z) = w0 sqrt(1 + (z/zR)^2), zR = pi w0^2 / lambda
        const double w0 = 300e-6;
        const double lambda = 795e-9;
        const double z = 0.3;
        const TransverseGrid grid = TransverseGrid::square(256, 6.4e-3);
        const auto beam = gaussian_beam(grid, w0, lambda, 1.0);
        CHECK(fitted_waist(beam) == doctest::Approx(w0).epsilon(0.005));
        const auto out = propagate_angular_spectrum(beam, z);
        const double zr = std::numbers::pi * w0 * w0 / lambda;
        const double expected = w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
        CHECK(fitted_waist(out) == doctest::Approx(expected).epsilon(0.01));
    }

    TEST_CASE("lens transform satisfies Parseval")
    {
        const auto field = random_bandlimited_field(TransverseGrid::square(64, 6.4e-3), 31);
        const auto out = lens_transform(field, 0.3);
        CHECK(energy(out) == doctest::Approx(energy(field)).epsilon(1e-10));
    }

    TEST_CASE("lens transform rescales the grid pitch to lambda f / (n dx)")
    {
        const TransverseGrid grid = TransverseGrid::square(64, 6.4e-3);
        const ComplexFieldGrid field(grid, 795e-9);
        const auto out = lens_transform(field, 0.3);
        CHECK(out.grid.dx == doctest::Approx(795e-9 * 0.3 / (64 * grid.dx)).epsilon(1e-12));
    }

    TEST_CASE("centered point source maps to a flat magnitude")
    {
        const TransverseGrid grid = TransverseGrid::square(32, 3.2e-3);
        ComplexFieldGrid field(grid, 795e-9);
        field.at(16, 16) = complexd(1.0, 0.0);
        const auto out = lens_transform(field, 0.3);
        const double expected = 1.0 / 32.0;
        for (const auto& a : out.amplitude)
            CHECK(std::abs(a) == doctest::Approx(expected).epsilon(1e-9));
        CHECK(out.aliasing_warning); // a delta fills the whole output window
    }

    TEST_CASE("4f relay flips the image and magnifies by f2/f1")
    {
        const TransverseGrid grid = TransverseGrid::square(64, 6.4e-3);
        auto field = random_bandlimited_field(grid, 37);
        const auto relayed = lens_transform(lens_transform(field, 0.3), 0.5);
        CHECK(relayed.grid.dx == doctest::Approx(grid.dx * 5.0 / 3.0).epsilon(1e-12));
        // sample-for-sample flip about the center
        double worst = 0.0;
        double peak = 0.0;
        for (const auto& v : field.amplitude)
            peak = std::max(peak, std::abs(v));
        for (int j = 0; j < 64; ++j)
            for (int i = 0; i < 64; ++i) {
                const int fi = (64 - i) % 64;
                const int fj = (64 - j) % 64;
                worst = std::max(worst, std::abs(relayed.at(i, j) - field.at(fi, fj)) / peak);
            }
        CHECK(worst < 1e-9);
    }

    TEST_CASE("operations are linear")
    {
        const TransverseGrid grid = TransverseGrid::square(32, 3.2e-3);
        const auto f = random_bandlimited_field(grid, 41);
        const auto g = random_bandlimited_field(grid, 43);
        const complexd a(0.7, -0.1), b(-0.4, 1.3);
        const auto combined = linear_combination(a, f, b, g);

        const auto lhs_prop = propagate_angular_spectrum(combined, 0.05);
        const auto rhs_prop = linear_combination(a, propagate_angular_spectrum(f, 0.05), b,
                                                 propagate_angular_spectrum(g, 0.05));
        CHECK(max_relative_difference(lhs_prop, rhs_prop) < 1e-11);

        const auto lhs_lens = lens_transform(combined, 0.3);
        const auto rhs_lens = linear_combination(a, lens_transform(f, 0.3), b, lens_transform(g, 0.3));
        CHECK(max_relative_difference(lhs_lens, rhs_lens) < 1e-11);
    }

    TEST_CASE("shift_field moves a blob by the requested offset")
    {
        const TransverseGrid grid = TransverseGrid::square(64, 6.4e-3);
        const auto beam = gaussian_beam(grid, 400e-6, 795e-9, 1.0);
        const auto moved = shift_field(beam, 5.0 * grid.dx, -3.0 * grid.dy);
        double worst = 0.0;
        for (int j = 4; j < 60; ++j)
            for (int i = 6; i < 58; ++i)
                worst = std::max(worst, std::abs(moved.at(i, j) - beam.at(i - 5, j + 3)));
        CHECK(worst < 1e-9);
        CHECK(energy(moved) == doctest::Approx(energy(beam)).epsilon(1e-10));
    }

    TEST_CASE("non-power-of-two grids work")
    {
        const auto field = random_bandlimited_field(TransverseGrid(48, 36, 1e-4, 1e-4), 47);
        const auto out = propagate_angular_spectrum(propagate_angular_spectrum(field, 0.02), -0.02);
        CHECK(max_relative_difference(field, out) < 1e-9);
        const auto lensed = lens_transform(field, 0.3);
        CHECK(energy(lensed) == doctest::Approx(energy(field)).epsilon(1e-10));
    }

    TEST_CASE("layout validation enforces the 4f condition")
    {
        CHECK_NOTHROW(OpticalLayout::four_f(0.3, 0.5));
        OpticalLayout bad = OpticalLayout::four_f(0.3, 0.5);
        bad.d_lens1_cloud = 0.31;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }
}
