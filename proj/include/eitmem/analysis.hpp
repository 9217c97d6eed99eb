// Quantitative metrics: intensity profiles, visibility, image similarity
// (normalized inner product), and the exponential decay fit for retrieval
// versus storage time.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "eitmem/image.hpp"

namespace eitmem {

enum class ProfileAxis { vertical, horizontal };

/// Intensities along one row or column of an image.
struct Profile {
    std::vector<double> values;
    ProfileAxis axis = ProfileAxis::vertical;
    int index = 0; // column (vertical) or row (horizontal) the profile runs through
};

namespace analysis_detail {

inline void require_nonempty(const RealImage& image, const char* who)
{
    if (image.width < 1 || image.height < 1 || image.values.empty())
        throw std::invalid_argument(std::string(who) + ": empty image");
}

} // namespace analysis_detail

/// Intensity-weighted center of an image (negative pixels ignored), rounded
/// to the nearest sample. Errors on an all-zero image.
inline std::pair<int, int> intensity_centroid(const RealImage& image)
{
    analysis_detail::require_nonempty(image, "intensity_centroid");
    double total = 0.0, sx = 0.0, sy = 0.0;
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            const double w = std::max(0.0, image.at(x, y));
            total += w;
            sx += w * x;
            sy += w * y;
        }
    if (!(total > 0.0))
        throw std::invalid_argument("intensity_centroid: all-zero image");
    return {static_cast<int>(std::lround(sx / total)), static_cast<int>(std::lround(sy / total))};
}

/// Extract the row/column through an explicit index.
inline Profile extract_profile(const RealImage& image, ProfileAxis axis, int index)
{
    analysis_detail::require_nonempty(image, "extract_profile");
    Profile profile;
    profile.axis = axis;
    profile.index = index;
    if (axis == ProfileAxis::vertical) {
        if (index < 0 || index >= image.width)
            throw std::invalid_argument("extract_profile: column index out of range");
        profile.values.resize(static_cast<std::size_t>(image.height));
        for (int y = 0; y < image.height; ++y)
            profile.values[static_cast<std::size_t>(y)] = image.at(index, y);
    } else {
        if (index < 0 || index >= image.height)
            throw std::invalid_argument("extract_profile: row index out of range");
        profile.values.resize(static_cast<std::size_t>(image.width));
        for (int x = 0; x < image.width; ++x)
            profile.values[static_cast<std::size_t>(x)] = image.at(x, index);
    }
    return profile;
}

/// Extract the row/column through the intensity centroid.
inline Profile extract_profile(const RealImage& image, ProfileAxis axis)
{
    const auto [cx, cy] = intensity_centroid(image);
    return extract_profile(image, axis, axis == ProfileAxis::vertical ? cx : cy);
}

/// Visibility (I_max - I_min) / (I_max + I_min). Negative inputs are floored
/// at zero before evaluation; an all-zero profile is an error.
inline double visibility(const Profile& profile)
{
    if (profile.values.empty())
        throw std::invalid_argument("visibility: empty profile");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : profile.values) {
        const double f = std::max(0.0, v);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    if (!(hi + lo > 0.0))
        throw std::invalid_argument("visibility: undefined for an all-zero profile");
    return (hi - lo) / (hi + lo);
}

/// Normalized inner product of two images (cosine similarity of the pixel
/// vectors), with negative inputs floored at zero. 1 for identical patterns,
/// 0 for disjoint support.
inline double similarity(const RealImage& a, const RealImage& b)
{
    analysis_detail::require_nonempty(a, "similarity");
    analysis_detail::require_nonempty(b, "similarity");
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("similarity: image dimension mismatch");
    double cross = 0.0, norm_a = 0.0, norm_b = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double va = std::max(0.0, a.values[i]);
        const double vb = std::max(0.0, b.values[i]);
        cross += va * vb;
        norm_a += va * va;
        norm_b += vb * vb;
    }
    if (!(norm_a > 0.0) || !(norm_b > 0.0))
        throw std::invalid_argument("similarity: undefined for an all-zero image");
    return cross / std::sqrt(norm_a * norm_b);
}

/// Result of fitting y(t) = y0 + A exp(-t/tau). Confidence half-widths are
/// one-sigma values from the linearized covariance at the optimum.
struct DecayFit {
    double y0 = 0.0;
    double amplitude = 0.0;
    double tau = 0.0;
    double residual_norm = 0.0;
    double ci_y0 = 0.0;
    double ci_amplitude = 0.0;
    double ci_tau = 0.0;
    int iterations = 0;
};

namespace analysis_detail {

// 3x3 linear solve, partial pivoting.
inline bool solve3(std::array<std::array<double, 3>, 3> m, std::array<double, 3>& rhs)
{
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(m[row][col]) > std::abs(m[pivot][col]))
                pivot = row;
        if (std::abs(m[pivot][col]) < 1e-300)
            return false;
        std::swap(m[col], m[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (int row = col + 1; row < 3; ++row) {
            const double f = m[row][col] / m[col][col];
            for (int k = col; k < 3; ++k)
                m[row][k] -= f * m[col][k];
            rhs[row] -= f * rhs[col];
        }
    }
    for (int col = 2; col >= 0; --col) {
        for (int k = col + 1; k < 3; ++k)
            rhs[col] -= m[col][k] * rhs[k];
        rhs[col] /= m[col][col];
    }
    return true;
}

} // namespace analysis_detail

/// Damped Gauss-Newton (Levenberg-Marquardt) fit of y0 + A exp(-t/tau) with
/// the analytic Jacobian. Initial guess: y0 = min(y), A = max(y) - min(y),
/// tau = time span / 3. Throws "tau unidentifiable" on constant or
/// non-decaying data and reports iteration diagnostics on non-convergence.
inline DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y)
{
    const std::size_t n = t.size();
    if (n < 4 || y.size() != n)
        throw std::invalid_argument("fit_decay: need at least 4 (t, y) samples");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (t[i] == t[j])
                throw std::invalid_argument("fit_decay: sample times must be distinct");

    const double y_min = *std::min_element(y.begin(), y.end());
    const double y_max = *std::max_element(y.begin(), y.end());
    const double t_min = *std::min_element(t.begin(), t.end());
    const double t_max = *std::max_element(t.begin(), t.end());
    const double scale = std::max(std::abs(y_max), std::abs(y_min));
    if (y_max - y_min <= 1e-12 * std::max(scale, 1e-300))
        throw std::invalid_argument("fit_decay: tau unidentifiable (constant data)");

    // reject data without a decaying trend
    double mean_t = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_t += t[i];
        mean_y += y[i];
    }
    mean_t /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double cov_ty = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        cov_ty += (t[i] - mean_t) * (y[i] - mean_y);
    if (cov_ty >= 0.0)
        throw std::invalid_argument("fit_decay: tau unidentifiable (no decaying trend)");

    double y0 = y_min;
    double amp = y_max - y_min;
    double tau = (t_max - t_min) / 3.0;

    auto cost_of = [&](double p0, double p1, double p2) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (p0 + p1 * std::exp(-t[i] / p2));
            c += r * r;
        }
        return c;
    };

    double lambda = 1e-3;
    double cost = cost_of(y0, amp, tau);
    int iter = 0;
    const int max_iter = 200;
    bool converged = false;
    for (; iter < max_iter; ++iter) {
        std::array<std::array<double, 3>, 3> jtj{};
        std::array<double, 3> jtr{};
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(-t[i] / tau);
            const double r = y[i] - (y0 + amp * e);
            const std::array<double, 3> j = {1.0, e, amp * t[i] / (tau * tau) * e};
            for (int a = 0; a < 3; ++a) {
                jtr[a] += j[a] * r;
                for (int b = 0; b < 3; ++b)
                    jtj[a][b] += j[a] * j[b];
            }
        }
        bool stepped = false;
        for (int attempt = 0; attempt < 30 && !stepped; ++attempt) {
            auto m = jtj;
            for (int d = 0; d < 3; ++d)
                m[d][d] += lambda * std::max(jtj[d][d], 1e-300);
            auto delta = jtr;
            if (!analysis_detail::solve3(m, delta)) {
                lambda *= 10.0;
                continue;
            }
            const double new_y0 = y0 + delta[0];
            const double new_amp = amp + delta[1];
            const double new_tau = tau + delta[2];
            if (!(new_tau > 0.0) || !std::isfinite(new_tau)) {
                lambda *= 10.0;
                continue;
            }
            const double new_cost = cost_of(new_y0, new_amp, new_tau);
            if (new_cost <= cost) {
                const double step = std::abs(delta[0]) + std::abs(delta[1]) + std::abs(delta[2] / tau);
                const double drop = cost - new_cost;
                y0 = new_y0;
                amp = new_amp;
                tau = new_tau;
                cost = new_cost;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                if (step < 1e-12 * (std::abs(y0) + std::abs(amp) + 1.0) || drop < 1e-15 * (cost + 1e-300))
                    converged = true;
            } else {
                lambda *= 4.0;
            }
        }
        if (!stepped || converged)
            break;
    }
    if (!converged && iter >= max_iter)
        throw std::runtime_error("fit_decay: no convergence after " + std::to_string(max_iter)
                                 + " iterations (last cost " + std::to_string(cost) + ")");
    if (!(tau > 0.0) || amp <= 0.0)
        throw std::invalid_argument("fit_decay: tau unidentifiable (fit collapsed)");

    DecayFit fit;
    fit.y0 = y0;
    fit.amplitude = amp;
    fit.tau = tau;
    fit.iterations = iter;
    fit.residual_norm = std::sqrt(cost);

    // one-sigma half-widths from the linearized covariance
    std::array<std::array<double, 3>, 3> jtj{};
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp(-t[i] / tau);
        const std::array<double, 3> j = {1.0, e, amp * t[i] / (tau * tau) * e};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                jtj[a][b] += j[a] * j[b];
    }
    const double dof_var = n > 3 ? cost / static_cast<double>(n - 3) : 0.0;
    for (int d = 0; d < 3; ++d) {
        // d-th diagonal of inverse(JtJ) via solving with a unit vector
        auto m = jtj;
        std::array<double, 3> unit{};
        unit[static_cast<std::size_t>(d)] = 1.0;
        if (analysis_detail::solve3(m, unit)) {
            const double var = dof_var * unit[static_cast<std::size_t>(d)];
            const double hw = var > 0.0 ? std::sqrt(var) : 0.0;
            if (d == 0)
                fit.ci_y0 = hw;
            else if (d == 1)
                fit.ci_amplitude = hw;
            else
                fit.ci_tau = hw;
        }
    }
    return fit;
}

} // namespace eitmem
