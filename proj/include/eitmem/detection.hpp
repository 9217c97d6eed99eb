// Stochastic photodetection: the gated intensified camera (quantum
// efficiency, dark and coupling-scatter background, many gated windows
// integrated per readout) and the single-photon counter with dead time.
// Every draw is seeded explicitly; identical seeds give identical frames.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "eitmem/grid.hpp"
#include "eitmem/image.hpp"
#include "eitmem/rng.hpp"

namespace eitmem {

/// Coupling-scatter background versus probe-coupling angle: exponential
/// interpolation through two anchor points, monotone nonincreasing in angle.
struct ScatterModel {
    double angle1 = 0.0;                      // rad
    double rate1 = 200.0;                     // counts/pixel/s at angle1
    double angle2 = 3.3 * 0.017453292519943295; // rad
    double rate2 = 12.0;                      // counts/pixel/s at angle2

    void validate() const
    {
        if (rate1 < 0.0 || rate2 < 0.0)
            throw std::invalid_argument("ScatterModel: rates must be nonnegative");
        if (!(angle2 > angle1))
            throw std::invalid_argument("ScatterModel: anchor angles must be increasing");
        if (rate2 > rate1)
            throw std::invalid_argument("ScatterModel: scatter must not increase with angle");
    }

    double rate_at(double angle) const
    {
        if (rate1 <= 0.0 || rate2 <= 0.0)
            return 0.0;
        const double t = (angle - angle1) / (angle2 - angle1);
        return rate1 * std::pow(rate2 / rate1, t);
    }
};

/// Gated camera model. One exposure (one DetectorFrame) integrates
/// gates_per_exposure identical gated windows, matching how an intensified
/// camera accumulates many retrieval events per readout.
struct CCDModel {
    int pixels_x = 256;
    int pixels_y = 256;
    double sensor_width = 13.3e-3;
    double sensor_height = 13.3e-3;
    double quantum_efficiency = 0.25;
    double dark_rate = 10.0;        // counts/pixel/s
    double scatter_rate = 12.0;     // counts/pixel/s, from ScatterModel at the operating angle
    double gate_width = 500e-9;
    double gate_open = 0.0;         // absolute gate opening time
    long gates_per_exposure = 50000;

    void validate() const
    {
        if (pixels_x < 1 || pixels_y < 1)
            throw std::invalid_argument("CCDModel: pixel grid must be nonempty");
        if (!(sensor_width > 0.0) || !(sensor_height > 0.0))
            throw std::invalid_argument("CCDModel: sensor extent must be positive");
        if (quantum_efficiency < 0.0 || quantum_efficiency > 1.0)
            throw std::invalid_argument("CCDModel: quantum efficiency must be within [0,1]");
        if (dark_rate < 0.0 || scatter_rate < 0.0)
            throw std::invalid_argument("CCDModel: background rates must be nonnegative");
        if (!(gate_width > 0.0))
            throw std::invalid_argument("CCDModel: gate width must be positive");
        if (gates_per_exposure < 1)
            throw std::invalid_argument("CCDModel: gates_per_exposure must be at least 1");
    }
};

/// Single-photon counting module.
struct SPCMModel {
    double dead_time = 50e-9;
    double efficiency = 0.5;

    void validate() const
    {
        if (dead_time < 0.0)
            throw std::invalid_argument("SPCMModel: dead time must be nonnegative");
        if (efficiency < 0.0 || efficiency > 1.0)
            throw std::invalid_argument("SPCMModel: efficiency must be within [0,1]");
    }
};

/// Integer counts from one exposure.
struct DetectorFrame {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> counts;
    double gate_open = 0.0;
    double gate_width = 0.0;
    long gates = 1;
    std::uint64_t seed = 0;

    std::uint32_t at(int x, int y) const { return counts[static_cast<std::size_t>(y) * width + x]; }
};

/// Expected photons per field sample at the camera plane, with the grid it
/// lives on. Channels add incoherently (the probes carry orthogonal
/// polarizations).
struct IntensityAtCamera {
    TransverseGrid grid;
    std::vector<double> photons;

    IntensityAtCamera() = default;
    explicit IntensityAtCamera(const TransverseGrid& g) : grid(g), photons(g.samples(), 0.0) {}

    void add_field(const ComplexFieldGrid& field)
    {
        if (photons.empty()) {
            grid = field.grid;
            photons.assign(grid.samples(), 0.0);
        }
        if (!(field.grid == grid))
            throw std::invalid_argument("IntensityAtCamera: field grid mismatch");
        for (std::size_t i = 0; i < photons.size(); ++i)
            photons[i] += std::norm(field.amplitude[i]);
    }
};

/// Fraction of the arrival window covered by the camera gate.
inline double gate_overlap_fraction(double arrival_start, double arrival_end, const CCDModel& ccd)
{
    if (!(arrival_end > arrival_start))
        return 0.0;
    const double lo = std::max(arrival_start, ccd.gate_open);
    const double hi = std::min(arrival_end, ccd.gate_open + ccd.gate_width);
    return hi > lo ? (hi - lo) / (arrival_end - arrival_start) : 0.0;
}

/// Expected counts per pixel for one exposure: the optical map binned onto
/// the sensor (sample centers deposited into pixels, light falling off the
/// sensor is lost) plus the flat background, everything times the number of
/// gates integrated in the exposure.
inline std::vector<double> expected_counts(const IntensityAtCamera& map, double arrival_start,
                                           double arrival_end, const CCDModel& ccd)
{
    ccd.validate();
    const double overlap = gate_overlap_fraction(arrival_start, arrival_end, ccd);
    const double gates = static_cast<double>(ccd.gates_per_exposure);
    const double background = (ccd.dark_rate + ccd.scatter_rate) * ccd.gate_width * gates;

    std::vector<double> mean(static_cast<std::size_t>(ccd.pixels_x) * ccd.pixels_y, background);
    const double pitch_x = ccd.sensor_width / ccd.pixels_x;
    const double pitch_y = ccd.sensor_height / ccd.pixels_y;
    const double signal_scale = ccd.quantum_efficiency * overlap * gates;
    for (int j = 0; j < map.grid.ny; ++j) {
        const double y = map.grid.y(j);
        const int py = static_cast<int>(std::floor(y / pitch_y + ccd.pixels_y / 2.0));
        if (py < 0 || py >= ccd.pixels_y)
            continue;
        for (int i = 0; i < map.grid.nx; ++i) {
            const double photons = map.photons[static_cast<std::size_t>(j) * map.grid.nx + i];
            if (photons == 0.0)
                continue;
            const double x = map.grid.x(i);
            const int px = static_cast<int>(std::floor(x / pitch_x + ccd.pixels_x / 2.0));
            if (px < 0 || px >= ccd.pixels_x)
                continue;
            mean[static_cast<std::size_t>(py) * ccd.pixels_x + px] += photons * signal_scale;
        }
    }
    return mean;
}

/// Poisson-draw one frame from a per-pixel expectation.
inline DetectorFrame draw_frame(const std::vector<double>& mean, const CCDModel& ccd,
                                std::uint64_t seed)
{
    DetectorFrame frame;
    frame.width = ccd.pixels_x;
    frame.height = ccd.pixels_y;
    frame.gate_open = ccd.gate_open;
    frame.gate_width = ccd.gate_width;
    frame.gates = ccd.gates_per_exposure;
    frame.seed = seed;
    frame.counts.resize(mean.size());
    Rng rng(seed);
    for (std::size_t i = 0; i < mean.size(); ++i)
        frame.counts[i] = static_cast<std::uint32_t>(rng.poisson(mean[i]));
    return frame;
}

/// One gated exposure of the camera.
inline DetectorFrame expose_frame(const IntensityAtCamera& map, double arrival_start,
                                  double arrival_end, const CCDModel& ccd, std::uint64_t seed)
{
    return draw_frame(expected_counts(map, arrival_start, arrival_end, ccd), ccd, seed);
}

/// Raw frame export: counts clamped into a 16-bit graymap.
inline Raster16 frame_to_raster16(const DetectorFrame& frame)
{
    Raster16 raster;
    raster.width = frame.width;
    raster.height = frame.height;
    raster.pixels.resize(frame.counts.size());
    for (std::size_t i = 0; i < frame.counts.size(); ++i)
        raster.pixels[i] = static_cast<std::uint16_t>(std::min<std::uint32_t>(frame.counts[i], 65535));
    return raster;
}

/// Per-pixel sum of frames.
inline RealImage accumulate(const std::vector<DetectorFrame>& frames)
{
    if (frames.empty())
        throw std::invalid_argument("accumulate: no frames");
    RealImage sum(frames.front().width, frames.front().height);
    for (const auto& frame : frames) {
        if (frame.width != sum.width || frame.height != sum.height)
            throw std::invalid_argument("accumulate: frame dimension mismatch");
        for (std::size_t i = 0; i < sum.values.size(); ++i)
            sum.values[i] += frame.counts[i];
    }
    return sum;
}

struct SubtractedImage {
    RealImage difference; // signed; metrics use this one
    RealImage clamped;    // floored at zero for display/export
};

/// Background subtraction. The signed difference is kept for metric
/// computation; the clamped copy reproduces the displayed images.
inline SubtractedImage subtract_background(const RealImage& image, const RealImage& background)
{
    if (image.width != background.width || image.height != background.height)
        throw std::invalid_argument("subtract_background: dimension mismatch");
    SubtractedImage out;
    out.difference = RealImage(image.width, image.height);
    for (std::size_t i = 0; i < image.values.size(); ++i)
        out.difference.values[i] = image.values[i] - background.values[i];
    out.clamped = clamped_nonnegative(out.difference);
    return out;
}

enum class PhotonStatistics { poisson, fixed };

/// Estimate the mean photon number per pulse the way the counting
/// measurement does: generate arrivals uniformly over each pulse (Poisson
/// pulse statistics, or exactly round(mean) photons per pulse), thin by the
/// detector efficiency, suppress arrivals within the dead time of the
/// previously registered one, then divide total clicks by efficiency and
/// pulse count. Dead time biases the estimate low; the bias shrinks with the
/// photon number.
inline double spcm_estimate(double mean_photons_per_pulse, double pulse_width, const SPCMModel& spcm,
                            long n_pulses, std::uint64_t seed,
                            PhotonStatistics statistics = PhotonStatistics::poisson)
{
    spcm.validate();
    if (!(pulse_width > 0.0))
        throw std::invalid_argument("spcm_estimate: pulse width must be positive");
    if (n_pulses < 1)
        throw std::invalid_argument("spcm_estimate: need at least one pulse");
    if (!(spcm.efficiency > 0.0))
        throw std::invalid_argument("spcm_estimate: zero efficiency cannot be unfolded");
    if (mean_photons_per_pulse < 0.0)
        throw std::invalid_argument("spcm_estimate: mean must be nonnegative");

    Rng rng(seed);
    std::vector<double> times;
    std::uint64_t registered = 0;
    for (long pulse = 0; pulse < n_pulses; ++pulse) {
        const std::uint64_t photons = statistics == PhotonStatistics::poisson
            ? rng.poisson(mean_photons_per_pulse)
            : static_cast<std::uint64_t>(std::llround(mean_photons_per_pulse));
        times.clear();
        for (std::uint64_t p = 0; p < photons; ++p) {
            const double t = rng.uniform() * pulse_width;
            if (spcm.efficiency >= 1.0 || rng.uniform() < spcm.efficiency)
                times.push_back(t);
        }
        std::sort(times.begin(), times.end());
        double dead_until = -1.0;
        for (double t : times) {
            if (t >= dead_until) {
                ++registered;
                dead_until = t + spcm.dead_time;
            }
        }
    }
    return static_cast<double>(registered) / (spcm.efficiency * static_cast<double>(n_pulses));
}

} // namespace eitmem
