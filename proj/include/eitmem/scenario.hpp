// Scenario runners: named experiments built from the component modules,
// writing plot-ready CSV tables, 16-bit graymaps and a JSON-lines manifest
// into an output directory. Runs are pure functions of (config, seed): the
// same inputs reproduce every output byte.
#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eitmem/analysis.hpp"
#include "eitmem/config.hpp"
#include "eitmem/detection.hpp"
#include "eitmem/hash.hpp"
#include "eitmem/image.hpp"
#include "eitmem/mask.hpp"
#include "eitmem/pgm.hpp"
#include "eitmem/propagation.hpp"
#include "eitmem/sequencer.hpp"

namespace eitmem {

struct EmittedFile {
    std::string path; // relative to the output directory
    std::string role;
    std::string hash;
};

struct ScenarioReport {
    std::string scenario;
    std::string config_hash;
    std::vector<EmittedFile> files;
};

namespace scenario_detail {

inline std::string format_value(double v) { return config_detail::format_double(v); }

/// Collects output files and writes the manifest at the end.
class OutputWriter {
public:
    OutputWriter(std::string scenario, std::string out_dir, const ExperimentConfig& cfg)
        : scenario_(std::move(scenario)), out_dir_(std::move(out_dir))
    {
        std::filesystem::create_directories(out_dir_);
        report_.scenario = scenario_;
        report_.config_hash = cfg.snapshot_hash();
        write_text("config.snapshot.cfg", cfg.canonical_text(), "config-snapshot");
    }

    void write_text(const std::string& relpath, const std::string& content, const std::string& role)
    {
        const std::filesystem::path full = std::filesystem::path(out_dir_) / relpath;
        std::ofstream out(full, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + full.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        report_.files.push_back({relpath, role, hash_string(content)});
    }

    void write_image(const std::string& relpath, const RealImage& image, const std::string& role,
                     const std::string& sidecar_metadata)
    {
        double scale = 1.0;
        const Raster16 raster = to_raster16(image, true, &scale);
        const std::filesystem::path full = std::filesystem::path(out_dir_) / relpath;
        write_pgm16(full.string(), raster);
        report_.files.push_back({relpath, role, hash_file(full.string())});
        std::string sidecar = sidecar_metadata;
        sidecar += "export_scale = " + format_value(scale) + "\n";
        write_text(relpath + ".txt", sidecar, "sidecar");
    }

    ScenarioReport finish()
    {
        std::string manifest;
        for (const auto& file : report_.files) {
            nlohmann::ordered_json row;
            row["path"] = file.path;
            row["role"] = file.role;
            row["scenario"] = scenario_;
            row["hash"] = file.hash;
            manifest += row.dump() + "\n";
        }
        const std::filesystem::path full = std::filesystem::path(out_dir_) / "manifest.jsonl";
        std::ofstream out(full, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + full.string());
        out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
        return report_;
    }

private:
    std::string scenario_;
    std::string out_dir_;
    ScenarioReport report_;
};

/// Simple CSV builder: header row, comma separators, '.' decimals.
class CsvBuilder {
public:
    explicit CsvBuilder(const std::vector<std::string>& header)
    {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i)
                text_ += ",";
            text_ += header[i];
        }
        text_ += "\n";
        columns_ = header.size();
    }

    void row(const std::vector<std::string>& cells)
    {
        if (cells.size() != columns_)
            throw std::logic_error("CsvBuilder: column count mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                text_ += ",";
            text_ += cells[i];
        }
        text_ += "\n";
    }

    const std::string& text() const { return text_; }

private:
    std::string text_;
    std::size_t columns_ = 0;
};

inline std::uint64_t stream_seed(std::uint64_t master, const std::string& tag)
{
    return derive_seed(master, fnv1a64(tag.data(), tag.size()));
}

} // namespace scenario_detail

/// One probe channel prepared for a run: mask-plane and cloud-plane patterns
/// (unit energy) plus the camera-plane offset of this channel's image
/// relative to the camera axis.
struct ChannelPipeline {
    StorageChannel channel;
    ComplexFieldGrid cloud_image;
    double camera_offset = 0.0;
};

inline std::vector<ChannelPipeline> build_channel_pipelines(const ExperimentConfig& cfg,
                                                            const std::string& mask1_override = "",
                                                            const std::string& mask2_override = "")
{
    const TransverseGrid grid = cfg.mask_grid();
    const OpticalLayout layout = cfg.optics(); // enforces the 4-f condition
    const double k = 2.0 * std::numbers::pi / cfg.wavelength;
    const double k_ref = k * std::sin(cfg.camera_reference_angle());

    std::vector<ChannelPipeline> pipelines;
    const std::array<std::pair<const ExperimentConfig::Channel*, std::string>, 2> sources = {{
        {&cfg.channel1, mask1_override.empty() ? cfg.channel1.mask : mask1_override},
        {&cfg.channel2, mask2_override.empty() ? cfg.channel2.mask : mask2_override},
    }};
    for (const auto& [ch, mask_spec] : sources) {
        const Raster8 raster = resolve_mask(mask_spec, grid.nx, grid.ny, grid.width(), grid.height(),
                                            cfg.mask_glyph_height);
        const ComplexFieldGrid mask_field = load_mask(raster, grid, 1.0, cfg.wavelength);
        ChannelPipeline pipe;
        pipe.channel = cfg.storage_channel(*ch);
        pipe.cloud_image = lens_transform(mask_field, layout.f1);
        pipe.camera_offset = layout.f2 * (pipe.channel.k_transverse(cfg.wavelength) - k_ref) / k;
        pipelines.push_back(std::move(pipe));
    }
    return pipelines;
}

/// Relay a cloud-plane field to the camera plane, realizing the channel tilt
/// as the transverse offset it produces there. The offset is rounded to
/// whole camera-grid samples: an interpolating shift of a hard-edged image
/// would ring across the frame, and the sub-sample remainder is far below
/// the image feature scale.
inline ComplexFieldGrid to_camera_plane(const ComplexFieldGrid& cloud_field, const ExperimentConfig& cfg)
{
    const OpticalLayout layout = cfg.optics();
    ComplexFieldGrid cam = lens_transform(cloud_field, layout.f2);
    const double k = 2.0 * std::numbers::pi / cfg.wavelength;
    const double k_ref = k * std::sin(cfg.camera_reference_angle());
    const double dx = layout.f2 * (cloud_field.tilt_x - k_ref) / k;
    const double dy = layout.f2 * cloud_field.tilt_y / k;
    cam = shift_field_samples(cam, static_cast<int>(std::lround(dx / cam.grid.dx)),
                              static_cast<int>(std::lround(dy / cam.grid.dy)));
    cam.tilt_x = cam.tilt_y = 0.0;
    return cam;
}

/// Camera pixel geometry and the per-channel analysis regions.
struct CameraGeometry {
    double pitch_x = 0.0;
    double pitch_y = 0.0;
    PixelRegion region1;
    PixelRegion region2;
};

inline CameraGeometry camera_geometry(const ExperimentConfig& cfg,
                                      const std::vector<ChannelPipeline>& pipelines)
{
    CameraGeometry geometry;
    geometry.pitch_x = cfg.ccd_sensor_extent / cfg.ccd_pixels;
    geometry.pitch_y = geometry.pitch_x;
    const double gap = std::abs(pipelines[1].camera_offset - pipelines[0].camera_offset);
    int half = static_cast<int>(std::floor(0.48 * gap / geometry.pitch_x));
    half = std::max(2, std::min(half, cfg.ccd_pixels / 2 - 1));
    auto region_for = [&](double offset) {
        const int cx = static_cast<int>(std::lround(cfg.ccd_pixels / 2.0 + offset / geometry.pitch_x));
        const int cy = cfg.ccd_pixels / 2;
        PixelRegion region;
        region.x0 = std::max(0, cx - half);
        region.x1 = std::min(cfg.ccd_pixels, cx + half);
        region.y0 = std::max(0, cy - half);
        region.y1 = std::min(cfg.ccd_pixels, cy + half);
        return region;
    };
    geometry.region1 = region_for(pipelines[0].camera_offset);
    geometry.region2 = region_for(pipelines[1].camera_offset);
    return geometry;
}

// ---------------------------------------------------------------------------
// temporal scenario
// ---------------------------------------------------------------------------

struct TemporalChannelResult {
    std::string label;
    double leakage_energy = 0.0;
    double retrieved_energy = 0.0;
    double efficiency = 0.0;
    double input_referenced = 0.0;
};

struct TemporalResult {
    std::vector<TemporalChannelResult> channels;
    ScenarioReport report;
};

/// Leakage and retrieved traces of one slot per channel, plus the
/// leakage-referenced efficiencies.
inline TemporalResult run_scenario_temporal(const ExperimentConfig& cfg, const std::string& out_dir)
{
    cfg.validate();
    scenario_detail::OutputWriter writer("temporal", out_dir, cfg);
    const auto pipelines = build_channel_pipelines(cfg);
    const PulseSchedule schedule = build_schedule(cfg.timing);
    const ScheduleSlot slot = schedule.slots.front();

    std::vector<ChannelInput> inputs;
    for (const auto& pipe : pipelines)
        inputs.push_back({pipe.channel, pipe.cloud_image});
    const auto records = run_trial(slot, cfg.medium(), inputs, cfg.photons_per_pulse, cfg.timing);

    TemporalResult result;
    scenario_detail::CsvBuilder metrics({"channel", "leakage_photons", "retrieved_photons",
                                         "efficiency_leakage_ref", "efficiency_input_ref"});
    for (const auto& rec : records) {
        TemporalChannelResult ch;
        ch.label = rec.label;
        ch.leakage_energy = rec.leakage_energy;
        ch.retrieved_energy = rec.retrieved_energy;
        ch.efficiency = storage_efficiency(rec);
        ch.input_referenced = input_referenced_efficiency(rec);
        result.channels.push_back(ch);
        metrics.row({rec.label, scenario_detail::format_value(ch.leakage_energy),
                     scenario_detail::format_value(ch.retrieved_energy),
                     scenario_detail::format_value(ch.efficiency),
                     scenario_detail::format_value(ch.input_referenced)});

        // time-resolved trace: probe envelope split into leaked and stored
        // slices, the stored slice replayed at the read event
        const PulseEnvelope envelope = PulseEnvelope::square(0.0, cfg.timing.probe_width);
        const double env_total = envelope.total();
        const double stored_slice =
            envelope.integral(rec.window_start, rec.window_end);
        scenario_detail::CsvBuilder leak_trace({"time_s", "leakage_power"});
        scenario_detail::CsvBuilder retrieved_trace({"time_s", "retrieved_power"});
        const double replay_span = std::min(rec.window_end, envelope.end()) - rec.window_start;
        const double t_end = slot.read_on + std::max(cfg.timing.probe_width, replay_span);
        const int steps = 2000;
        for (int i = 0; i <= steps; ++i) {
            const double t = t_end * i / steps;
            const double t_pulse = t - rec.probe_on;
            double leak_power = 0.0;
            if (t_pulse >= 0.0 && t_pulse <= cfg.timing.probe_width
                && (t_pulse < rec.window_start || t_pulse > rec.window_end))
                leak_power = rec.input_energy * envelope.value(t_pulse) / env_total;
            double retrieved_power = 0.0;
            const double t_read = t - rec.read_on;
            if (stored_slice > 0.0 && t_read >= 0.0) {
                const double t_replay = rec.window_start + t_read;
                if (t_replay <= rec.window_end && t_replay >= envelope.start()
                    && t_replay <= envelope.end())
                    retrieved_power = rec.retrieved_energy * envelope.value(t_replay) / stored_slice;
            }
            leak_trace.row({scenario_detail::format_value(t), scenario_detail::format_value(leak_power)});
            retrieved_trace.row(
                {scenario_detail::format_value(t), scenario_detail::format_value(retrieved_power)});
        }
        writer.write_text("trace_" + rec.label + "_leakage.csv", leak_trace.text(), "trace");
        writer.write_text("trace_" + rec.label + "_retrieved.csv", retrieved_trace.text(), "trace");
    }
    writer.write_text("metrics.csv", metrics.text(), "metrics");
    result.report = writer.finish();
    return result;
}

// ---------------------------------------------------------------------------
// dual-image scenario
// ---------------------------------------------------------------------------

struct DualImageResult {
    // retrieved energy from each stored wave into each readout direction;
    // row = stored wave, column = readout direction
    double matrix[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    std::vector<double> region1_signal_sums; // per retrieved frame, both-channel run region sums
    std::vector<double> region2_signal_sums;
    std::vector<double> region1_background_sums;
    std::vector<double> region2_background_sums;
    PixelRegion region1;
    PixelRegion region2;
    ScenarioReport report;
};

/// Simultaneous storage of two different images: leaked and retrieved
/// images per enabled-channel combination, a cross-talk matrix, and
/// per-frame region statistics used for the no-cross-talk test.
/// enable: bitmask, 1 = probe 1, 2 = probe 2, 3 = both (runs the three
/// combinations of the cross-talk study).
inline DualImageResult run_scenario_dual_image(const ExperimentConfig& cfg,
                                               const std::string& mask1, const std::string& mask2,
                                               int enable, const std::string& out_dir)
{
    cfg.validate();
    if (enable < 1 || enable > 3)
        throw std::invalid_argument("dual-image: enable must be 1, 2 or 3");
    scenario_detail::OutputWriter writer("dual-image", out_dir, cfg);
    const auto pipelines = build_channel_pipelines(cfg, mask1, mask2);
    const CameraGeometry geometry = camera_geometry(cfg, pipelines);
    const PulseSchedule schedule = build_schedule(cfg.timing);
    const ScheduleSlot slot = schedule.slots.front();
    const MediumConfig medium = cfg.medium();

    std::vector<ChannelInput> inputs;
    for (const auto& pipe : pipelines)
        inputs.push_back({pipe.channel, pipe.cloud_image});
    const auto records = run_trial(slot, medium, inputs, cfg.photons_per_pulse, cfg.timing);

    DualImageResult result;
    result.region1 = geometry.region1;
    result.region2 = geometry.region2;

    // cross-talk matrix from the stored gratings
    {
        const double v_g = medium.group_velocity();
        scenario_detail::CsvBuilder matrix_csv({"stored", "readout", "retrieved_photons", "ratio_to_matched"});
        for (int a = 0; a < 2; ++a) {
            const PulseEnvelope envelope = PulseEnvelope::square(0.0, cfg.timing.probe_width);
            ComplexFieldGrid image = pipelines[static_cast<std::size_t>(a)].cloud_image;
            const double scale = std::sqrt(cfg.photons_per_pulse / energy(image));
            for (auto& amp : image.amplitude)
                amp *= scale;
            const WriteResult written =
                write_spinwave(envelope, image, pipelines[static_cast<std::size_t>(a)].channel, v_g,
                               medium.cloud, slot.coupling_off - slot.probe_on, medium.tau_coherence);
            for (int b = 0; b < 2; ++b) {
                const double k_read =
                    pipelines[static_cast<std::size_t>(b)].channel.k_transverse(cfg.wavelength);
                const double coefficient = crosstalk_coefficient(written.wave, k_read, 0.0,
                                                                 cfg.coupling_waist, medium.cloud);
                const double matched = records[static_cast<std::size_t>(a)].retrieved_energy;
                result.matrix[a][b] = (a == b) ? matched : coefficient * coefficient * matched;
                matrix_csv.row({records[static_cast<std::size_t>(a)].label,
                                records[static_cast<std::size_t>(b)].label,
                                scenario_detail::format_value(result.matrix[a][b]),
                                scenario_detail::format_value(matched > 0.0 ? result.matrix[a][b] / matched : 0.0)});
            }
        }
        writer.write_text("crosstalk_matrix.csv", matrix_csv.text(), "crosstalk-matrix");
    }

    // enabled-channel combinations, Fig.-style leak/retrieve image pairs
    std::vector<int> combos;
    if (enable == 3)
        combos = {1, 2, 3};
    else
        combos = {enable};

    CCDModel ccd = cfg.ccd_model();
    const TransverseGrid camera_grid = to_camera_plane(records[0].leakage_field, cfg).grid;

    scenario_detail::CsvBuilder region_csv({"combo", "kind", "frame", "region1_counts", "region2_counts"});
    scenario_detail::CsvBuilder frame_totals_csv({"combo", "kind", "frame", "total_counts"});

    for (int combo : combos) {
        IntensityAtCamera leak_map(camera_grid);
        IntensityAtCamera retr_map(camera_grid);
        for (int c = 0; c < 2; ++c) {
            if (!(combo & (1 << c)))
                continue;
            leak_map.add_field(to_camera_plane(records[static_cast<std::size_t>(c)].leakage_field, cfg));
            retr_map.add_field(to_camera_plane(records[static_cast<std::size_t>(c)].retrieved_field, cfg));
        }
        const IntensityAtCamera background_map(camera_grid);

        struct Pass {
            const char* kind;
            const IntensityAtCamera* map;
            double arrival_start;
        };
        const double leak_arrival = records[0].probe_on;
        const double retr_arrival = records[0].read_on;
        const std::array<Pass, 3> passes = {{{"leak", &leak_map, leak_arrival},
                                             {"retrieve", &retr_map, retr_arrival},
                                             {"background", &background_map, retr_arrival}}};

        std::array<RealImage, 3> accumulated;
        for (std::size_t p = 0; p < passes.size(); ++p) {
            ccd.gate_open = passes[p].arrival_start + cfg.ccd_gate_delay_offset;
            const auto mean = expected_counts(*passes[p].map, passes[p].arrival_start,
                                              passes[p].arrival_start + cfg.timing.probe_width, ccd);
            RealImage sum(ccd.pixels_x, ccd.pixels_y);
            for (long f = 0; f < cfg.dual_frames; ++f) {
                const std::string tag = "dual/" + std::to_string(combo) + "/" + passes[p].kind + "/"
                                        + std::to_string(f);
                const DetectorFrame frame =
                    draw_frame(mean, ccd, scenario_detail::stream_seed(cfg.master_seed, tag));
                for (std::size_t i = 0; i < sum.values.size(); ++i)
                    sum.values[i] += frame.counts[i];
                RealImage frame_image(frame.width, frame.height);
                for (std::size_t i = 0; i < frame_image.values.size(); ++i)
                    frame_image.values[i] = frame.counts[i];
                region_csv.row({std::to_string(combo), passes[p].kind, std::to_string(f),
                                scenario_detail::format_value(region_sum(frame_image, geometry.region1)),
                                scenario_detail::format_value(region_sum(frame_image, geometry.region2))});
                frame_totals_csv.row({std::to_string(combo), passes[p].kind, std::to_string(f),
                                      scenario_detail::format_value(frame_image.total())});
                if (combo == (enable == 3 ? 1 : enable) && std::string(passes[p].kind) == "retrieve") {
                    result.region1_signal_sums.push_back(region_sum(frame_image, geometry.region1));
                    result.region2_signal_sums.push_back(region_sum(frame_image, geometry.region2));
                }
                if (combo == combos.front() && std::string(passes[p].kind) == "background") {
                    result.region1_background_sums.push_back(region_sum(frame_image, geometry.region1));
                    result.region2_background_sums.push_back(region_sum(frame_image, geometry.region2));
                }
            }
            accumulated[p] = std::move(sum);
        }

        const SubtractedImage leak_sub = subtract_background(accumulated[0], accumulated[2]);
        const SubtractedImage retr_sub = subtract_background(accumulated[1], accumulated[2]);
        const std::string suffix = combo == 1 ? "probe1" : combo == 2 ? "probe2" : "both";
        std::string sidecar = "gate_width = " + scenario_detail::format_value(ccd.gate_width) + "\n";
        sidecar += "gates_per_exposure = " + std::to_string(ccd.gates_per_exposure) + "\n";
        sidecar += "frames = " + std::to_string(cfg.dual_frames) + "\n";
        writer.write_image("leak_" + suffix + ".pgm", leak_sub.clamped, "leak-image", sidecar);
        writer.write_image("retrieve_" + suffix + ".pgm", retr_sub.clamped, "retrieved-image", sidecar);
    }

    writer.write_text("region_counts.csv", region_csv.text(), "region-counts");
    writer.write_text("frame_totals.csv", frame_totals_csv.text(), "frame-totals");
    result.report = writer.finish();
    return result;
}

// ---------------------------------------------------------------------------
// photon-sweep scenario
// ---------------------------------------------------------------------------

struct SweepPointResult {
    double photons = 0.0;
    long frames = 0;
    std::string label;
    double visibility = 0.0;
    double visibility_std = 0.0;
    double similarity = 0.0;
    double similarity_std = 0.0;
};

struct SweepResult {
    std::vector<SweepPointResult> rows; // channel-major per point
    ScenarioReport report;
};

namespace scenario_detail {

inline double ensemble_std(const std::vector<double>& values)
{
    if (values.size() < 2)
        return 0.0;
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values)
        var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(values.size() - 1));
}

} // namespace scenario_detail

/// Photon-number sweep: for each photons-per-pulse value, accumulate the
/// configured number of frames, subtract an equally sized background
/// accumulation, and report visibility (raw counts profile) and similarity
/// (retrieved vs leakage, background-subtracted) per channel. Ensemble
/// spreads come from splitting the frames into five chunks.
inline SweepResult run_scenario_photon_sweep(const ExperimentConfig& cfg, const std::string& out_dir)
{
    cfg.validate();
    scenario_detail::OutputWriter writer("photon-sweep", out_dir, cfg);
    const auto pipelines = build_channel_pipelines(cfg);
    const CameraGeometry geometry = camera_geometry(cfg, pipelines);
    const PulseSchedule schedule = build_schedule(cfg.timing);
    const ScheduleSlot slot = schedule.slots.front();
    const MediumConfig medium = cfg.medium();

    std::vector<ChannelInput> inputs;
    for (const auto& pipe : pipelines)
        inputs.push_back({pipe.channel, pipe.cloud_image});
    // unit-energy pulse; per-point maps scale linearly with the photon number
    const auto unit_records = run_trial(slot, medium, inputs, 1.0, cfg.timing);
    const TransverseGrid camera_grid = to_camera_plane(unit_records[0].leakage_field, cfg).grid;
    IntensityAtCamera unit_leak(camera_grid);
    IntensityAtCamera unit_retr(camera_grid);
    for (const auto& rec : unit_records) {
        unit_leak.add_field(to_camera_plane(rec.leakage_field, cfg));
        unit_retr.add_field(to_camera_plane(rec.retrieved_field, cfg));
    }

    CCDModel ccd = cfg.ccd_model();
    SweepResult result;
    scenario_detail::CsvBuilder metrics({"photons_per_pulse", "frames", "channel", "visibility",
                                         "visibility_std", "similarity", "similarity_std",
                                         "efficiency", "storage_time_s"});
    scenario_detail::CsvBuilder frame_totals_csv({"photons_per_pulse", "kind", "frame", "total_counts"});

    for (std::size_t point = 0; point < cfg.sweep_photons.size(); ++point) {
        const double photons = cfg.sweep_photons[point];
        const long frames = static_cast<long>(cfg.sweep_frames[point]);

        IntensityAtCamera leak_map = unit_leak;
        IntensityAtCamera retr_map = unit_retr;
        for (auto& v : leak_map.photons)
            v *= photons;
        for (auto& v : retr_map.photons)
            v *= photons;
        const IntensityAtCamera background_map(camera_grid);

        struct Pass {
            const char* kind;
            const IntensityAtCamera* map;
            double arrival_start;
        };
        const std::array<Pass, 3> passes = {{{"leak", &leak_map, unit_records[0].probe_on},
                                             {"retrieve", &retr_map, unit_records[0].read_on},
                                             {"background", &background_map, unit_records[0].read_on}}};

        // five chunks for the ensemble spread
        constexpr int chunks = 5;
        std::array<std::vector<RealImage>, 3> chunk_sums;
        for (auto& sums : chunk_sums)
            sums.assign(chunks, RealImage(ccd.pixels_x, ccd.pixels_y));

        for (std::size_t p = 0; p < passes.size(); ++p) {
            ccd.gate_open = passes[p].arrival_start + cfg.ccd_gate_delay_offset;
            const auto mean = expected_counts(*passes[p].map, passes[p].arrival_start,
                                              passes[p].arrival_start + cfg.timing.probe_width, ccd);
            for (long f = 0; f < frames; ++f) {
                const std::string tag = "sweep/" + std::to_string(point) + "/" + passes[p].kind + "/"
                                        + std::to_string(f);
                const DetectorFrame frame =
                    draw_frame(mean, ccd, scenario_detail::stream_seed(cfg.master_seed, tag));
                RealImage& sum = chunk_sums[p][static_cast<std::size_t>(f % chunks)];
                double total = 0.0;
                for (std::size_t i = 0; i < sum.values.size(); ++i) {
                    sum.values[i] += frame.counts[i];
                    total += frame.counts[i];
                }
                frame_totals_csv.row({scenario_detail::format_value(photons), passes[p].kind,
                                      std::to_string(f), scenario_detail::format_value(total)});
            }
        }

        auto chunk_total = [&](std::size_t pass) {
            RealImage sum(ccd.pixels_x, ccd.pixels_y);
            for (const auto& chunk : chunk_sums[pass])
                for (std::size_t i = 0; i < sum.values.size(); ++i)
                    sum.values[i] += chunk.values[i];
            return sum;
        };
        const RealImage leak_total = chunk_total(0);
        const RealImage retr_total = chunk_total(1);
        const RealImage bg_total = chunk_total(2);
        const SubtractedImage leak_sub = subtract_background(leak_total, bg_total);
        const SubtractedImage retr_sub = subtract_background(retr_total, bg_total);

        char photon_tag[32];
        std::snprintf(photon_tag, sizeof(photon_tag), "p%02zu", point);
        std::string sidecar = "photons_per_pulse = " + scenario_detail::format_value(photons) + "\n";
        sidecar += "frames = " + std::to_string(frames) + "\n";
        sidecar += "gates_per_exposure = " + std::to_string(ccd.gates_per_exposure) + "\n";
        writer.write_image(std::string(photon_tag) + "_retrieve.pgm", retr_sub.clamped,
                           "retrieved-image", sidecar);
        writer.write_image(std::string(photon_tag) + "_leak.pgm", leak_sub.clamped, "leak-image", sidecar);

        for (int c = 0; c < 2; ++c) {
            const PixelRegion& region = c == 0 ? geometry.region1 : geometry.region2;
            const RealImage raw_region = crop(retr_total, region);
            const RealImage retr_region = crop(retr_sub.difference, region);
            const RealImage leak_region = crop(leak_sub.difference, region);

            SweepPointResult row;
            row.photons = photons;
            row.frames = frames;
            row.label = pipelines[static_cast<std::size_t>(c)].channel.label;
            row.visibility = visibility(extract_profile(raw_region, ProfileAxis::vertical));
            row.similarity = similarity(retr_region, leak_region);

            std::vector<double> chunk_v, chunk_r;
            for (int chunk = 0; chunk < chunks; ++chunk) {
                const RealImage& leak_chunk = chunk_sums[0][static_cast<std::size_t>(chunk)];
                const RealImage& retr_chunk = chunk_sums[1][static_cast<std::size_t>(chunk)];
                const RealImage& bg_chunk = chunk_sums[2][static_cast<std::size_t>(chunk)];
                const RealImage raw_chunk_region = crop(retr_chunk, region);
                try {
                    chunk_v.push_back(visibility(extract_profile(raw_chunk_region, ProfileAxis::vertical)));
                } catch (const std::invalid_argument&) {
                    // all-zero chunk; skip
                }
                const SubtractedImage retr_chunk_sub = subtract_background(retr_chunk, bg_chunk);
                const SubtractedImage leak_chunk_sub = subtract_background(leak_chunk, bg_chunk);
                try {
                    chunk_r.push_back(similarity(crop(retr_chunk_sub.difference, region),
                                                 crop(leak_chunk_sub.difference, region)));
                } catch (const std::invalid_argument&) {
                }
            }
            row.visibility_std = scenario_detail::ensemble_std(chunk_v);
            row.similarity_std = scenario_detail::ensemble_std(chunk_r);

            metrics.row({scenario_detail::format_value(photons), std::to_string(frames), row.label,
                         scenario_detail::format_value(row.visibility),
                         scenario_detail::format_value(row.visibility_std),
                         scenario_detail::format_value(row.similarity),
                         scenario_detail::format_value(row.similarity_std),
                         scenario_detail::format_value(
                             storage_efficiency(unit_records[static_cast<std::size_t>(c)])),
                         scenario_detail::format_value(cfg.timing.storage_time)});
            result.rows.push_back(row);
        }
    }

    writer.write_text("sweep_metrics.csv", metrics.text(), "metrics");
    writer.write_text("frame_totals.csv", frame_totals_csv.text(), "frame-totals");
    result.report = writer.finish();
    return result;
}

// ---------------------------------------------------------------------------
// decay scenario
// ---------------------------------------------------------------------------

struct DecayChannelFit {
    std::string label;
    DecayFit fit;
};

struct DecayPointResult {
    double storage_time = 0.0;
    std::string label;
    double intensity = 0.0;  // retrieved photons (noiseless) or region counts
    double similarity_to_first = 0.0;
};

struct DecayResult {
    std::vector<DecayPointResult> points;
    std::vector<DecayChannelFit> fits;
    ScenarioReport report;
};

/// Storage-time sweep with an exponential fit of the retrieved intensity.
/// decay.detection = false fits the exact retrieved energies; true runs the
/// full detection chain. decay.rms_speed sets the diffusion for this sweep.
inline DecayResult run_scenario_decay(const ExperimentConfig& cfg, const std::string& out_dir)
{
    cfg.validate();
    if (cfg.decay_times.size() < 4)
        throw std::invalid_argument("decay: sweep needs at least 4 storage times");
    scenario_detail::OutputWriter writer("decay", out_dir, cfg);
    const auto pipelines = build_channel_pipelines(cfg);
    const CameraGeometry geometry = camera_geometry(cfg, pipelines);
    MediumConfig medium = cfg.medium();
    medium.cloud.rms_speed = cfg.decay_rms_speed;

    std::vector<ChannelInput> inputs;
    for (const auto& pipe : pipelines)
        inputs.push_back({pipe.channel, pipe.cloud_image});

    CCDModel ccd = cfg.ccd_model();
    DecayResult result;
    scenario_detail::CsvBuilder points_csv({"storage_time_s", "channel", "intensity", "similarity_to_first"});

    std::array<std::vector<double>, 2> ts, ys;
    std::array<RealImage, 2> first_image;
    std::array<ComplexFieldGrid, 2> first_field;

    for (std::size_t j = 0; j < cfg.decay_times.size(); ++j) {
        const double storage_time = cfg.decay_times[j];
        // slot built directly; the sweep is free of the window structure so
        // storage times beyond one pulse period are allowed
        ScheduleSlot slot;
        slot.coupling_on = 0.0;
        slot.coupling_off = cfg.timing.coupling_width;
        slot.probe_on = slot.coupling_off - cfg.timing.switch_off_fraction * cfg.timing.probe_width;
        slot.probe_off = slot.probe_on + cfg.timing.probe_width;
        slot.read_on = slot.coupling_off + storage_time;
        const auto records = run_trial(slot, medium, inputs, cfg.photons_per_pulse, cfg.timing);

        for (int c = 0; c < 2; ++c) {
            const auto& rec = records[static_cast<std::size_t>(c)];
            DecayPointResult point;
            point.storage_time = storage_time;
            point.label = rec.label;

            if (cfg.decay_detection) {
                const TransverseGrid camera_grid = to_camera_plane(rec.retrieved_field, cfg).grid;
                IntensityAtCamera retr_map(camera_grid);
                retr_map.add_field(to_camera_plane(rec.retrieved_field, cfg));
                const IntensityAtCamera background_map(camera_grid);
                ccd.gate_open = rec.read_on + cfg.ccd_gate_delay_offset;
                const auto mean_signal = expected_counts(retr_map, rec.read_on,
                                                         rec.read_on + cfg.timing.probe_width, ccd);
                const auto mean_bg = expected_counts(background_map, rec.read_on,
                                                     rec.read_on + cfg.timing.probe_width, ccd);
                RealImage signal_sum(ccd.pixels_x, ccd.pixels_y);
                RealImage bg_sum(ccd.pixels_x, ccd.pixels_y);
                for (long f = 0; f < cfg.decay_frames; ++f) {
                    const std::string tag_signal = "decay/" + std::to_string(j) + "/"
                                                   + std::to_string(c) + "/signal/" + std::to_string(f);
                    const std::string tag_bg = "decay/" + std::to_string(j) + "/" + std::to_string(c)
                                               + "/background/" + std::to_string(f);
                    const DetectorFrame sf =
                        draw_frame(mean_signal, ccd, scenario_detail::stream_seed(cfg.master_seed, tag_signal));
                    const DetectorFrame bf =
                        draw_frame(mean_bg, ccd, scenario_detail::stream_seed(cfg.master_seed, tag_bg));
                    for (std::size_t i = 0; i < signal_sum.values.size(); ++i) {
                        signal_sum.values[i] += sf.counts[i];
                        bg_sum.values[i] += bf.counts[i];
                    }
                }
                const SubtractedImage sub = subtract_background(signal_sum, bg_sum);
                const PixelRegion& region = c == 0 ? geometry.region1 : geometry.region2;
                point.intensity = region_sum(sub.difference, region);
                const RealImage region_image = crop(sub.clamped, region);
                if (j == 0)
                    first_image[static_cast<std::size_t>(c)] = region_image;
                point.similarity_to_first =
                    similarity(region_image, first_image[static_cast<std::size_t>(c)]);
            } else {
                point.intensity = rec.retrieved_energy;
                RealImage pattern(rec.retrieved_field.grid.nx, rec.retrieved_field.grid.ny);
                for (std::size_t i = 0; i < pattern.values.size(); ++i)
                    pattern.values[i] = std::norm(rec.retrieved_field.amplitude[i]);
                if (j == 0)
                    first_image[static_cast<std::size_t>(c)] = pattern;
                point.similarity_to_first = similarity(pattern, first_image[static_cast<std::size_t>(c)]);
            }

            ts[static_cast<std::size_t>(c)].push_back(storage_time);
            ys[static_cast<std::size_t>(c)].push_back(point.intensity);
            points_csv.row({scenario_detail::format_value(storage_time), point.label,
                            scenario_detail::format_value(point.intensity),
                            scenario_detail::format_value(point.similarity_to_first)});
            result.points.push_back(point);
        }
    }
    writer.write_text("decay_points.csv", points_csv.text(), "metrics");

    scenario_detail::CsvBuilder fit_csv({"channel", "y0", "amplitude", "tau_s", "tau_ci_s", "residual_norm"});
    for (int c = 0; c < 2; ++c) {
        DecayChannelFit channel_fit;
        channel_fit.label = pipelines[static_cast<std::size_t>(c)].channel.label;
        channel_fit.fit = fit_decay(ts[static_cast<std::size_t>(c)], ys[static_cast<std::size_t>(c)]);
        fit_csv.row({channel_fit.label, scenario_detail::format_value(channel_fit.fit.y0),
                     scenario_detail::format_value(channel_fit.fit.amplitude),
                     scenario_detail::format_value(channel_fit.fit.tau),
                     scenario_detail::format_value(channel_fit.fit.ci_tau),
                     scenario_detail::format_value(channel_fit.fit.residual_norm)});

        scenario_detail::CsvBuilder curve({"storage_time_s", "fitted_intensity"});
        const double t_max = *std::max_element(ts[static_cast<std::size_t>(c)].begin(),
                                               ts[static_cast<std::size_t>(c)].end());
        for (int i = 0; i <= 200; ++i) {
            const double t = t_max * i / 200.0;
            const double y = channel_fit.fit.y0
                             + channel_fit.fit.amplitude * std::exp(-t / channel_fit.fit.tau);
            curve.row({scenario_detail::format_value(t), scenario_detail::format_value(y)});
        }
        writer.write_text("decay_curve_" + channel_fit.label + ".csv", curve.text(), "fit-curve");
        result.fits.push_back(channel_fit);
    }
    writer.write_text("decay_fit.csv", fit_csv.text(), "fit");

    result.report = writer.finish();
    return result;
}

} // namespace eitmem
