// Experiment configuration: a flat "dotted.key = value" text format that is
// parsed strictly (unknown keys are errors), validated with the offending
// field named, and echoed back canonically so every run can be hashed and
// diffed.
#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eitmem/detection.hpp"
#include "eitmem/hash.hpp"
#include "eitmem/medium.hpp"
#include "eitmem/propagation.hpp"
#include "eitmem/sequencer.hpp"

namespace eitmem {

namespace config_detail {

inline std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

/// Shortest fixed-notation double that round-trips exactly.
inline std::string format_double(double value)
{
    char buffer[40];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
        if (std::strtod(buffer, nullptr) == value)
            return buffer;
    }
    return buffer;
}

} // namespace config_detail

/// Parsed key/value file. '#' starts a comment; blank lines are ignored.
class ConfigMap {
public:
    ConfigMap() = default;

    static ConfigMap parse(const std::string& text)
    {
        ConfigMap map;
        std::istringstream in(text);
        std::string line;
        int line_number = 0;
        while (std::getline(in, line)) {
            ++line_number;
            const auto hash_pos = line.find('#');
            if (hash_pos != std::string::npos)
                line = line.substr(0, hash_pos);
            const std::string trimmed = config_detail::trim(line);
            if (trimmed.empty())
                continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config parse error at line " + std::to_string(line_number)
                                            + ": expected 'key = value'");
            const std::string key = config_detail::trim(trimmed.substr(0, eq));
            const std::string value = config_detail::trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument("config parse error at line " + std::to_string(line_number)
                                            + ": empty key");
            if (map.values_.count(key))
                throw std::invalid_argument("config parse error at line " + std::to_string(line_number)
                                            + ": duplicate key '" + key + "'");
            map.values_[key] = value;
        }
        return map;
    }

    static ConfigMap parse_file(const std::string& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("config: cannot open " + path);
        std::ostringstream text;
        text << in.rdbuf();
        return parse(text.str());
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback)
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        consumed_.insert({key, true});
        return it->second;
    }

    double get_double(const std::string& key, double fallback)
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        consumed_.insert({key, true});
        char* end = nullptr;
        const double value = std::strtod(it->second.c_str(), &end);
        if (end == it->second.c_str() || *end != '\0')
            throw std::invalid_argument(key + ": cannot parse '" + it->second + "' as a number");
        return value;
    }

    long get_long(const std::string& key, long fallback)
    {
        const double value = get_double(key, static_cast<double>(fallback));
        const long rounded = static_cast<long>(std::llround(value));
        if (static_cast<double>(rounded) != value)
            throw std::invalid_argument(key + ": expected an integer");
        return rounded;
    }

    bool get_bool(const std::string& key, bool fallback)
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        consumed_.insert({key, true});
        if (it->second == "true" || it->second == "1")
            return true;
        if (it->second == "false" || it->second == "0")
            return false;
        throw std::invalid_argument(key + ": expected true/false");
    }

    std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback)
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        consumed_.insert({key, true});
        std::vector<double> out;
        std::istringstream in(it->second);
        std::string token;
        while (std::getline(in, token, ',')) {
            token = config_detail::trim(token);
            if (token.empty())
                throw std::invalid_argument(key + ": empty list element");
            char* end = nullptr;
            out.push_back(std::strtod(token.c_str(), &end));
            if (end == token.c_str() || *end != '\0')
                throw std::invalid_argument(key + ": cannot parse '" + token + "' as a number");
        }
        if (out.empty())
            throw std::invalid_argument(key + ": empty list");
        return out;
    }

    /// After loading, every present key must have been consumed.
    void reject_unknown_keys() const
    {
        for (const auto& [key, value] : values_)
            if (!consumed_.count(key))
                throw std::invalid_argument("unknown configuration key '" + key + "'");
    }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, bool> consumed_;
};

/// Full experiment configuration with shipped defaults. The default channel
/// efficiencies are calibrated so the noiseless retrieved/leakage ratios at
/// the default timing come out at 0.35 (channel 1) and 0.23 (channel 2).
struct ExperimentConfig {
    // transverse grid at the mask plane
    int grid_n = 256;
    double grid_extent = 6.4e-3;

    // optics
    double wavelength = 795e-9;
    double f1 = 0.300;
    double f2 = 0.500;

    // medium
    LambdaSystem system;
    AtomicCloud cloud;
    double tau_coherence = 20e-6;
    double coupling_waist = 1.5e-3;

    // channels
    struct Channel {
        std::string label;
        double angle_deg = 3.3;
        double write_efficiency = 0.7;
        double read_efficiency = 0.5;
        std::string mask = "glyph:2";
    };
    Channel channel1{"probe1", 3.3, 0.7, 0.54779881762603866, "glyph:2"};
    Channel channel2{"probe2", 3.75, 0.7, 0.35998208015425398, "glyph:8"};

    // timing
    TimingConfig timing;

    // probe strength
    double photons_per_pulse = 1000.0;

    // detection
    int ccd_pixels = 256;
    double ccd_sensor_extent = 13.3e-3;
    double ccd_quantum_efficiency = 0.25;
    double ccd_dark_rate = 10.0;
    double ccd_gate_width = 500e-9;
    double ccd_gate_delay_offset = 0.0;
    long ccd_gates_per_exposure = 50000;
    ScatterModel scatter;
    SPCMModel spcm;

    // scenario parameters
    std::vector<double> sweep_photons = {305.0, 162.0, 80.0, 40.0, 22.0, 10.0, 5.3, 1.2};
    std::vector<double> sweep_frames = {50, 50, 50, 200, 200, 500, 1000, 1000};
    std::vector<double> decay_times = {0.0, 4e-6, 8e-6, 12e-6, 16e-6, 20e-6, 24e-6, 28e-6};
    long decay_frames = 4;
    bool decay_detection = true;
    double decay_rms_speed = 0.2;
    long dual_frames = 120;
    double mask_glyph_height = 2.0e-3;
    std::uint64_t master_seed = 20120831;

    static ExperimentConfig from_map(ConfigMap map)
    {
        ExperimentConfig cfg; // defaults
        cfg.grid_n = static_cast<int>(map.get_long("grid.n", cfg.grid_n));
        cfg.grid_extent = map.get_double("grid.extent", cfg.grid_extent);
        cfg.wavelength = map.get_double("optics.wavelength", cfg.wavelength);
        cfg.f1 = map.get_double("optics.f1", cfg.f1);
        cfg.f2 = map.get_double("optics.f2", cfg.f2);
        cfg.system.omega_c = map.get_double("medium.coupling_rabi", cfg.system.omega_c);
        cfg.system.g_sqrt_n = map.get_double("medium.collective_coupling", cfg.system.g_sqrt_n);
        cfg.system.gamma_e = map.get_double("medium.excited_decay", cfg.system.gamma_e);
        cfg.system.gamma_gs = map.get_double("medium.ground_dephasing", cfg.system.gamma_gs);
        cfg.system.optical_depth = map.get_double("medium.optical_depth", cfg.system.optical_depth);
        cfg.coupling_waist = map.get_double("medium.coupling_waist", cfg.coupling_waist);
        cfg.cloud.length = map.get_double("cloud.length", cfg.cloud.length);
        cfg.cloud.transverse_size = map.get_double("cloud.transverse_size", cfg.cloud.transverse_size);
        cfg.cloud.atom_count = map.get_double("cloud.atom_count", cfg.cloud.atom_count);
        cfg.cloud.rms_speed = map.get_double("cloud.rms_speed", cfg.cloud.rms_speed);
        cfg.tau_coherence = map.get_double("storage.tau_coherence", cfg.tau_coherence);
        auto load_channel = [&map](const std::string& prefix, Channel& ch) {
            ch.angle_deg = map.get_double(prefix + ".angle_deg", ch.angle_deg);
            ch.write_efficiency = map.get_double(prefix + ".write_efficiency", ch.write_efficiency);
            ch.read_efficiency = map.get_double(prefix + ".read_efficiency", ch.read_efficiency);
            ch.mask = map.get_string(prefix + ".mask", ch.mask);
        };
        load_channel("channel1", cfg.channel1);
        load_channel("channel2", cfg.channel2);
        cfg.timing.repetition = map.get_double("timing.repetition", cfg.timing.repetition);
        cfg.timing.load_duration = map.get_double("timing.load_duration", cfg.timing.load_duration);
        cfg.timing.window_duration = map.get_double("timing.window_duration", cfg.timing.window_duration);
        cfg.timing.pulse_period = map.get_double("timing.pulse_period", cfg.timing.pulse_period);
        cfg.timing.probe_width = map.get_double("timing.probe_width", cfg.timing.probe_width);
        cfg.timing.coupling_width = map.get_double("timing.coupling_width", cfg.timing.coupling_width);
        cfg.timing.storage_time = map.get_double("timing.storage_time", cfg.timing.storage_time);
        cfg.timing.switch_off_fraction = map.get_double("timing.switch_off_fraction", cfg.timing.switch_off_fraction);
        cfg.photons_per_pulse = map.get_double("probe.photons_per_pulse", cfg.photons_per_pulse);
        cfg.ccd_pixels = static_cast<int>(map.get_long("ccd.pixels", cfg.ccd_pixels));
        cfg.ccd_sensor_extent = map.get_double("ccd.sensor_extent", cfg.ccd_sensor_extent);
        cfg.ccd_quantum_efficiency = map.get_double("ccd.quantum_efficiency", cfg.ccd_quantum_efficiency);
        cfg.ccd_dark_rate = map.get_double("ccd.dark_rate", cfg.ccd_dark_rate);
        cfg.ccd_gate_width = map.get_double("ccd.gate_width", cfg.ccd_gate_width);
        cfg.ccd_gate_delay_offset = map.get_double("ccd.gate_delay_offset", cfg.ccd_gate_delay_offset);
        cfg.ccd_gates_per_exposure = map.get_long("ccd.gates_per_exposure", cfg.ccd_gates_per_exposure);
        cfg.scatter.angle1 = map.get_double("scatter.angle1_deg", 0.0) * std::numbers::pi / 180.0;
        cfg.scatter.rate1 = map.get_double("scatter.rate1", cfg.scatter.rate1);
        cfg.scatter.angle2 = map.get_double("scatter.angle2_deg", 3.3) * std::numbers::pi / 180.0;
        cfg.scatter.rate2 = map.get_double("scatter.rate2", cfg.scatter.rate2);
        cfg.spcm.dead_time = map.get_double("spcm.dead_time", cfg.spcm.dead_time);
        cfg.spcm.efficiency = map.get_double("spcm.efficiency", cfg.spcm.efficiency);
        cfg.sweep_photons = map.get_double_list("sweep.photons", cfg.sweep_photons);
        cfg.sweep_frames = map.get_double_list("sweep.frames", cfg.sweep_frames);
        cfg.decay_times = map.get_double_list("decay.times", cfg.decay_times);
        cfg.decay_frames = map.get_long("decay.frames", cfg.decay_frames);
        cfg.decay_detection = map.get_bool("decay.detection", cfg.decay_detection);
        cfg.decay_rms_speed = map.get_double("decay.rms_speed", cfg.decay_rms_speed);
        cfg.dual_frames = map.get_long("dual.frames", cfg.dual_frames);
        cfg.mask_glyph_height = map.get_double("mask.glyph_height", cfg.mask_glyph_height);
        cfg.master_seed = static_cast<std::uint64_t>(map.get_long("run.master_seed",
                                                                  static_cast<long>(cfg.master_seed)));
        map.reject_unknown_keys();
        cfg.validate();
        return cfg;
    }

    static ExperimentConfig from_file(const std::string& path)
    {
        return from_map(ConfigMap::parse_file(path));
    }

    void validate() const
    {
        auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
        if (grid_n < 2)
            fail("grid.n: need at least 2 samples per axis");
        if (!(grid_extent > 0.0))
            fail("grid.extent: must be positive");
        if (!(wavelength > 0.0))
            fail("optics.wavelength: must be positive");
        if (!(f1 > 0.0) || !(f2 > 0.0))
            fail("optics.f1/optics.f2: focal lengths must be positive");
        system.validate();
        cloud.validate();
        if (!(tau_coherence > 0.0))
            fail("storage.tau_coherence: must be positive");
        if (!(coupling_waist > 0.0))
            fail("medium.coupling_waist: must be positive");
        for (const Channel* ch : {&channel1, &channel2}) {
            const std::string prefix = ch == &channel1 ? "channel1" : "channel2";
            if (ch->write_efficiency < 0.0 || ch->write_efficiency > 1.0)
                fail(prefix + ".write_efficiency: must be within [0,1]");
            if (ch->read_efficiency < 0.0 || ch->read_efficiency > 1.0)
                fail(prefix + ".read_efficiency: must be within [0,1]");
            if (!(ch->angle_deg > 0.0) || ch->angle_deg >= 90.0)
                fail(prefix + ".angle_deg: must lie in (0, 90)");
        }
        timing.validate();
        if (!(photons_per_pulse > 0.0))
            fail("probe.photons_per_pulse: must be positive");
        if (ccd_pixels < 1)
            fail("ccd.pixels: must be positive");
        if (!(ccd_sensor_extent > 0.0))
            fail("ccd.sensor_extent: must be positive");
        if (ccd_quantum_efficiency < 0.0 || ccd_quantum_efficiency > 1.0)
            fail("ccd.quantum_efficiency: must be within [0,1]");
        if (ccd_dark_rate < 0.0)
            fail("ccd.dark_rate: must be nonnegative");
        if (!(ccd_gate_width > 0.0))
            fail("ccd.gate_width: must be positive");
        if (ccd_gates_per_exposure < 1)
            fail("ccd.gates_per_exposure: must be at least 1");
        scatter.validate();
        spcm.validate();
        for (double p : sweep_photons)
            if (!(p > 0.0))
                fail("sweep.photons: all values must be positive");
        if (sweep_frames.size() != sweep_photons.size())
            fail("sweep.frames: must list one frame count per sweep.photons entry");
        for (double f : sweep_frames)
            if (!(f >= 1.0) || f != std::floor(f))
                fail("sweep.frames: entries must be positive integers");
        if (decay_times.size() < 4)
            fail("decay.times: need at least 4 storage times for the fit");
        for (double t : decay_times)
            if (t < 0.0 || !std::isfinite(t))
                fail("decay.times: values must be finite and nonnegative");
        if (decay_frames < 1)
            fail("decay.frames: must be at least 1");
        if (decay_rms_speed < 0.0)
            fail("decay.rms_speed: must be nonnegative");
        if (dual_frames < 1)
            fail("dual.frames: must be at least 1");
        if (!(mask_glyph_height > 0.0))
            fail("mask.glyph_height: must be positive");
    }

    /// Canonical serialization: every effective key, sorted, one per line.
    std::string canonical_text() const
    {
        using config_detail::format_double;
        std::map<std::string, std::string> kv;
        kv["grid.n"] = std::to_string(grid_n);
        kv["grid.extent"] = format_double(grid_extent);
        kv["optics.wavelength"] = format_double(wavelength);
        kv["optics.f1"] = format_double(f1);
        kv["optics.f2"] = format_double(f2);
        kv["medium.coupling_rabi"] = format_double(system.omega_c);
        kv["medium.collective_coupling"] = format_double(system.g_sqrt_n);
        kv["medium.excited_decay"] = format_double(system.gamma_e);
        kv["medium.ground_dephasing"] = format_double(system.gamma_gs);
        kv["medium.optical_depth"] = format_double(system.optical_depth);
        kv["medium.coupling_waist"] = format_double(coupling_waist);
        kv["cloud.length"] = format_double(cloud.length);
        kv["cloud.transverse_size"] = format_double(cloud.transverse_size);
        kv["cloud.atom_count"] = format_double(cloud.atom_count);
        kv["cloud.rms_speed"] = format_double(cloud.rms_speed);
        kv["storage.tau_coherence"] = format_double(tau_coherence);
        auto dump_channel = [&kv](const std::string& prefix, const Channel& ch) {
            kv[prefix + ".angle_deg"] = format_double(ch.angle_deg);
            kv[prefix + ".write_efficiency"] = format_double(ch.write_efficiency);
            kv[prefix + ".read_efficiency"] = format_double(ch.read_efficiency);
            kv[prefix + ".mask"] = ch.mask;
        };
        dump_channel("channel1", channel1);
        dump_channel("channel2", channel2);
        kv["timing.repetition"] = format_double(timing.repetition);
        kv["timing.load_duration"] = format_double(timing.load_duration);
        kv["timing.window_duration"] = format_double(timing.window_duration);
        kv["timing.pulse_period"] = format_double(timing.pulse_period);
        kv["timing.probe_width"] = format_double(timing.probe_width);
        kv["timing.coupling_width"] = format_double(timing.coupling_width);
        kv["timing.storage_time"] = format_double(timing.storage_time);
        kv["timing.switch_off_fraction"] = format_double(timing.switch_off_fraction);
        kv["probe.photons_per_pulse"] = format_double(photons_per_pulse);
        kv["ccd.pixels"] = std::to_string(ccd_pixels);
        kv["ccd.sensor_extent"] = format_double(ccd_sensor_extent);
        kv["ccd.quantum_efficiency"] = format_double(ccd_quantum_efficiency);
        kv["ccd.dark_rate"] = format_double(ccd_dark_rate);
        kv["ccd.gate_width"] = format_double(ccd_gate_width);
        kv["ccd.gate_delay_offset"] = format_double(ccd_gate_delay_offset);
        kv["ccd.gates_per_exposure"] = std::to_string(ccd_gates_per_exposure);
        kv["scatter.angle1_deg"] = format_double(scatter.angle1 * 180.0 / std::numbers::pi);
        kv["scatter.rate1"] = format_double(scatter.rate1);
        kv["scatter.angle2_deg"] = format_double(scatter.angle2 * 180.0 / std::numbers::pi);
        kv["scatter.rate2"] = format_double(scatter.rate2);
        kv["spcm.dead_time"] = format_double(spcm.dead_time);
        kv["spcm.efficiency"] = format_double(spcm.efficiency);
        auto join = [](const std::vector<double>& values) {
            std::string out;
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (i)
                    out += ",";
                out += config_detail::format_double(values[i]);
            }
            return out;
        };
        kv["sweep.photons"] = join(sweep_photons);
        kv["sweep.frames"] = join(sweep_frames);
        kv["decay.times"] = join(decay_times);
        kv["decay.frames"] = std::to_string(decay_frames);
        kv["decay.detection"] = decay_detection ? "true" : "false";
        kv["decay.rms_speed"] = format_double(decay_rms_speed);
        kv["dual.frames"] = std::to_string(dual_frames);
        kv["mask.glyph_height"] = format_double(mask_glyph_height);
        kv["run.master_seed"] = std::to_string(master_seed);

        std::string out;
        for (const auto& [key, value] : kv)
            out += key + " = " + value + "\n";
        return out;
    }

    std::string snapshot_hash() const { return hash_string(canonical_text()); }

    // component accessors
    TransverseGrid mask_grid() const { return TransverseGrid::square(grid_n, grid_extent); }
    OpticalLayout optics() const { return OpticalLayout::four_f(f1, f2); }

    MediumConfig medium() const
    {
        MediumConfig m;
        m.system = system;
        m.cloud = cloud;
        m.tau_coherence = tau_coherence;
        return m;
    }

    StorageChannel storage_channel(const Channel& ch) const
    {
        StorageChannel out;
        out.label = ch.label;
        out.angle = ch.angle_deg * std::numbers::pi / 180.0;
        out.write_efficiency = ch.write_efficiency;
        out.read_efficiency = ch.read_efficiency;
        return out;
    }

    /// Reference propagation axis for the camera: halfway between the probes.
    double camera_reference_angle() const
    {
        return 0.5 * (channel1.angle_deg + channel2.angle_deg) * std::numbers::pi / 180.0;
    }

    CCDModel ccd_model() const
    {
        CCDModel ccd;
        ccd.pixels_x = ccd.pixels_y = ccd_pixels;
        ccd.sensor_width = ccd.sensor_height = ccd_sensor_extent;
        ccd.quantum_efficiency = ccd_quantum_efficiency;
        ccd.dark_rate = ccd_dark_rate;
        ccd.scatter_rate = scatter.rate_at(camera_reference_angle());
        ccd.gate_width = ccd_gate_width;
        ccd.gates_per_exposure = ccd_gates_per_exposure;
        return ccd;
    }
};

/// Derived quantities printed by the validate subcommand.
struct DerivedQuantities {
    int slots_per_window = 0;
    double pulses_per_second = 0.0;
    double mixing_angle = 0.0;
    double group_velocity = 0.0;
    double compressed_pulse_length = 0.0;
    double delta_k = 0.0;
    double camera_channel_offset = 0.0;
};

inline DerivedQuantities derive_quantities(const ExperimentConfig& cfg)
{
    DerivedQuantities d;
    d.slots_per_window = cfg.timing.slots_per_window();
    d.pulses_per_second = d.slots_per_window * cfg.timing.repetition;
    d.mixing_angle = dark_state_mixing(cfg.system);
    d.group_velocity = group_velocity(d.mixing_angle);
    d.compressed_pulse_length = d.group_velocity * cfg.timing.probe_width;
    const double k1 = cfg.storage_channel(cfg.channel1).k_transverse(cfg.wavelength);
    const double k2 = cfg.storage_channel(cfg.channel2).k_transverse(cfg.wavelength);
    d.delta_k = std::abs(k2 - k1);
    const double k = 2.0 * std::numbers::pi / cfg.wavelength;
    d.camera_channel_offset = cfg.f2 * d.delta_k / k;
    return d;
}

} // namespace eitmem
