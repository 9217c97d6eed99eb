// Experiment timing and trial orchestration: the pulse schedule of one
// experimental window, the write/hold/read cycle against the medium, and the
// leakage-referenced storage efficiency.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "eitmem/grid.hpp"
#include "eitmem/medium.hpp"

namespace eitmem {

/// All experiment timing. Durations in seconds, repetition in Hz.
/// storage_time is an independent knob: the schedule places the read event
/// storage_time after the coupling switch-off rather than deriving it from
/// pulse_period - coupling_width (the two disagree slightly in practice).
struct TimingConfig {
    double repetition = 1000.0;
    double load_duration = 800e-6;
    double window_duration = 176.8e-6; // 50 pulse periods
    double pulse_period = 3.536e-6;
    double probe_width = 500e-9;
    double coupling_width = 1.61e-6;
    double storage_time = 1.826e-6;
    double switch_off_fraction = 0.5; // probe fraction elapsed at coupling switch-off

    void validate() const
    {
        auto fail = [](const std::string& what) { throw std::invalid_argument("TimingConfig: " + what); };
        if (!(repetition > 0.0))
            fail("timing.repetition must be positive");
        if (!(load_duration > 0.0) || !(window_duration > 0.0) || !(pulse_period > 0.0))
            fail("timing durations must be positive");
        if (load_duration + window_duration > 1.0 / repetition * (1.0 + 1e-12))
            fail("timing.load_duration + timing.window_duration exceeds the repetition period");
        if (!(probe_width > 0.0) || probe_width >= pulse_period)
            fail("timing.probe_width must lie in (0, pulse_period)");
        if (!(coupling_width > 0.0) || coupling_width >= pulse_period)
            fail("timing.coupling_width must lie in (0, pulse_period)");
        if (storage_time < 0.0 || storage_time >= pulse_period)
            fail("timing.storage_time must lie in [0, pulse_period)");
        if (!(switch_off_fraction > 0.0) || switch_off_fraction > 1.0)
            fail("timing.switch_off_fraction must lie in (0, 1]");
        if (switch_off_fraction * probe_width > coupling_width)
            fail("timing.switch_off_fraction * probe_width exceeds coupling_width");
        if (slots_per_window() < 1)
            fail("timing.window_duration is shorter than one pulse_period (zero slots)");
    }

    int slots_per_window() const
    {
        return static_cast<int>(std::floor(window_duration / pulse_period * (1.0 + 1e-12) + 1e-12));
    }
};

/// One probe/coupling slot; times relative to the window start.
struct ScheduleSlot {
    double probe_on = 0.0;
    double probe_off = 0.0;
    double coupling_on = 0.0;
    double coupling_off = 0.0;
    double read_on = 0.0;
};

struct PulseSchedule {
    std::vector<ScheduleSlot> slots;
    int slots_per_window = 0;
    double pulses_per_second = 0.0;
};

/// Build the schedule: the coupling back-edge writes, the next front-edge
/// (placed storage_time later) reads.
inline PulseSchedule build_schedule(const TimingConfig& cfg)
{
    cfg.validate();
    const int n_slots = cfg.slots_per_window();
    if (n_slots < 1)
        throw std::invalid_argument(
            "TimingConfig: timing.window_duration is shorter than one pulse_period (zero slots)");

    PulseSchedule schedule;
    schedule.slots_per_window = n_slots;
    schedule.pulses_per_second = n_slots * cfg.repetition;
    schedule.slots.reserve(static_cast<std::size_t>(n_slots));
    for (int i = 0; i < n_slots; ++i) {
        ScheduleSlot slot;
        slot.coupling_on = i * cfg.pulse_period;
        slot.coupling_off = slot.coupling_on + cfg.coupling_width;
        slot.probe_on = slot.coupling_off - cfg.switch_off_fraction * cfg.probe_width;
        slot.probe_off = slot.probe_on + cfg.probe_width;
        slot.read_on = slot.coupling_off + cfg.storage_time;
        schedule.slots.push_back(slot);
    }
    return schedule;
}

/// Medium configuration shared by all channels of one run.
struct MediumConfig {
    LambdaSystem system;
    AtomicCloud cloud;
    double tau_coherence = 20e-6;

    double group_velocity() const { return eitmem::group_velocity(dark_state_mixing(system)); }
};

/// One channel of a trial: beam geometry plus the probe image at the cloud
/// plane (pattern only; run_trial rescales it to the requested pulse energy).
struct ChannelInput {
    StorageChannel channel;
    ComplexFieldGrid cloud_image;
};

/// Everything measured in one write/hold/read cycle of one channel.
struct TrialRecord {
    std::string label;
    double input_energy = 0.0;
    double leakage_energy = 0.0;
    double committed_energy = 0.0;
    double stored_energy = 0.0;
    double absorbed_energy = 0.0;
    double retrieved_energy = 0.0;
    double storage_time = 0.0;
    ComplexFieldGrid leakage_field;    // at the cloud plane
    ComplexFieldGrid retrieved_field;  // at the cloud plane
    double window_start = 0.0;         // stored emission-time window (pulse-local)
    double window_end = 0.0;
    double probe_on = 0.0;             // slot times for trace reconstruction
    double probe_off = 0.0;
    double read_on = 0.0;
};

/// Run one slot against the medium for each channel. Pure function of its
/// inputs; all stochasticity lives downstream in detection.
inline std::vector<TrialRecord> run_trial(const ScheduleSlot& slot, const MediumConfig& medium,
                                          const std::vector<ChannelInput>& channels,
                                          double photons_per_pulse, const TimingConfig& timing)
{
    if (photons_per_pulse < 0.0)
        throw std::invalid_argument("run_trial: photons_per_pulse must be nonnegative");
    medium.system.validate();
    medium.cloud.validate();
    const double v_g = medium.group_velocity();

    std::vector<TrialRecord> records;
    records.reserve(channels.size());
    for (const auto& input : channels) {
        const double image_energy = energy(input.cloud_image);
        ComplexFieldGrid image = input.cloud_image;
        if (photons_per_pulse > 0.0 && image_energy > 0.0) {
            const double scale = std::sqrt(photons_per_pulse / image_energy);
            for (auto& a : image.amplitude)
                a *= scale;
        } else if (photons_per_pulse == 0.0) {
            for (auto& a : image.amplitude)
                a = complexd(0.0, 0.0);
        }

        const PulseEnvelope envelope = PulseEnvelope::square(0.0, timing.probe_width);
        const double switch_off_local = slot.coupling_off - slot.probe_on;
        WriteResult written = write_spinwave(envelope, image, input.channel, v_g, medium.cloud,
                                             switch_off_local, medium.tau_coherence);
        const double hold = slot.read_on - slot.coupling_off;
        const SpinWave held = evolve_spinwave(written.wave, hold, medium.cloud);
        const ComplexFieldGrid retrieved = read_spinwave(held, input.channel);

        TrialRecord rec;
        rec.label = input.channel.label;
        rec.input_energy = energy(image);
        rec.leakage_energy = written.leakage_energy;
        rec.committed_energy = written.committed_energy;
        rec.stored_energy = written.stored_energy;
        rec.absorbed_energy = written.absorbed_energy;
        rec.retrieved_energy = energy(retrieved);
        rec.storage_time = hold;
        rec.leakage_field = written.leakage_field;
        rec.retrieved_field = retrieved;
        rec.window_start = written.window_start;
        rec.window_end = written.window_end;
        rec.probe_on = slot.probe_on;
        rec.probe_off = slot.probe_off;
        rec.read_on = slot.read_on;
        records.push_back(std::move(rec));
    }
    return records;
}

/// Storage efficiency, leakage-referenced: retrieved / leakage.
inline double storage_efficiency(const TrialRecord& rec)
{
    if (!(rec.leakage_energy > 0.0))
        throw std::invalid_argument("storage_efficiency: undefined for zero leakage energy");
    return rec.retrieved_energy / rec.leakage_energy;
}

/// Input-referenced efficiency, reported alongside but never used as the
/// headline number.
inline double input_referenced_efficiency(const TrialRecord& rec)
{
    if (!(rec.input_energy > 0.0))
        throw std::invalid_argument("input_referenced_efficiency: zero input energy");
    return rec.retrieved_energy / rec.input_energy;
}

} // namespace eitmem
