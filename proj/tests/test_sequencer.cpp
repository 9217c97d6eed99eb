#include <doctest.h>

#include <cmath>

#include "eitmem/propagation.hpp"
#include "eitmem/rng.hpp"
#include "eitmem/sequencer.hpp"

using namespace eitmem;

namespace {

ComplexFieldGrid blob_image(const TransverseGrid& grid, double photons)
{
    auto field = gaussian_beam(grid, grid.width() / 6.0, 795e-9, photons);
    return field;
}

MediumConfig slow_medium()
{
    MediumConfig medium;
    // defaults give v_g about 5.7e4 m/s, transit 526 ns
    return medium;
}

std::vector<ChannelInput> two_channels(const TransverseGrid& grid)
{
    StorageChannel ch1;
    ch1.label = "probe1";
    ch1.angle = 3.3 * std::numbers::pi / 180.0;
    StorageChannel ch2 = ch1;
    ch2.label = "probe2";
    ch2.angle = 3.75 * std::numbers::pi / 180.0;
    return {{ch1, blob_image(grid, 1.0)}, {ch2, blob_image(grid, 1.0)}};
}

} // namespace

TEST_SUITE("sequencer")
{
    TEST_CASE("default timing gives 50 slots and 50000 pulses per second")
    {
        const TimingConfig cfg;
        const PulseSchedule schedule = build_schedule(cfg);
        CHECK(schedule.slots_per_window == 50);
        CHECK(schedule.pulses_per_second == doctest::Approx(50000.0).epsilon(1e-12));
        CHECK(schedule.slots.size() == 50);
    }

    TEST_CASE("window equal to one period gives one slot")
    {
        TimingConfig cfg;
        cfg.window_duration = cfg.pulse_period;
        CHECK(build_schedule(cfg).slots_per_window == 1);
    }

    TEST_CASE("window shorter than one period is rejected by name")
    {
        TimingConfig cfg;
        cfg.window_duration = cfg.pulse_period * 0.9;
        CHECK_THROWS_WITH_AS(build_schedule(cfg),
                             doctest::Contains("window_duration"), std::invalid_argument);
    }

    TEST_CASE("timing invariants are enforced with named errors")
    {
        TimingConfig cfg;
        cfg.load_duration = 900e-6;
        cfg.window_duration = 200e-6;
        CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("load_duration"),
                             std::invalid_argument);

        TimingConfig wide;
        wide.probe_width = wide.pulse_period;
        CHECK_THROWS_WITH_AS(wide.validate(), doctest::Contains("probe_width"),
                             std::invalid_argument);

        TimingConfig frac;
        frac.switch_off_fraction = 0.0;
        CHECK_THROWS_WITH_AS(frac.validate(), doctest::Contains("switch_off_fraction"),
                             std::invalid_argument);
    }

    TEST_CASE("slots are ordered, non-overlapping and hold the storage time")
    {
        const TimingConfig cfg;
        const PulseSchedule schedule = build_schedule(cfg);
        for (std::size_t i = 0; i < schedule.slots.size(); ++i) {
            const auto& slot = schedule.slots[i];
            CHECK(slot.probe_on < slot.coupling_off);
            CHECK(slot.coupling_off < slot.read_on);
            CHECK(slot.read_on - slot.coupling_off == doctest::Approx(cfg.storage_time).epsilon(1e-12));
            CHECK(slot.read_on < slot.coupling_on + cfg.pulse_period);
            if (i > 0)
                CHECK(slot.coupling_on >= schedule.slots[i - 1].read_on);
        }
    }

    TEST_CASE("zero efficiency retrieves nothing but still leaks")
    {
        const TransverseGrid grid = TransverseGrid::square(16, 1.6e-3);
        const TimingConfig timing;
        const auto schedule = build_schedule(timing);
        auto channels = two_channels(grid);
        channels[0].channel.read_efficiency = 0.0;
        const auto records = run_trial(schedule.slots[0], slow_medium(), channels, 100.0, timing);
        CHECK(records[0].retrieved_energy == 0.0);
        CHECK(records[0].leakage_energy > 0.0);
    }

    TEST_CASE("calibrated efficiencies reproduce the 0.35 and 0.23 ratios")
    {
        const TransverseGrid grid = TransverseGrid::square(16, 1.6e-3);
        const TimingConfig timing;
        const auto schedule = build_schedule(timing);
        MediumConfig medium = slow_medium();
        auto channels = two_channels(grid);
        const double decay = std::exp(-timing.storage_time / medium.tau_coherence);
        channels[0].channel.write_efficiency = 0.7;
        channels[0].channel.read_efficiency = 0.35 / (0.7 * decay);
        channels[1].channel.write_efficiency = 0.7;
        channels[1].channel.read_efficiency = 0.23 / (0.7 * decay);
        const auto records = run_trial(schedule.slots[0], medium, channels, 1000.0, timing);
        CHECK(storage_efficiency(records[0]) == doctest::Approx(0.35).epsilon(1e-9));
        CHECK(storage_efficiency(records[1]) == doctest::Approx(0.23).epsilon(1e-9));
    }

    TEST_CASE("doubling the storage time scales retrieval by the decay ratio")
    {
        // oracle: closed-form exp(-dt/tau) ratio
        const TransverseGrid grid = TransverseGrid::square(16, 1.6e-3);
        TimingConfig timing;
        const auto schedule = build_schedule(timing);
        const auto channels = two_channels(grid);
        MediumConfig medium = slow_medium();

        TimingConfig doubled = timing;
        doubled.storage_time = 2.0 * timing.storage_time;
        auto slot2 = schedule.slots[0];
        slot2.read_on = slot2.coupling_off + doubled.storage_time;

        const auto base = run_trial(schedule.slots[0], medium, channels, 10.0, timing);
        const auto longer = run_trial(slot2, medium, channels, 10.0, doubled);
        const double expected = std::exp(-timing.storage_time / medium.tau_coherence);
        CHECK(longer[0].retrieved_energy / base[0].retrieved_energy ==
              doctest::Approx(expected).epsilon(1e-9));
    }

    TEST_CASE("run_trial is bit-reproducible")
    {
        const TransverseGrid grid = TransverseGrid::square(16, 1.6e-3);
        const TimingConfig timing;
        const auto schedule = build_schedule(timing);
        const auto channels = two_channels(grid);
        const auto a = run_trial(schedule.slots[0], slow_medium(), channels, 123.0, timing);
        const auto b = run_trial(schedule.slots[0], slow_medium(), channels, 123.0, timing);
        REQUIRE(a.size() == b.size());
        for (std::size_t c = 0; c < a.size(); ++c) {
            CHECK(a[c].retrieved_energy == b[c].retrieved_energy);
            CHECK(a[c].leakage_energy == b[c].leakage_energy);
            CHECK(a[c].retrieved_field.amplitude == b[c].retrieved_field.amplitude);
        }
    }

    TEST_CASE("storage efficiency is invariant under input rescaling")
    {
        const TransverseGrid grid = TransverseGrid::square(16, 1.6e-3);
        const TimingConfig timing;
        const auto schedule = build_schedule(timing);
        const auto channels = two_channels(grid);
        const auto lo = run_trial(schedule.slots[0], slow_medium(), channels, 1.0, timing);
        const auto hi = run_trial(schedule.slots[0], slow_medium(), channels, 305.0, timing);
        CHECK(storage_efficiency(lo[0]) == doctest::Approx(storage_efficiency(hi[0])).epsilon(1e-12));
    }

    TEST_CASE("storage efficiency formula and edge cases")
    {
        TrialRecord rec;
        rec.leakage_energy = 100.0;
        rec.retrieved_energy = 23.0;
        CHECK(storage_efficiency(rec) == doctest::Approx(0.23).epsilon(1e-12));
        rec.retrieved_energy = 0.0;
        CHECK(storage_efficiency(rec) == 0.0);
        rec.retrieved_energy = 100.0;
        CHECK(storage_efficiency(rec) == doctest::Approx(1.0).epsilon(1e-12));
        rec.leakage_energy = 0.0;
        CHECK_THROWS_AS(storage_efficiency(rec), std::invalid_argument);
    }
}
