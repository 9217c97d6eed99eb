#include <doctest.h>

#include <cmath>
#include <string>

#include "eitmem/config.hpp"

using namespace eitmem;

TEST_SUITE("config")
{
    TEST_CASE("defaults validate and derive the headline quantities")
    {
        const ExperimentConfig cfg;
        CHECK_NOTHROW(cfg.validate());
        const DerivedQuantities derived = derive_quantities(cfg);
        CHECK(derived.slots_per_window == 50);
        CHECK(derived.pulses_per_second == doctest::Approx(50000.0));
        CHECK(derived.group_velocity < 6.0e4);
        CHECK(derived.compressed_pulse_length <= cfg.cloud.length);
        CHECK(derived.delta_k == doctest::Approx(6.2e4).epsilon(0.01));
        CHECK(derived.camera_channel_offset == doctest::Approx(3.92e-3).epsilon(0.01));
    }

    TEST_CASE("the shipped config file matches the built-in defaults")
    {
        const ExperimentConfig shipped =
            ExperimentConfig::from_file(std::string(EITMEM_SOURCE_DIR) + "/configs/default.cfg");
        const ExperimentConfig defaults;
        CHECK(shipped.canonical_text() == defaults.canonical_text());
        CHECK(shipped.snapshot_hash() == defaults.snapshot_hash());
    }

    TEST_CASE("canonical echo round-trips")
    {
        const ExperimentConfig cfg;
        const std::string canon = cfg.canonical_text();
        const ExperimentConfig again = ExperimentConfig::from_map(ConfigMap::parse(canon));
        CHECK(again.canonical_text() == canon);
    }

    TEST_CASE("parser reports the offending line")
    {
        CHECK_THROWS_WITH_AS(ConfigMap::parse("grid.n = 16\nbogus line\n"),
                             doctest::Contains("line 2"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(ConfigMap::parse("a = 1\na = 2\n"), doctest::Contains("duplicate"),
                             std::invalid_argument);
    }

    TEST_CASE("unknown keys are rejected")
    {
        CHECK_THROWS_WITH_AS(ExperimentConfig::from_map(ConfigMap::parse("grid.m = 16\n")),
                             doctest::Contains("grid.m"), std::invalid_argument);
    }

    TEST_CASE("invariant violations name the field")
    {
        CHECK_THROWS_WITH_AS(
            ExperimentConfig::from_map(ConfigMap::parse("ccd.quantum_efficiency = 1.5\n")),
            doctest::Contains("ccd.quantum_efficiency"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(
            ExperimentConfig::from_map(ConfigMap::parse("timing.window_duration = 1e-6\n")),
            doctest::Contains("window_duration"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(
            ExperimentConfig::from_map(ConfigMap::parse("sweep.photons = 10,0\n")),
            doctest::Contains("sweep.photons"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(ExperimentConfig::from_map(ConfigMap::parse("sweep.photons = 10,20\n")),
                             doctest::Contains("sweep.frames"), std::invalid_argument);
    }

    TEST_CASE("lists and booleans parse")
    {
        auto map = ConfigMap::parse("decay.detection = false\nsweep.photons = 5,2.5\n"
                                    "sweep.frames = 10,10\n");
        const ExperimentConfig cfg = ExperimentConfig::from_map(std::move(map));
        CHECK_FALSE(cfg.decay_detection);
        REQUIRE(cfg.sweep_photons.size() == 2);
        CHECK(cfg.sweep_photons[1] == doctest::Approx(2.5));
    }

    TEST_CASE("snapshot hash tracks content")
    {
        const ExperimentConfig a;
        ExperimentConfig b;
        b.photons_per_pulse = 999.0;
        CHECK(a.snapshot_hash() != b.snapshot_hash());
        CHECK(a.snapshot_hash() == ExperimentConfig{}.snapshot_hash());
        CHECK(a.snapshot_hash().size() == 16);
    }

    TEST_CASE("comments and blank lines are ignored")
    {
        const auto cfg = ExperimentConfig::from_map(
            ConfigMap::parse("# a comment\n\n  grid.n = 32  # trailing comment\n"));
        CHECK(cfg.grid_n == 32);
    }
}
