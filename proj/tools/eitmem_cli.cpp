// Command-line runner: named scenarios over a key=value configuration file,
// writing images, CSV tables and a JSON-lines manifest per run.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "eitmem/config.hpp"
#include "eitmem/scenario.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    long frames = 0;
    bool frames_set = false;
};

void add_common(CLI::App* cmd, CommonOptions& options, bool needs_out)
{
    cmd->add_option("--config", options.config_path, "configuration file (defaults used if omitted)");
    auto* out = cmd->add_option("--out", options.out_dir, "output directory");
    if (needs_out)
        out->required();
    cmd->add_option("--seed", options.seed, "master seed override")
        ->each([&options](const std::string&) { options.seed_set = true; });
    cmd->add_option("--frames", options.frames, "frames-per-accumulation override")
        ->each([&options](const std::string&) { options.frames_set = true; });
}

eitmem::ExperimentConfig load_config(const CommonOptions& options)
{
    eitmem::ExperimentConfig cfg = options.config_path.empty()
        ? eitmem::ExperimentConfig{}
        : eitmem::ExperimentConfig::from_file(options.config_path);
    if (options.seed_set)
        cfg.master_seed = options.seed;
    if (options.frames_set) {
        if (options.frames < 1)
            throw std::invalid_argument("--frames must be at least 1");
        cfg.dual_frames = options.frames;
        cfg.decay_frames = options.frames;
        for (auto& f : cfg.sweep_frames)
            f = static_cast<double>(options.frames);
    }
    cfg.validate();
    return cfg;
}

void report_files(const eitmem::ScenarioReport& report, const std::string& out_dir)
{
    std::cout << report.scenario << ": wrote " << report.files.size() << " files to " << out_dir
              << " (config " << report.config_hash << ")\n";
}

int fail_with(const std::string& kind, const std::string& message)
{
    nlohmann::ordered_json error;
    error["error"] = kind;
    error["message"] = message;
    std::cerr << error.dump() << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"eitmem - multimode EIT image-memory simulator"};
    app.require_subcommand(1);

    CommonOptions temporal_opt, dual_opt, sweep_opt, decay_opt, validate_opt;
    std::string mask1, mask2, enable = "both";

    CLI::App* cmd_temporal =
        app.add_subcommand("temporal", "leakage and retrieved traces with storage efficiencies");
    add_common(cmd_temporal, temporal_opt, true);

    CLI::App* cmd_dual = app.add_subcommand("dual-image", "two-channel storage and cross-talk study");
    add_common(cmd_dual, dual_opt, true);
    cmd_dual->add_option("--mask1", mask1, "channel 1 mask (glyph:<digit> or PGM path)");
    cmd_dual->add_option("--mask2", mask2, "channel 2 mask (glyph:<digit> or PGM path)");
    cmd_dual->add_option("--enable", enable, "channels to store: 1, 2 or both")
        ->check(CLI::IsMember({"1", "2", "both"}));

    CLI::App* cmd_sweep =
        app.add_subcommand("photon-sweep", "photon-number sweep with visibility/similarity metrics");
    add_common(cmd_sweep, sweep_opt, true);

    CLI::App* cmd_decay = app.add_subcommand("decay", "storage-time sweep with exponential fit");
    add_common(cmd_decay, decay_opt, true);

    CLI::App* cmd_validate =
        app.add_subcommand("validate", "validate a configuration and echo it canonically");
    add_common(cmd_validate, validate_opt, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        std::ostringstream message;
        message << e.what();
        app.exit(e, std::cout, std::cerr);
        return fail_with("usage", message.str());
    }

    try {
        if (cmd_temporal->parsed()) {
            const auto cfg = load_config(temporal_opt);
            const auto result = eitmem::run_scenario_temporal(cfg, temporal_opt.out_dir);
            for (const auto& channel : result.channels)
                std::printf("%s: leakage %.6g photons, retrieved %.6g photons, efficiency %.6g\n",
                            channel.label.c_str(), channel.leakage_energy, channel.retrieved_energy,
                            channel.efficiency);
            report_files(result.report, temporal_opt.out_dir);
        } else if (cmd_dual->parsed()) {
            const auto cfg = load_config(dual_opt);
            const int enable_mask = enable == "1" ? 1 : enable == "2" ? 2 : 3;
            const auto result =
                eitmem::run_scenario_dual_image(cfg, mask1, mask2, enable_mask, dual_opt.out_dir);
            std::printf("cross-talk matrix (retrieved photons):\n");
            for (int a = 0; a < 2; ++a)
                std::printf("  stored probe%d -> [%.6g, %.6g]\n", a + 1, result.matrix[a][0],
                            result.matrix[a][1]);
            report_files(result.report, dual_opt.out_dir);
        } else if (cmd_sweep->parsed()) {
            const auto cfg = load_config(sweep_opt);
            const auto result = eitmem::run_scenario_photon_sweep(cfg, sweep_opt.out_dir);
            for (const auto& row : result.rows)
                std::printf("%.6g photons (%s): V = %.4f +- %.4f, R = %.4f +- %.4f\n", row.photons,
                            row.label.c_str(), row.visibility, row.visibility_std, row.similarity,
                            row.similarity_std);
            report_files(result.report, sweep_opt.out_dir);
        } else if (cmd_decay->parsed()) {
            const auto cfg = load_config(decay_opt);
            const auto result = eitmem::run_scenario_decay(cfg, decay_opt.out_dir);
            for (const auto& fit : result.fits)
                std::printf("%s: tau = %.6g s (+- %.2g), y0 = %.6g, A = %.6g\n", fit.label.c_str(),
                            fit.fit.tau, fit.fit.ci_tau, fit.fit.y0, fit.fit.amplitude);
            report_files(result.report, decay_opt.out_dir);
        } else if (cmd_validate->parsed()) {
            const auto cfg = load_config(validate_opt);
            const auto derived = eitmem::derive_quantities(cfg);
            std::cout << cfg.canonical_text();
            std::printf("# derived\n");
            std::printf("# slots_per_window = %d\n", derived.slots_per_window);
            std::printf("# probe_pulses_per_second = %.10g\n", derived.pulses_per_second);
            std::printf("# polariton_mixing_angle_rad = %.10g\n", derived.mixing_angle);
            std::printf("# group_velocity_m_per_s = %.10g\n", derived.group_velocity);
            std::printf("# compressed_pulse_length_m = %.10g\n", derived.compressed_pulse_length);
            std::printf("# channel_delta_k_rad_per_m = %.10g\n", derived.delta_k);
            std::printf("# camera_channel_offset_m = %.10g\n", derived.camera_channel_offset);
            std::printf("# config_hash = %s\n", cfg.snapshot_hash().c_str());
        }
    } catch (const std::invalid_argument& e) {
        return fail_with("config_invalid", e.what());
    } catch (const std::exception& e) {
        return fail_with("runtime", e.what());
    }
    return 0;
}
