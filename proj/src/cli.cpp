#include "samedge/cli.hpp"

#include "samedge/config.hpp"
#include "samedge/harness.hpp"
#include "samedge/log_io.hpp"
#include "samedge/quadratic_lab.hpp"
#include "samedge/rng.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>

namespace samedge {

namespace {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    if (dynamic_cast<const std::ios_base::failure*>(&e)) return kExitIo;
    return kExitUsage;
}

ExperimentConfig load_with_overrides(const std::string& config_path,
                                     const std::vector<KeyValue>& overrides) {
    ExperimentConfig config = load_config(config_path);
    for (const auto& [key, value] : overrides) apply_override(config, key, value);
    return config;
}

void print_report(const char* name, const SignLawReport& report) {
    std::printf("%s %s checked=%ld mismatches=%ld skipped=%ld\n", name,
                report.passed() ? "PASS" : "FAIL", report.checked, report.mismatches,
                report.boundary_skips);
}

}  // namespace

std::string default_log_dir() {
    const char* dir = std::getenv("SAMEDGE_LOG_DIR");
    return dir && *dir ? dir : ".";
}

int cmd_run(const std::string& config_path, const std::vector<KeyValue>& overrides) {
    try {
        ExperimentConfig config = load_with_overrides(config_path, overrides);
        if (config.log_path.empty()) {
            config.log_path = (std::filesystem::path(default_log_dir()) / "run.csv").string();
        }
        validate(config);
        const RunResult result = run_experiment(config);
        write_log(config.log_path, result.records, config.spectral.k);
        const StepRecord& final_record = result.records.back();
        std::printf("wrote %s: %zu records, final loss %.6g%s\n", config.log_path.c_str(),
                    result.records.size(), final_record.loss,
                    result.diverged ? " (diverged)" : "");
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run: %s\n", e.what());
        return exit_code_for(e);
    }
}

int cmd_grid(const std::string& config_path, const std::vector<KeyValue>& overrides,
             const std::vector<double>& etas, const std::vector<double>& rhos,
             const std::string& out_dir) {
    try {
        const ExperimentConfig base = load_with_overrides(config_path, overrides);
        const GridResult grid = run_grid(base, etas, rhos, out_dir);
        for (const GridEntry& entry : grid.entries) {
            std::printf("eta=%g rho=%g %s -> %s\n", entry.eta, entry.rho, entry.log_name.c_str(),
                        entry.status.c_str());
        }
        std::printf("wrote %s\n", grid.manifest_path.c_str());
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "grid: %s\n", e.what());
        return exit_code_for(e);
    }
}

int cmd_verify(long trials, std::uint64_t seed) {
    if (trials < 1) {
        std::fprintf(stderr, "verify: trials must be >= 1\n");
        return kExitUsage;
    }
    const SignLawReport prop1 = verify_gd_prop_sign(16, trials, mix_seed(seed, 101));
    const SignLawReport prop3 = verify_prop_sign(16, trials, mix_seed(seed, 102));
    const SignLawReport eq3 = verify_closed_form(16, trials, mix_seed(seed, 103));
    const SignLawReport bisect = verify_edge_bisection(10);
    print_report("prop1_sign", prop1);
    print_report("prop3_sign", prop3);
    print_report("eq3_closed_form", eq3);
    print_report("edge_bisection", bisect);
    const bool ok = prop1.passed() && prop3.passed() && eq3.passed() && bisect.passed();
    return ok ? kExitOk : kExitVerifyFail;
}

int cmd_plot(const PlotSpec& spec) {
    try {
        write_plot(spec);
        std::printf("wrote %s\n", spec.output.c_str());
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "plot: %s\n", e.what());
        return exit_code_for(e);
    }
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Edge-of-stability lab for GD and SAM"};
    app.require_subcommand(1);

    // run / grid share the config file + per-key override flags
    std::string run_config, grid_config;
    std::map<std::string, std::string> run_overrides, grid_overrides;

    CLI::App* run = app.add_subcommand("run", "Run one experiment and write its CSV log");
    run->add_option("config", run_config, "INI config file")->required();
    CLI::App* grid = app.add_subcommand("grid", "Run an eta x rho grid of experiments");
    grid->add_option("config", grid_config, "INI config file")->required();
    for (const std::string& key : config_keys()) {
        run->add_option("--" + key, run_overrides[key], "override config key " + key);
        grid->add_option("--" + key, grid_overrides[key], "override config key " + key);
    }

    std::vector<double> etas, rhos;
    std::string grid_out = default_log_dir();
    grid->add_option("--eta", etas, "learning rates to sweep")->delimiter(',')->required();
    grid->add_option("--rho", rhos, "SAM radii to sweep")->delimiter(',')->required();
    grid->add_option("--out", grid_out, "output directory for logs and manifest");

    long trials = 10000;
    std::uint64_t seed = 1;
    CLI::App* verify =
        app.add_subcommand("verify", "Randomized verification of the stability propositions");
    verify->add_option("--trials", trials, "random trials per check");
    verify->add_option("--seed", seed, "RNG seed");

    PlotSpec plot_spec;
    std::string yscale = "linear";
    CLI::App* plot = app.add_subcommand("plot", "Render an SVG line chart from run logs");
    plot->add_option("logs", plot_spec.inputs, "input CSV logs")->required();
    plot->add_option("--series", plot_spec.series, "column names to draw")
        ->delimiter(',')
        ->required();
    plot->add_option("--yscale", yscale, "linear or log")
        ->check(CLI::IsMember({"linear", "log"}));
    plot->add_option("--out", plot_spec.output, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const auto taken_overrides = [](CLI::App* sub, std::map<std::string, std::string>& values) {
        std::vector<KeyValue> out;
        for (auto& [key, value] : values) {
            if (sub->count("--" + key) > 0) out.emplace_back(key, value);
        }
        return out;
    };

    if (run->parsed()) return cmd_run(run_config, taken_overrides(run, run_overrides));
    if (grid->parsed()) {
        return cmd_grid(grid_config, taken_overrides(grid, grid_overrides), etas, rhos, grid_out);
    }
    if (verify->parsed()) return cmd_verify(trials, seed);
    if (plot->parsed()) {
        plot_spec.yscale = yscale == "log" ? YScale::log_scale : YScale::linear;
        return cmd_plot(plot_spec);
    }
    return kExitUsage;
}

}  // namespace samedge
