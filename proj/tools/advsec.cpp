// advsec command-line entry point.
//
// advsec <train|attack|seceval|poison|explain> --config <path>
//        [--out <dir>] [--workers N] [--seed N] [--log-level L]
//
// Exit codes: 0 success, 2 config error, 3 runtime error.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "advsec/error.hpp"
#include "advsec/io.hpp"
#include "advsec/runner.hpp"
#include "advsec/version.hpp"

namespace {

int run_subcommand(const std::string& command, const std::string& config_path,
                   const advsec::CliOverrides& overrides) {
    std::string config_text;
    try {
        config_text = advsec::read_text_file(config_path);
    } catch (const advsec::Error&) {
        std::cerr << "config error: cannot read config file '" << config_path << "'\n";
        return 2;
    }
    try {
        advsec::run_command(command, config_text, overrides);
        return 0;
    } catch (const advsec::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const advsec::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial-robustness evaluation toolkit"};
    app.set_version_flag("--version", std::string("advsec ") + advsec::kLibraryVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string log_level;
    int workers = 0;
    long long seed = -1;

    const char* names[] = {"train", "attack", "seceval", "poison", "explain"};
    const char* descriptions[] = {
        "fit a model and write it to a model file",
        "run evasion attacks on test samples and plot their progress",
        "sweep an epsilon grid and write the security evaluation curve",
        "run training-data poisoning against a convex victim",
        "compute per-feature or per-training-point explanations",
    };
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descriptions[i]);
        sub->add_option("--config", config_path, "experiment config file (JSON)")
            ->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--workers", workers, "worker threads (overrides config)");
        sub->add_option("--seed", seed, "re-seed all stochastic components");
        sub->add_option("--log-level", log_level, "debug|info|warn|error");
    }

    CLI11_PARSE(app, argc, argv);

    advsec::CliOverrides overrides;
    if (!out_dir.empty()) overrides.out = out_dir;
    if (workers > 0) overrides.workers = workers;
    if (seed >= 0) overrides.seed = static_cast<std::uint64_t>(seed);
    if (!log_level.empty()) overrides.log_level = log_level;

    for (int i = 0; i < 5; ++i)
        if (app.got_subcommand(names[i])) return run_subcommand(names[i], config_path, overrides);
    return 2;  // unreachable: require_subcommand enforces one
}
