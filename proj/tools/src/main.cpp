#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "gkb/harness/config.hpp"
#include "gkb/harness/experiment.hpp"
#include "gkb/harness/io.hpp"
#include "gkb/harness/suites.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int workers = 1;
    std::optional<double> bound_multiplier;
};

void add_common(CLI::App* sub, Common& opts)
{
    sub->add_option("config", opts.config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Override the master seed");
    sub->add_option("--out", opts.out, "Override the output directory");
    sub->add_option("--workers", opts.workers, "Worker threads for replications")
        ->check(CLI::Range(1, 1024))
        ->default_val(1);
}

gkb::harness::ExperimentConfig load(const Common& opts)
{
    auto config = gkb::harness::load_config(opts.config_path);
    if (opts.seed) {
        config.seed = *opts.seed;
        config.source["seed"] = *opts.seed;
    }
    if (opts.out) {
        config.output_dir = *opts.out;
        config.source["output_dir"] = *opts.out;
    }
    if (opts.bound_multiplier) {
        if (!(*opts.bound_multiplier > 0.0)) {
            throw gkb::harness::ConfigError("--bound-multiplier must be positive");
        }
        config.bound_multiplier = *opts.bound_multiplier;
    }
    return config;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Generalized kernelized bandits: experiments and verification"};
    app.set_version_flag("--version", gkb::harness::tool_version());
    app.require_subcommand(1);

    Common opts;
    auto* run = app.add_subcommand("run-experiment", "Run policies over seeded replications and write CSV logs");
    add_common(run, opts);
    auto* verify = app.add_subcommand("verify", "Run the verification suites and write a pass/fail report");
    add_common(verify, opts);
    auto* concentration =
        app.add_subcommand("verify-concentration", "Run only the concentration coverage suites");
    add_common(concentration, opts);
    for (auto* sub : {verify, concentration}) {
        sub->add_option("--bound-multiplier", opts.bound_multiplier,
                        "Scale every checked bound (negative controls only)")
            ->group("Testing");
    }
    auto* print = app.add_subcommand("print-instance", "Print the instance summary as JSON");
    add_common(print, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        const auto config = load(opts);
        if (run->parsed()) {
            return gkb::harness::run_experiment(config, opts.workers, std::cerr);
        }
        if (verify->parsed() || concentration->parsed()) {
            return gkb::harness::run_verify(config, opts.workers, concentration->parsed(), std::cout);
        }
        const auto environment = gkb::make_instance(gkb::harness::resolved_instance(config));
        const std::string summary = gkb::harness::environment_summary(config, environment).dump(2) + "\n";
        if (opts.out) {
            gkb::harness::write_atomic(std::filesystem::path(*opts.out) / "environment.json", summary);
        }
        std::cout << summary;
        return exit_ok;
    } catch (const gkb::harness::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const gkb::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
}
