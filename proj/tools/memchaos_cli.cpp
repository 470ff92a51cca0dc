#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "memchaos/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Memristive chaotic-circuit reservoir experiments"};
    app.require_subcommand(1);

    memchaos::CommandOptions opts;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string readout;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "Experiment config (YAML or .json)")->required();
        sub->add_option("--out", out_dir, std::string("Output directory (default: config output_dir, then $") +
                                              memchaos::kOutputEnvVar + ")");
        sub->add_option("--seed", seed, "Override the config seed");
        sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    };

    struct Entry {
        const char* name;
        const char* help;
    };
    const Entry entries[] = {
        {"bifurcate", "Amplitude sweep: bifurcation.csv and orbit summary"},
        {"static", "Static Boolean tasks: accuracy.csv, pruning curve, readouts"},
        {"stream", "Through-time tasks: stream_accuracy.csv and predictions"},
        {"crosspoint", "Program a pruned readout into a simulated crosspoint column"},
        {"tune", "Grid search over the sweep axes, writes tuned_config.json"},
        {"simulate", "Trajectories for the sweep amplitudes"},
    };
    for (const auto& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        add_common(sub);
        if (std::string(e.name) == "crosspoint") {
            sub->add_option("--readout", readout, "Readout JSON written by the static command")->required();
        }
        if (std::string(e.name) == "tune") {
            sub->add_option("--task", opts.task, "static or stream")->check(CLI::IsMember({"static", "stream"}));
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : memchaos::kExitUserError;
    }

    for (CLI::App* sub : app.get_subcommands()) {
        opts.command = sub->get_name();
        if (sub->count("--out")) opts.out_dir = out_dir;
        if (sub->count("--seed")) opts.seed = seed;
        if (sub->count("--threads")) opts.threads = threads;
        if (!readout.empty()) opts.readout_path = readout;
    }
    return memchaos::run_command(opts, std::cout, std::cerr);
}
