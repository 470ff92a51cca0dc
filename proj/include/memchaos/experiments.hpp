#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "memchaos/config.hpp"

namespace memchaos {

/// Stable process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitUserError = 2,
    kExitNumerical = 3,
    kExitDegenerate = 4,
    kExitUnsupported = 5,
};

inline constexpr int kManifestSchemaVersion = 1;
/// Environment variable naming the default output directory.
inline constexpr const char* kOutputEnvVar = "MEMCHAOS_OUT";

std::string code_version();

/// Collects the files a command writes and emits `manifest.json`.
class OutputDir {
public:
    explicit OutputDir(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }
    /// Writes `relative` (creating parent directories) and records its hash.
    void write(const std::string& relative, const std::string& content);
    void write_json(const std::string& relative, const nlohmann::json& doc);
    void write_manifest(const std::string& command, const ExperimentConfig& cfg) const;

private:
    std::filesystem::path root_;
    std::vector<std::pair<std::string, std::string>> outputs_;
};

/// Hash of the normalized config, ignoring output location and thread count.
std::string config_hash(const ExperimentConfig& cfg);

/// Per-state outcome of one static task and method.
struct StaticAccuracy {
    BooleanFunction function;
    double r_low_voltage;
    TrainMethod method;
    double train_accuracy;
    double validation_accuracy;
};

struct StreamAccuracy {
    StreamTask task;
    double r_low_voltage;
    double accuracy;
};

// The commands write their artifacts into `out` and print a summary to `log`.
// They throw the library exceptions; run_command maps those to exit codes.
void cmd_bifurcate(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log);
std::vector<StaticAccuracy> cmd_static_task(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log);
std::vector<StreamAccuracy> cmd_stream_task(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log);
void cmd_crosspoint(const ExperimentConfig& cfg, const std::filesystem::path& readout_path, OutputDir& out,
                    std::ostream& log);
/// Grid search over the sweep axes for `task` ("static" or "stream"); returns
/// the best config, also written as `tuned_config.json`.
ExperimentConfig cmd_tune(const ExperimentConfig& cfg, const std::string& task, OutputDir& out,
                          std::ostream& log);
void cmd_simulate(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log);

struct CommandOptions {
    std::string command;
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> readout_path;
    std::string task = "static";
};

/// Loads the config, applies overrides, runs the command and writes the
/// manifest. Errors are reported on `err` and returned as exit codes.
int run_command(const CommandOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace memchaos
