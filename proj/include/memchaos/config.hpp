#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "memchaos/analysis.hpp"
#include "memchaos/circuit.hpp"
#include "memchaos/crosspoint.hpp"
#include "memchaos/readout.hpp"
#include "memchaos/reservoir.hpp"

namespace memchaos {

/// A sliding-window task such as XOR over 3 consecutive bits ("XOR3").
struct StreamTask {
    BooleanFunction function;
    int n_inputs;

    std::string name() const { return to_string(function) + std::to_string(n_inputs); }
};

StreamTask parse_stream_task(const std::string& text);

struct MemristorConfig {
    double r_low_voltage = 4.65e5;
    double rho = 0.5;
};

struct CircuitConfig {
    double C = 10e-9;
    double k = 5.0;
    double g_max = 1.4771e-5;
    /// Explicit component values override the sizing rule when all are set.
    std::optional<double> R, L, G_N;
    double dt = kDefaultDt;

    CircuitParams params() const;
};

struct SignalConfig {
    double period = kDefaultPeriod;
    int n_bits = 2;
    std::optional<std::vector<double>> amplitudes;
    double u_min = 0.161;
    double u_max = 0.346;
    StreamConfig stream;

    AmplitudeTable table() const;
};

struct TrainingConfig {
    std::vector<TrainMethod> methods{TrainMethod::Svm};
    TrainMethod stream_method = TrainMethod::Ridge;
    double ridge_lambda = 1e-3;
    double svm_c = 1.0;
    int svm_epochs = 200;
    double split = 0.8;
    double stream_split = 0.5;
    std::uint64_t split_seed = 7;
    std::uint64_t svm_seed = 11;
    std::vector<int> prune_keep;

    TrainConfig for_method(TrainMethod method, bool stream = false) const;
};

struct SweepAxes {
    std::vector<double> amplitudes;
    std::vector<double> memristor_states;
    std::vector<double> rho_values;
    std::vector<std::vector<double>> amplitude_tables;
    std::vector<std::pair<double, double>> stream_levels;
    std::vector<double> offsets;
};

struct AnalysisConfig {
    int periods = 40;
    int discard_periods = 15;
    double hysteresis_eps = kDefaultHysteresis;
    double cluster_eps = kDefaultClusterEps;
};

struct CrosspointConfig {
    DeviceProgramModel device;
    PVConfig pv;
    int keep_m = 4;
    double min_ratio = 0.0;  // derived from g_min/g_max when 0
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string output_dir;
    int threads = 1;
    MemristorConfig memristor;
    CircuitConfig circuit;
    SignalConfig signal;
    AcquisitionConfig acquisition;
    TrainingConfig train;
    std::vector<BooleanFunction> static_functions{BooleanFunction::Xor};
    std::vector<StreamTask> stream_functions;
    SweepAxes sweep;
    AnalysisConfig analysis;
    CrosspointConfig crosspoint;
    bool amplitude_only = false;
    bool write_datasets = false;
    bool write_readouts = true;

    /// Memristor states to run: the sweep list, or the single configured state.
    std::vector<double> states() const;
    AcquisitionConfig acquisition_for_run() const;
};

/// Parses and validates a config document. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& doc);
/// Normalized JSON form (all fields, defaults filled in).
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Converts a YAML document to JSON; scalars become numbers or booleans when
/// they parse as such.
nlohmann::json yaml_to_json(const std::string& text);

/// Loads `.json` as JSON and anything else as YAML. Throws ConfigError.
ExperimentConfig load_config(const std::string& path);

}  // namespace memchaos
