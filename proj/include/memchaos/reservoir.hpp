#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "memchaos/circuit.hpp"
#include "memchaos/signal.hpp"

namespace memchaos {

enum class BooleanFunction {
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    NotAAndB,
    AAndNotB,
    Maj,
    Mux,
    XorAnd,
    AndXor,
};

/// Accepts the upper-case names AND, OR, XOR, NAND, NOR, XNOR, NOT_A_AND_B,
/// A_AND_NOT_B, MAJ, MUX, XORAND, ANDXOR.
BooleanFunction parse_function(std::string_view name);
std::string to_string(BooleanFunction fn);

/// Number of inputs a function requires, or nullopt for variadic functions.
std::optional<int> fixed_arity(BooleanFunction fn);
/// Throws InvalidArgument if `fn` cannot take `n` inputs.
void check_arity(BooleanFunction fn, int n);

/// Truth-table evaluation. XOR is parity; MAJ is strict majority;
/// MUX(s, a, b) = s ? b : a; XORAND(a, b, c) = (a ^ b) & c;
/// ANDXOR(a, b, c) = (a & b) ^ c.
std::uint8_t boolean_eval(BooleanFunction fn, std::span<const std::uint8_t> bits);

/// How traces are acquired and perturbed.
struct AcquisitionConfig {
    int samples_per_trace = 1000;
    int samples_per_period = 50;
    int periods_per_trace = 20;
    int transient_discard_periods = 2;
    double init_noise_sigma = 1e-3;  // V, added to v at the start of the data
    double meas_noise_sigma = 2e-3;  // V, per sample
    int repetitions = 50;
    std::uint64_t rng_seed = 1;
    double period = kDefaultPeriod;
    double dt = kDefaultDt;
    int threads = 1;

    void validate() const;
};

/// Bit-stream encoding for through-time tasks.
struct StreamConfig {
    double u_low = 0.1;
    double u_high = 0.25;
    double offset = 0.01;
    int stream_length = 30;
    int n_streams = 20;

    void validate() const;
};

/// One row per trial, ordered by word index then repetition.
struct StaticDataset {
    Eigen::MatrixXd features;
    std::vector<std::uint8_t> labels;
    std::vector<std::size_t> words;
    std::vector<double> amplitudes;  // drive amplitude of each row
    BooleanFunction function = BooleanFunction::Xor;
    int n_bits = 2;
    double r_low_voltage = 0.0;

    std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
};

/// Response of the circuit to one bit stream: one block of samples per period.
struct StreamDataset {
    BitVector bits;
    Eigen::MatrixXd blocks;  // rows = periods, cols = samples_per_period
};

/// Seed for one trial, mixed from the run seed and trial coordinates.
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t tag);

/// Drives the circuit with the word's amplitude for acq.periods_per_trace
/// periods after a positive initialization, and samples v uniformly over the
/// data segment.
Eigen::VectorXd run_static_trial(std::span<const std::uint8_t> word, const AmplitudeTable& table,
                                 const CircuitParams& params, const MemristorIV& model,
                                 const AcquisitionConfig& acq, std::uint64_t seed);

/// Same as run_static_trial starting from a precomputed initialized state.
Eigen::VectorXd run_static_trial(std::span<const std::uint8_t> word, const AmplitudeTable& table,
                                 const CircuitParams& params, const MemristorIV& model,
                                 const AcquisitionConfig& acq, std::uint64_t seed,
                                 const CircuitState& initialized);

StaticDataset build_static_dataset(BooleanFunction fn, int n_bits, const AmplitudeTable& table,
                                   const CircuitParams& params, const MemristorIV& model,
                                   const AcquisitionConfig& acq);

StreamDataset run_stream_trial(std::span<const std::uint8_t> bits, const CircuitParams& params,
                               const MemristorIV& model, const AcquisitionConfig& acq,
                               const StreamConfig& stream, std::uint64_t seed);

/// Random streams (bits drawn from acq.rng_seed) and their responses.
std::vector<StreamDataset> build_stream_datasets(const CircuitParams& params,
                                                 const MemristorIV& model,
                                                 const AcquisitionConfig& acq,
                                                 const StreamConfig& stream);

/// Undefined sliding-window label.
inline constexpr int kUndefinedLabel = -1;

/// label[i] = fn(bits[i-n+1 .. i]) for i >= n-1, kUndefinedLabel before.
std::vector<int> sliding_targets(std::span<const std::uint8_t> bits, BooleanFunction fn, int n);

/// Period blocks with a defined label, from period max(n-1, discard) onward.
struct StreamRows {
    Eigen::MatrixXd features;
    std::vector<std::uint8_t> labels;
    std::vector<std::size_t> stream;  // source stream of each row
    std::vector<std::size_t> period;
};

StreamRows assemble_stream_rows(std::span<const StreamDataset> streams, BooleanFunction fn, int n,
                                int discard_periods);

/// Max over sample columns of |corr(block feature, bit `lag` periods back)|,
/// for lag = 0 .. max_lag, pooled over streams.
std::vector<double> memory_profile(std::span<const StreamDataset> streams, int max_lag);

/// Hash of features and labels, used to tie persisted readouts to their data.
std::uint64_t dataset_hash(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels);

/// `word,x0..x{m-1},label`.
void write_static_dataset_csv(std::ostream& os, const StaticDataset& ds);
/// `stream,period,bit,x0..x{m-1},label` with label -1 where undefined.
void write_stream_dataset_csv(std::ostream& os, std::span<const StreamDataset> streams,
                              BooleanFunction fn, int n);

}  // namespace memchaos
