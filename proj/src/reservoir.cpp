#include "memchaos/reservoir.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <random>

#include "memchaos/error.hpp"
#include "memchaos/io.hpp"
#include "memchaos/parallel.hpp"

namespace memchaos {

namespace {

struct FunctionName {
    BooleanFunction fn;
    const char* name;
};

constexpr std::array<FunctionName, 12> kFunctionNames{{
    {BooleanFunction::And, "AND"},
    {BooleanFunction::Or, "OR"},
    {BooleanFunction::Xor, "XOR"},
    {BooleanFunction::Nand, "NAND"},
    {BooleanFunction::Nor, "NOR"},
    {BooleanFunction::Xnor, "XNOR"},
    {BooleanFunction::NotAAndB, "NOT_A_AND_B"},
    {BooleanFunction::AAndNotB, "A_AND_NOT_B"},
    {BooleanFunction::Maj, "MAJ"},
    {BooleanFunction::Mux, "MUX"},
    {BooleanFunction::XorAnd, "XORAND"},
    {BooleanFunction::AndXor, "ANDXOR"},
}};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniformly spaced indices into [first, first + count).
std::size_t sample_index(std::size_t first, std::size_t count, int j, int n_samples) {
    if (n_samples == 1) return first;
    return first + static_cast<std::size_t>(j) * (count - 1) / static_cast<std::size_t>(n_samples - 1);
}

long long steps_per_period(const AcquisitionConfig& acq) {
    const double ratio = acq.period / acq.dt;
    const long long n = std::llround(ratio);
    if (n < 2 || n % 2 != 0 || std::abs(ratio - static_cast<double>(n)) > 1e-6) {
        throw InvalidArgument("dt must divide the half drive period");
    }
    return n;
}

}  // namespace

BooleanFunction parse_function(std::string_view name) {
    for (const auto& entry : kFunctionNames) {
        if (name == entry.name) return entry.fn;
    }
    throw InvalidArgument("unknown Boolean function '" + std::string(name) + "'");
}

std::string to_string(BooleanFunction fn) {
    for (const auto& entry : kFunctionNames) {
        if (entry.fn == fn) return entry.name;
    }
    return "?";
}

std::optional<int> fixed_arity(BooleanFunction fn) {
    switch (fn) {
        case BooleanFunction::NotAAndB:
        case BooleanFunction::AAndNotB:
            return 2;
        case BooleanFunction::Mux:
        case BooleanFunction::XorAnd:
        case BooleanFunction::AndXor:
            return 3;
        default:
            return std::nullopt;
    }
}

void check_arity(BooleanFunction fn, int n) {
    if (const auto fixed = fixed_arity(fn)) {
        if (n != *fixed) {
            throw InvalidArgument(to_string(fn) + " takes " + std::to_string(*fixed) + " inputs, got " +
                                  std::to_string(n));
        }
        return;
    }
    const int min_inputs = fn == BooleanFunction::Maj ? 1 : 2;
    if (n < min_inputs || n > 8) {
        throw InvalidArgument(to_string(fn) + " cannot take " + std::to_string(n) + " inputs");
    }
}

std::uint8_t boolean_eval(BooleanFunction fn, std::span<const std::uint8_t> bits) {
    check_arity(fn, static_cast<int>(bits.size()));
    int ones = 0;
    for (std::uint8_t b : bits) {
        if (b > 1) throw InvalidArgument("bits must be 0 or 1");
        ones += b;
    }
    const int n = static_cast<int>(bits.size());
    auto as_bit = [](bool x) { return static_cast<std::uint8_t>(x ? 1 : 0); };
    switch (fn) {
        case BooleanFunction::And: return as_bit(ones == n);
        case BooleanFunction::Or: return as_bit(ones > 0);
        case BooleanFunction::Xor: return as_bit(ones % 2 == 1);
        case BooleanFunction::Nand: return as_bit(ones != n);
        case BooleanFunction::Nor: return as_bit(ones == 0);
        case BooleanFunction::Xnor: return as_bit(ones % 2 == 0);
        case BooleanFunction::NotAAndB: return as_bit(!bits[0] && bits[1]);
        case BooleanFunction::AAndNotB: return as_bit(bits[0] && !bits[1]);
        case BooleanFunction::Maj: return as_bit(2 * ones > n);
        case BooleanFunction::Mux: return bits[0] ? bits[2] : bits[1];
        case BooleanFunction::XorAnd: return as_bit((bits[0] ^ bits[1]) && bits[2]);
        case BooleanFunction::AndXor: return as_bit((bits[0] && bits[1]) != (bits[2] != 0));
    }
    throw InvalidArgument("unhandled Boolean function");
}

void AcquisitionConfig::validate() const {
    if (samples_per_trace < 1 || samples_per_period < 1 || periods_per_trace < 1 ||
        repetitions < 1 || transient_discard_periods < 0) {
        throw InvalidArgument("acquisition counts must be >= 1");
    }
    if (!(init_noise_sigma >= 0.0) || !(meas_noise_sigma >= 0.0)) {
        throw InvalidArgument("noise sigmas must be >= 0");
    }
    if (!(period > 0.0) || !(dt > 0.0)) throw InvalidArgument("period and dt must be positive");
    steps_per_period(*this);
}

void StreamConfig::validate() const {
    if (!std::isfinite(u_low) || !std::isfinite(u_high) || !std::isfinite(offset)) {
        throw InvalidArgument("stream levels must be finite");
    }
    if (stream_length < 1 || n_streams < 1) throw InvalidArgument("stream counts must be >= 1");
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t tag) {
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ tag);
    h = splitmix64(h ^ a);
    return splitmix64(h ^ (b + 0x632be59bd9b4e019ULL));
}

Eigen::VectorXd run_static_trial(std::span<const std::uint8_t> word, const AmplitudeTable& table,
                                 const CircuitParams& params, const MemristorIV& model,
                                 const AcquisitionConfig& acq, std::uint64_t seed) {
    return run_static_trial(word, table, params, model, acq, seed,
                            initialize_state(1, params, model, acq.dt));
}

Eigen::VectorXd run_static_trial(std::span<const std::uint8_t> word, const AmplitudeTable& table,
                                 const CircuitParams& params, const MemristorIV& model,
                                 const AcquisitionConfig& acq, std::uint64_t seed,
                                 const CircuitState& initialized) {
    acq.validate();
    const double amplitude = encode_word(word, table);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    CircuitState init = initialized;
    init.v += acq.init_noise_sigma * gauss(rng);
    const Waveform data({Segment::square(amplitude, acq.period, acq.periods_per_trace)});
    const Trajectory traj = simulate(data, params, model, init, acq.dt);

    Eigen::VectorXd features(acq.samples_per_trace);
    for (int j = 0; j < acq.samples_per_trace; ++j) {
        const std::size_t k = sample_index(0, traj.size(), j, acq.samples_per_trace);
        features[j] = traj.v[k] + acq.meas_noise_sigma * gauss(rng);
    }
    return features;
}

StaticDataset build_static_dataset(BooleanFunction fn, int n_bits, const AmplitudeTable& table,
                                   const CircuitParams& params, const MemristorIV& model,
                                   const AcquisitionConfig& acq) {
    acq.validate();
    check_arity(fn, n_bits);
    if (table.n_bits() != n_bits) throw InvalidArgument("amplitude table width differs from n_bits");

    const std::size_t words = std::size_t{1} << n_bits;
    const auto reps = static_cast<std::size_t>(acq.repetitions);
    const std::size_t rows = words * reps;

    StaticDataset ds;
    ds.function = fn;
    ds.n_bits = n_bits;
    ds.r_low_voltage = model.state.r_low_voltage();
    ds.features.resize(static_cast<Eigen::Index>(rows), acq.samples_per_trace);
    ds.labels.resize(rows);
    ds.words.resize(rows);
    ds.amplitudes.resize(rows);

    const CircuitState init = initialize_state(1, params, model, acq.dt);
    parallel_for(rows, acq.threads, [&](std::size_t row) {
        const std::size_t w = row / reps;
        const std::size_t r = row % reps;
        const BitVector word = word_bits(w, n_bits);
        ds.features.row(static_cast<Eigen::Index>(row)) =
            run_static_trial(word, table, params, model, acq, trial_seed(acq.rng_seed, w, r, 0x57A7), init)
                .transpose();
        ds.labels[row] = boolean_eval(fn, word);
        ds.words[row] = w;
        ds.amplitudes[row] = table[w];
    });
    return ds;
}

StreamDataset run_stream_trial(std::span<const std::uint8_t> bits, const CircuitParams& params,
                               const MemristorIV& model, const AcquisitionConfig& acq,
                               const StreamConfig& stream, std::uint64_t seed) {
    acq.validate();
    stream.validate();
    const long long spp = steps_per_period(acq);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    CircuitState init = initialize_state(1, params, model, acq.dt);
    init.v += acq.init_noise_sigma * gauss(rng);
    const Waveform data = encode_stream(bits, stream.u_low, stream.u_high, stream.offset, acq.period);
    const Trajectory traj = simulate(data, params, model, init, acq.dt);

    StreamDataset out;
    out.bits.assign(bits.begin(), bits.end());
    out.blocks.resize(static_cast<Eigen::Index>(bits.size()), acq.samples_per_period);
    for (std::size_t p = 0; p < bits.size(); ++p) {
        const std::size_t first = p * static_cast<std::size_t>(spp);
        for (int j = 0; j < acq.samples_per_period; ++j) {
            const std::size_t k = first + static_cast<std::size_t>(j) * static_cast<std::size_t>(spp) /
                                              static_cast<std::size_t>(acq.samples_per_period);
            out.blocks(static_cast<Eigen::Index>(p), j) = traj.v[k] + acq.meas_noise_sigma * gauss(rng);
        }
    }
    return out;
}

std::vector<StreamDataset> build_stream_datasets(const CircuitParams& params,
                                                 const MemristorIV& model,
                                                 const AcquisitionConfig& acq,
                                                 const StreamConfig& stream) {
    acq.validate();
    stream.validate();
    const auto n = static_cast<std::size_t>(stream.n_streams);
    std::vector<StreamDataset> out(n);
    parallel_for(n, acq.threads, [&](std::size_t s) {
        std::mt19937_64 bit_rng(trial_seed(acq.rng_seed, s, 0, 0xB175));
        std::bernoulli_distribution coin(0.5);
        BitVector bits(static_cast<std::size_t>(stream.stream_length));
        for (auto& b : bits) b = coin(bit_rng) ? 1 : 0;
        out[s] = run_stream_trial(bits, params, model, acq, stream, trial_seed(acq.rng_seed, s, 1, 0x5743));
    });
    return out;
}

std::vector<int> sliding_targets(std::span<const std::uint8_t> bits, BooleanFunction fn, int n) {
    check_arity(fn, n);
    if (bits.size() < static_cast<std::size_t>(n)) {
        throw InvalidArgument("bit stream is shorter than the function arity");
    }
    std::vector<int> labels(bits.size(), kUndefinedLabel);
    const auto width = static_cast<std::size_t>(n);
    for (std::size_t i = width - 1; i < bits.size(); ++i) {
        labels[i] = boolean_eval(fn, bits.subspan(i + 1 - width, width));
    }
    return labels;
}

StreamRows assemble_stream_rows(std::span<const StreamDataset> streams, BooleanFunction fn, int n,
                                int discard_periods) {
    StreamRows rows;
    if (streams.empty()) return rows;
    const auto first = static_cast<std::size_t>(std::max(n - 1, discard_periods));
    for (std::size_t s = 0; s < streams.size(); ++s) {
        const auto labels = sliding_targets(streams[s].bits, fn, n);
        for (std::size_t p = first; p < labels.size(); ++p) {
            rows.labels.push_back(static_cast<std::uint8_t>(labels[p]));
            rows.stream.push_back(s);
            rows.period.push_back(p);
        }
    }
    const Eigen::Index cols = streams.front().blocks.cols();
    rows.features.resize(static_cast<Eigen::Index>(rows.labels.size()), cols);
    for (std::size_t r = 0; r < rows.labels.size(); ++r) {
        rows.features.row(static_cast<Eigen::Index>(r)) =
            streams[rows.stream[r]].blocks.row(static_cast<Eigen::Index>(rows.period[r]));
    }
    return rows;
}

std::vector<double> memory_profile(std::span<const StreamDataset> streams, int max_lag) {
    if (streams.empty() || max_lag < 0) throw InvalidArgument("memory_profile needs streams and lag >= 0");
    const Eigen::Index cols = streams.front().blocks.cols();
    std::vector<double> profile;
    for (int lag = 0; lag <= max_lag; ++lag) {
        std::vector<double> bit;
        std::vector<Eigen::Index> stream_idx;
        std::vector<Eigen::Index> period_idx;
        for (std::size_t s = 0; s < streams.size(); ++s) {
            for (std::size_t p = static_cast<std::size_t>(lag); p < streams[s].bits.size(); ++p) {
                bit.push_back(streams[s].bits[p - static_cast<std::size_t>(lag)]);
                stream_idx.push_back(static_cast<Eigen::Index>(s));
                period_idx.push_back(static_cast<Eigen::Index>(p));
            }
        }
        const auto n = static_cast<Eigen::Index>(bit.size());
        if (n < 2) throw InvalidArgument("memory_profile: lag " + std::to_string(lag) + " leaves fewer than 2 samples");
        const Eigen::Map<const Eigen::VectorXd> b(bit.data(), n);
        const Eigen::VectorXd bc = b.array() - b.mean();
        double best = 0.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            Eigen::VectorXd x(n);
            for (Eigen::Index r = 0; r < n; ++r) {
                x[r] = streams[static_cast<std::size_t>(stream_idx[static_cast<std::size_t>(r)])]
                           .blocks(period_idx[static_cast<std::size_t>(r)], j);
            }
            const Eigen::VectorXd xc = x.array() - x.mean();
            const double denom = std::sqrt(xc.squaredNorm() * bc.squaredNorm());
            if (denom > 0.0) best = std::max(best, std::abs(xc.dot(bc)) / denom);
        }
        profile.push_back(best);
    }
    return profile;
}

std::uint64_t dataset_hash(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels) {
    const Eigen::Index dims[2] = {features.rows(), features.cols()};
    std::uint64_t h = fnv1a(std::as_bytes(std::span(dims)));
    h = fnv1a(std::as_bytes(std::span(features.data(), static_cast<std::size_t>(features.size()))), h);
    return fnv1a(std::as_bytes(labels), h);
}

void write_static_dataset_csv(std::ostream& os, const StaticDataset& ds) {
    os << "word";
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) os << ",x" << j;
    os << ",label\n";
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        os << ds.words[r];
        for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
            os << ',' << format_number(ds.features(static_cast<Eigen::Index>(r), j));
        }
        os << ',' << static_cast<int>(ds.labels[r]) << '\n';
    }
}

void write_stream_dataset_csv(std::ostream& os, std::span<const StreamDataset> streams,
                              BooleanFunction fn, int n) {
    if (streams.empty()) return;
    os << "stream,period,bit";
    for (Eigen::Index j = 0; j < streams.front().blocks.cols(); ++j) os << ",x" << j;
    os << ",label\n";
    for (std::size_t s = 0; s < streams.size(); ++s) {
        const auto labels = sliding_targets(streams[s].bits, fn, n);
        for (std::size_t p = 0; p < streams[s].bits.size(); ++p) {
            os << s << ',' << p << ',' << static_cast<int>(streams[s].bits[p]);
            for (Eigen::Index j = 0; j < streams[s].blocks.cols(); ++j) {
                os << ',' << format_number(streams[s].blocks(static_cast<Eigen::Index>(p), j));
            }
            os << ',' << labels[p] << '\n';
        }
    }
}

}  // namespace memchaos
