#include "memchaos/experiments.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "memchaos/analysis.hpp"
#include "memchaos/crosspoint.hpp"
#include "memchaos/error.hpp"
#include "memchaos/io.hpp"

#ifndef MEMCHAOS_VERSION
#define MEMCHAOS_VERSION "0.0.0"
#endif

namespace memchaos {

namespace fs = std::filesystem;
using nlohmann::json;

std::string code_version() { return std::string("memchaos ") + MEMCHAOS_VERSION; }

namespace {

std::uint64_t hash_string(const std::string& s) {
    return fnv1a(std::as_bytes(std::span<const char>(s.data(), s.size())));
}

json manifest_config(const ExperimentConfig& cfg) {
    ExperimentConfig copy = cfg;
    copy.output_dir.clear();
    json j = config_to_json(copy);
    j.erase("threads");
    j.erase("output_dir");
    return j;
}

MemristorIV model_for(double r_low_voltage, double rho) { return build_model(MemristorState(r_low_voltage), rho); }

std::vector<double> rho_axis(const ExperimentConfig& cfg) {
    if (!cfg.sweep.rho_values.empty()) return cfg.sweep.rho_values;
    return {cfg.memristor.rho};
}

SweepConfig sweep_config(const ExperimentConfig& cfg) {
    SweepConfig s;
    s.periods = cfg.analysis.periods;
    s.discard_periods = cfg.analysis.discard_periods;
    s.period = cfg.signal.period;
    s.dt = cfg.circuit.dt;
    s.hysteresis_eps = cfg.analysis.hysteresis_eps;
    s.threads = cfg.threads;
    return s;
}

std::string join_numbers(const std::vector<double>& xs, char sep) {
    std::string out;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k) out += sep;
        out += format_number(xs[k]);
    }
    return out;
}

struct StaticData {
    StaticDataset dataset;
    Split split;
    LabeledSet train;
    LabeledSet validation;
};

StaticData static_data(const ExperimentConfig& cfg, BooleanFunction fn, double r, double rho,
                       const AmplitudeTable& table, const TrainConfig& tc) {
    StaticData d;
    d.dataset = build_static_dataset(fn, table.n_bits(), table, cfg.circuit.params(), model_for(r, rho),
                                     cfg.acquisition_for_run());
    d.split = stratified_split(d.dataset.words, tc.split, tc.split_seed);
    d.train = subset(d.dataset.features, d.dataset.labels, d.split.train);
    d.validation = subset(d.dataset.features, d.dataset.labels, d.split.validation);
    return d;
}

Eigen::MatrixXd amplitude_column(const StaticDataset& ds) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(ds.rows()), 1);
    for (std::size_t k = 0; k < ds.rows(); ++k) x(static_cast<Eigen::Index>(k), 0) = ds.amplitudes[k];
    return x;
}

struct StreamEval {
    double accuracy = 0.0;
    StreamRows rows;
    std::vector<std::size_t> validation;
    LinearReadout readout;
};

StreamEval evaluate_stream(std::span<const StreamDataset> streams, const StreamTask& task,
                           const ExperimentConfig& cfg) {
    StreamEval e;
    e.rows = assemble_stream_rows(streams, task.function, task.n_inputs,
                                  cfg.acquisition.transient_discard_periods);
    if (e.rows.labels.empty()) throw DegenerateData("stream task " + task.name() + " has no labelled periods");
    const TrainConfig tc = cfg.train.for_method(cfg.train.stream_method, true);
    const Split split = group_split(e.rows.stream, tc.split, tc.split_seed);
    const LabeledSet train = subset(e.rows.features, e.rows.labels, split.train);
    const LabeledSet val = subset(e.rows.features, e.rows.labels, split.validation);
    e.readout = train_classifier(train.X, train.y, tc);
    e.accuracy = evaluate(e.readout, val.X, val.y);
    e.validation = split.validation;
    return e;
}

std::string readout_name(BooleanFunction fn, double r, TrainMethod m) {
    return to_string(fn) + "_" + format_number(r) + "_" + to_string(m);
}

json task_json(const StaticDataset& ds, double rho, const AmplitudeTable& table) {
    return {{"kind", "static"},
            {"function", to_string(ds.function)},
            {"n_bits", ds.n_bits},
            {"r_low_voltage", ds.r_low_voltage},
            {"rho", rho},
            {"amplitudes", table.amplitudes()}};
}

double positive_min_ratio(const ExperimentConfig& cfg) {
    if (cfg.crosspoint.min_ratio > 0.0) return cfg.crosspoint.min_ratio;
    return cfg.crosspoint.device.g_min / cfg.crosspoint.device.g_max;
}

}  // namespace

OutputDir::OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

void OutputDir::write(const std::string& relative, const std::string& content) {
    const fs::path path = root_ / relative;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << content;
    if (!os) throw Error("cannot write " + path.string());
    for (auto& entry : outputs_) {
        if (entry.first == relative) {
            entry.second = hex64(hash_string(content));
            return;
        }
    }
    outputs_.emplace_back(relative, hex64(hash_string(content)));
}

void OutputDir::write_json(const std::string& relative, const json& doc) { write(relative, doc.dump(2) + "\n"); }

void OutputDir::write_manifest(const std::string& command, const ExperimentConfig& cfg) const {
    json outputs = json::array();
    for (const auto& [file, hash] : outputs_) outputs.push_back({{"file", file}, {"fnv1a64", hash}});
    const json manifest = {{"schema_version", kManifestSchemaVersion},
                           {"command", command},
                           {"config", manifest_config(cfg)},
                           {"config_hash", config_hash(cfg)},
                           {"seed", cfg.seed},
                           {"code_version", code_version()},
                           {"outputs", outputs}};
    std::ofstream os(root_ / "manifest.json", std::ios::binary | std::ios::trunc);
    os << manifest.dump(2) << '\n';
    if (!os) throw Error("cannot write manifest.json");
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(hash_string(manifest_config(cfg).dump())); }

void cmd_bifurcate(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log) {
    if (cfg.sweep.amplitudes.empty()) throw ConfigError("bifurcate needs a non-empty sweep.amplitudes list");
    const SweepConfig sc = sweep_config(cfg);
    const CircuitParams params = cfg.circuit.params();
    std::ostringstream summary;
    summary << "r_mem,U,clusters,orbit\n";
    const auto states = cfg.states();
    for (std::size_t s = 0; s < states.size(); ++s) {
        const double r = states[s];
        const auto responses =
            sweep_responses(cfg.sweep.amplitudes, params, model_for(r, cfg.memristor.rho), sc, cfg.analysis.cluster_eps);
        std::ostringstream csv;
        write_bifurcation_csv(csv, bifurcation_points(responses));
        const std::string name = s == 0 ? "bifurcation.csv" : "bifurcation_r" + format_number(r) + ".csv";
        out.write(name, csv.str());
        int aperiodic = 0;
        int multiplied = 0;
        for (const auto& resp : responses) {
            summary << format_number(r) << ',' << format_number(resp.amplitude) << ',' << resp.clusters << ','
                    << orbit_label(resp.orbit) << '\n';
            if (resp.orbit && resp.orbit->aperiodic()) ++aperiodic;
            if (resp.clusters > 2) ++multiplied;
        }
        log << fmt::format("r_mem {}: {} amplitudes, {} with more than 2 clusters, {} aperiodic -> {}\n",
                           format_number(r), responses.size(), multiplied, aperiodic, name);
    }
    out.write("bifurcation_summary.csv", summary.str());
}

std::vector<StaticAccuracy> cmd_static_task(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log) {
    const AmplitudeTable table = cfg.signal.table();
    std::vector<StaticAccuracy> results;
    std::ostringstream acc;
    acc << "function,state,method,train_acc,val_acc\n";
    std::ostringstream curve;
    curve << "function,state,method,n_weights,val_acc\n";
    std::ostringstream ablation;
    ablation << "function,state,method,train_acc,val_acc\n";

    for (BooleanFunction fn : cfg.static_functions) {
        check_arity(fn, table.n_bits());
        for (double r : cfg.states()) {
            // The dataset does not depend on the method; the split only on split settings.
            const TrainConfig base = cfg.train.for_method(cfg.train.methods.front());
            const StaticData d = static_data(cfg, fn, r, cfg.memristor.rho, table, base);
            const std::string state = format_number(r);
            const std::string hash = hex64(dataset_hash(d.dataset.features, d.dataset.labels));
            if (cfg.write_datasets) {
                std::ostringstream ds;
                write_static_dataset_csv(ds, d.dataset);
                const std::string stem = "datasets/static_" + to_string(fn) + "_" + state;
                out.write(stem + ".csv", ds.str());
                out.write_json(stem + ".json", {{"task", task_json(d.dataset, cfg.memristor.rho, table)},
                                                {"dataset_hash", hash},
                                                {"rows", d.dataset.rows()},
                                                {"features", d.dataset.features.cols()}});
            }
            for (TrainMethod m : cfg.train.methods) {
                const TrainConfig tc = cfg.train.for_method(m);
                const LinearReadout readout = train_classifier(d.train.X, d.train.y, tc);
                const StaticAccuracy row{fn, r, m, evaluate(readout, d.train.X, d.train.y),
                                         evaluate(readout, d.validation.X, d.validation.y)};
                results.push_back(row);
                acc << to_string(fn) << ',' << state << ',' << to_string(m) << ','
                    << format_number(row.train_accuracy) << ',' << format_number(row.validation_accuracy) << '\n';
                log << fmt::format("{} r_mem {} {}: train {:.4f} val {:.4f}\n", to_string(fn), state, to_string(m),
                                   row.train_accuracy, row.validation_accuracy);

                const auto width = static_cast<std::size_t>(d.dataset.features.cols());
                if (!cfg.train.prune_keep.empty()) {
                    curve << to_string(fn) << ',' << state << ',' << to_string(m) << ',' << width << ','
                          << format_number(row.validation_accuracy) << '\n';
                    for (int keep : cfg.train.prune_keep) {
                        if (static_cast<std::size_t>(keep) > width) continue;
                        const PruneResult p =
                            prune_retrain(d.train, d.validation, tc, static_cast<std::size_t>(keep));
                        curve << to_string(fn) << ',' << state << ',' << to_string(m) << ',' << keep << ','
                              << format_number(p.accuracy) << '\n';
                    }
                }
                if (cfg.write_readouts) {
                    json task = task_json(d.dataset, cfg.memristor.rho, table);
                    json doc = readout_to_json(readout, tc, hash);
                    doc["task"] = task;
                    const std::string name = readout_name(fn, r, m);
                    out.write_json("readouts/" + name + ".json", doc);
                    const auto keep = static_cast<std::size_t>(cfg.crosspoint.keep_m);
                    if (keep <= width) {
                        try {
                            const PruneResult p =
                                prune_positive(d.train, d.validation, tc, keep, positive_min_ratio(cfg));
                            json pos = readout_to_json(p.readout, tc, hash);
                            pos["task"] = task;
                            pos["validation_accuracy"] = p.accuracy;
                            out.write_json("readouts/" + name + "_pos" + std::to_string(keep) + ".json", pos);
                        } catch (const DegenerateData& e) {
                            log << fmt::format("{}: no positive {}-weight readout ({})\n", name, keep, e.what());
                        }
                    }
                }
            }
            if (cfg.amplitude_only) {
                const Eigen::MatrixXd amp = amplitude_column(d.dataset);
                const LabeledSet train = subset(amp, d.dataset.labels, d.split.train);
                const LabeledSet val = subset(amp, d.dataset.labels, d.split.validation);
                for (TrainMethod m : cfg.train.methods) {
                    const LinearReadout readout = train_classifier(train.X, train.y, cfg.train.for_method(m));
                    const double tr = evaluate(readout, train.X, train.y);
                    const double va = evaluate(readout, val.X, val.y);
                    ablation << to_string(fn) << ',' << state << ',' << to_string(m) << ',' << format_number(tr)
                             << ',' << format_number(va) << '\n';
                    log << fmt::format("{} r_mem {} {} amplitude only: val {:.4f}\n", to_string(fn), state,
                                       to_string(m), va);
                }
            }
        }
    }
    out.write("accuracy.csv", acc.str());
    if (!cfg.train.prune_keep.empty()) out.write("pruning_curve.csv", curve.str());
    if (cfg.amplitude_only) out.write("ablation_accuracy.csv", ablation.str());
    return results;
}

std::vector<StreamAccuracy> cmd_stream_task(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log) {
    if (cfg.stream_functions.empty()) throw ConfigError("stream needs tasks.stream_functions");
    const CircuitParams params = cfg.circuit.params();
    const AcquisitionConfig acq = cfg.acquisition_for_run();
    std::vector<StreamAccuracy> results;
    std::ostringstream acc;
    acc << "function,n_inputs,r_mem,accuracy\n";
    std::ostringstream pred;
    pred << "function,n_inputs,r_mem,stream,period,bit,label,prediction,score\n";
    std::ostringstream memory;
    memory << "r_mem,lag,correlation\n";

    for (double r : cfg.states()) {
        const auto streams = build_stream_datasets(params, model_for(r, cfg.memristor.rho), acq, cfg.signal.stream);
        const std::string state = format_number(r);
        const auto profile = memory_profile(streams, std::min(4, cfg.signal.stream.stream_length - 1));
        for (std::size_t lag = 0; lag < profile.size(); ++lag) {
            memory << state << ',' << lag << ',' << format_number(profile[lag]) << '\n';
        }
        for (const StreamTask& task : cfg.stream_functions) {
            const StreamEval e = evaluate_stream(streams, task, cfg);
            results.push_back({task, r, e.accuracy});
            acc << to_string(task.function) << ',' << task.n_inputs << ',' << state << ','
                << format_number(e.accuracy) << '\n';
            for (std::size_t row : e.validation) {
                const auto idx = static_cast<Eigen::Index>(row);
                const double score = e.readout.score(e.rows.features.row(idx).transpose());
                const std::size_t s = e.rows.stream[row];
                const std::size_t p = e.rows.period[row];
                pred << to_string(task.function) << ',' << task.n_inputs << ',' << state << ',' << s << ',' << p << ','
                     << int(streams[s].bits[p]) << ',' << int(e.rows.labels[row]) << ','
                     << (score >= 0.0 ? 1 : 0) << ',' << format_number(score) << '\n';
            }
            log << fmt::format("{} r_mem {}: accuracy {:.4f}\n", task.name(), state, e.accuracy);
        }
        if (cfg.write_datasets) {
            for (const StreamTask& task : cfg.stream_functions) {
                std::ostringstream ds;
                write_stream_dataset_csv(ds, streams, task.function, task.n_inputs);
                out.write("datasets/stream_" + task.name() + "_" + state + ".csv", ds.str());
            }
        }
    }
    out.write("stream_accuracy.csv", acc.str());
    out.write("stream_predictions.csv", pred.str());
    out.write("memory_profile.csv", memory.str());
    return results;
}

void cmd_crosspoint(const ExperimentConfig& cfg, const fs::path& readout_path, OutputDir& out, std::ostream& log) {
    std::ifstream in(readout_path);
    if (!in) throw ConfigError("cannot open readout file '" + readout_path.string() + "'");
    json doc;
    LinearReadout readout;
    TrainConfig tc;
    BooleanFunction fn{};
    int n_bits = 0;
    double r = 0.0;
    double rho = 0.0;
    std::vector<double> amps;
    std::string stored_hash;
    try {
        in >> doc;
        readout = readout_from_json(doc);
        tc = train_config_from_json(doc.at("train_config"));
        stored_hash = doc.at("dataset_hash").get<std::string>();
        const json& task = doc.at("task");
        fn = parse_function(task.at("function").get<std::string>());
        n_bits = task.at("n_bits").get<int>();
        r = task.at("r_low_voltage").get<double>();
        rho = task.at("rho").get<double>();
        amps = task.at("amplitudes").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ConfigError("malformed readout file: " + std::string(e.what()));
    } catch (const InvalidArgument& e) {
        throw ConfigError("malformed readout file: " + std::string(e.what()));
    }

    const AmplitudeTable table(n_bits, amps);
    const StaticData d = static_data(cfg, fn, r, rho, table, tc);
    const std::string hash = hex64(dataset_hash(d.dataset.features, d.dataset.labels));
    if (hash != stored_hash) {
        throw ConfigError("readout was trained on a different dataset (hash " + stored_hash + ", rebuilt " + hash +
                          "); use the config and seed of the static run");
    }
    if (readout.n_features() != d.dataset.features.cols()) throw ConfigError("readout width differs from dataset");

    const ColumnMapping mapping = map_weights(readout, cfg.crosspoint.device);
    std::vector<PVResult> pv;
    const CrosspointColumn column =
        program_column(mapping, cfg.crosspoint.device, cfg.crosspoint.pv, trial_seed(cfg.seed, 0, 0, 0xC105), &pv);

    const double software = evaluate(readout, d.validation.X, d.validation.y);
    const double ideal = column_accuracy(ideal_column(mapping), d.validation.X, d.validation.y);
    const double programmed = column_accuracy(column, d.validation.X, d.validation.y);

    std::ostringstream trace;
    write_programming_trace_csv(trace, pv);
    out.write("programming_trace.csv", trace.str());

    std::ostringstream acc;
    acc << "function,state,n_devices,software_acc,ideal_acc,crosspoint_acc\n";
    acc << to_string(fn) << ',' << format_number(r) << ',' << column.size() << ',' << format_number(software) << ','
        << format_number(ideal) << ',' << format_number(programmed) << '\n';
    out.write("crosspoint_accuracy.csv", acc.str());

    json col = column_to_json(column);
    json devices = json::array();
    for (std::size_t k = 0; k < pv.size(); ++k) {
        devices.push_back({{"feature", column.features[k]},
                           {"target_g", mapping.target_g[k]},
                           {"achieved_g", pv[k].achieved_g},
                           {"iterations", pv[k].iterations},
                           {"relative_error", pv[k].relative_error}});
    }
    col["devices"] = devices;
    out.write_json("column.json", col);
    log << fmt::format("{} devices programmed; software {:.4f}, ideal column {:.4f}, crosspoint {:.4f}\n",
                       column.size(), software, ideal, programmed);
}

ExperimentConfig cmd_tune(const ExperimentConfig& cfg, const std::string& task, OutputDir& out, std::ostream& log) {
    const CircuitParams params = cfg.circuit.params();
    ExperimentConfig best = cfg;
    double best_score = -1.0;
    std::ostringstream csv;

    if (task == "static") {
        const BooleanFunction fn = cfg.static_functions.front();
        const TrainConfig tc = cfg.train.for_method(cfg.train.methods.front());
        std::vector<std::vector<double>> tables = cfg.sweep.amplitude_tables;
        if (tables.empty()) tables.push_back(cfg.signal.table().amplitudes());
        csv << "r_low_voltage,rho,amplitudes,train_acc,val_acc\n";
        for (double r : cfg.states()) {
            for (double rho : rho_axis(cfg)) {
                const MemristorIV model = model_for(r, rho);
                if (!is_bistable(params, model)) {
                    log << fmt::format("skip r {} rho {}: not bistable\n", format_number(r), format_number(rho));
                    continue;
                }
                for (const auto& amps : tables) {
                    const AmplitudeTable table(cfg.signal.n_bits, amps);
                    const StaticData d = static_data(cfg, fn, r, rho, table, tc);
                    const LinearReadout readout = train_classifier(d.train.X, d.train.y, tc);
                    const double tr = evaluate(readout, d.train.X, d.train.y);
                    const double va = evaluate(readout, d.validation.X, d.validation.y);
                    csv << format_number(r) << ',' << format_number(rho) << ',' << join_numbers(amps, ';') << ','
                        << format_number(tr) << ',' << format_number(va) << '\n';
                    if (va > best_score) {
                        best_score = va;
                        best.memristor.r_low_voltage = r;
                        best.memristor.rho = rho;
                        best.signal.amplitudes = amps;
                    }
                }
            }
        }
        out.write("tune_static.csv", csv.str());
    } else if (task == "stream") {
        if (cfg.stream_functions.empty()) throw ConfigError("tune --task stream needs tasks.stream_functions");
        auto levels = cfg.sweep.stream_levels;
        if (levels.empty()) levels.emplace_back(cfg.signal.stream.u_low, cfg.signal.stream.u_high);
        auto offsets = cfg.sweep.offsets;
        if (offsets.empty()) offsets.push_back(cfg.signal.stream.offset);
        const AcquisitionConfig acq = cfg.acquisition_for_run();
        csv << "r_low_voltage,rho,u_low,u_high,offset,function,n_inputs,accuracy\n";
        for (double r : cfg.states()) {
            for (double rho : rho_axis(cfg)) {
                const MemristorIV model = model_for(r, rho);
                if (!is_bistable(params, model)) {
                    log << fmt::format("skip r {} rho {}: not bistable\n", format_number(r), format_number(rho));
                    continue;
                }
                for (const auto& [lo, hi] : levels) {
                    for (double offset : offsets) {
                        StreamConfig sc = cfg.signal.stream;
                        sc.u_low = lo;
                        sc.u_high = hi;
                        sc.offset = offset;
                        sc.validate();
                        const auto streams = build_stream_datasets(params, model, acq, sc);
                        double score = std::numeric_limits<double>::infinity();
                        for (const StreamTask& t : cfg.stream_functions) {
                            const double a = evaluate_stream(streams, t, cfg).accuracy;
                            score = std::min(score, a);
                            csv << format_number(r) << ',' << format_number(rho) << ',' << format_number(lo) << ','
                                << format_number(hi) << ',' << format_number(offset) << ',' << to_string(t.function)
                                << ',' << t.n_inputs << ',' << format_number(a) << '\n';
                        }
                        if (score > best_score) {
                            best_score = score;
                            best.memristor.r_low_voltage = r;
                            best.memristor.rho = rho;
                            best.signal.stream = sc;
                        }
                    }
                }
            }
        }
        out.write("tune_stream.csv", csv.str());
    } else {
        throw ConfigError("unknown tune task '" + task + "' (expected static or stream)");
    }
    if (best_score < 0.0) throw ConfigError("tune grid has no bistable configuration");
    best.sweep.memristor_states.clear();
    best.sweep.rho_values.clear();
    best.sweep.amplitude_tables.clear();
    best.sweep.stream_levels.clear();
    best.sweep.offsets.clear();
    best.output_dir.clear();
    out.write_json("tuned_config.json", manifest_config(best));
    log << fmt::format("best {} score {:.4f} at r {} rho {}\n", task, best_score,
                       format_number(best.memristor.r_low_voltage), format_number(best.memristor.rho));
    return best;
}

void cmd_simulate(const ExperimentConfig& cfg, OutputDir& out, std::ostream& log) {
    if (cfg.sweep.amplitudes.empty()) throw ConfigError("simulate needs a non-empty sweep.amplitudes list");
    const SweepConfig sc = sweep_config(cfg);
    const CircuitParams params = cfg.circuit.params();
    const MemristorIV model = model_for(cfg.memristor.r_low_voltage, cfg.memristor.rho);
    std::ostringstream index;
    index << "index,U,file\n";
    for (std::size_t k = 0; k < cfg.sweep.amplitudes.size(); ++k) {
        const double u = cfg.sweep.amplitudes[k];
        const Trajectory traj = driven_response(u, params, model, sc);
        std::ostringstream csv;
        write_trajectory_csv(csv, traj);
        const std::string name = "trajectory_" + std::to_string(k) + ".csv";
        out.write(name, csv.str());
        index << k << ',' << format_number(u) << ',' << name << '\n';
        log << fmt::format("U {}: {} samples -> {}\n", format_number(u), traj.size(), name);
    }
    out.write("trajectories.csv", index.str());
}

int run_command(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
    try {
        ExperimentConfig cfg = load_config(opts.config_path);
        if (opts.seed) cfg.seed = *opts.seed;
        if (opts.threads) {
            if (*opts.threads < 1) throw ConfigError("--threads must be >= 1");
            cfg.threads = *opts.threads;
        }
        fs::path root;
        if (opts.out_dir) {
            root = *opts.out_dir;
        } else if (!cfg.output_dir.empty()) {
            root = cfg.output_dir;
        } else if (const char* env = std::getenv(kOutputEnvVar); env && *env) {
            root = env;
        } else {
            root = "memchaos_out";
        }

        const std::string& c = opts.command;
        if (c != "bifurcate" && c != "static" && c != "stream" && c != "crosspoint" && c != "tune" &&
            c != "simulate") {
            throw ConfigError("unknown command '" + c + "'");
        }
        if (c == "crosspoint" && !opts.readout_path) throw ConfigError("crosspoint needs --readout PATH");

        OutputDir out(root);
        if (c == "bifurcate") {
            cmd_bifurcate(cfg, out, log);
        } else if (c == "static") {
            cmd_static_task(cfg, out, log);
        } else if (c == "stream") {
            cmd_stream_task(cfg, out, log);
        } else if (c == "crosspoint") {
            cmd_crosspoint(cfg, *opts.readout_path, out, log);
        } else if (c == "tune") {
            cmd_tune(cfg, opts.task, out, log);
        } else {
            cmd_simulate(cfg, out, log);
        }
        out.write_manifest(c, cfg);
        log << "wrote " << (out.root() / "manifest.json").string() << '\n';
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUserError;
    } catch (const InvalidArgument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitUserError;
    } catch (const IntegrationError& e) {
        err << "numerical failure at t = " << format_number(e.time()) << " s: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const InitializationError& e) {
        err << "initialization failed: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ProgrammingFailure& e) {
        err << "programming failed: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const DegenerateData& e) {
        err << "degenerate data: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const UnsupportedMapping& e) {
        err << "unsupported mapping: " << e.what() << '\n';
        return kExitUnsupported;
    } catch (const fs::filesystem_error& e) {
        err << "filesystem error: " << e.what() << '\n';
        return kExitUserError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace memchaos
