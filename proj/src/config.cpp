#include "memchaos/config.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "memchaos/error.hpp"

namespace memchaos {

namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects any it did not consume.
class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(where() + " must be a mapping");
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        return obj_.at(key);
    }

    void number(const std::string& key, double& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
        out = v.get<double>();
    }

    void integer(const std::string& key, int& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
        out = v.get<int>();
    }

    void unsigned_integer(const std::string& key, std::uint64_t& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ConfigError(where(key) + " must be a non-negative integer");
        }
        out = v.get<std::uint64_t>();
    }

    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(where(key) + " must be true or false");
        out = v.get<bool>();
    }

    void string(const std::string& key, std::string& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
        out = v.get<std::string>();
    }

    void optional_number(const std::string& key, std::optional<double>& out) {
        if (!has(key)) return;
        double x = 0.0;
        number(key, x);
        out = x;
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(where(key) + " must be a list of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(where(key) + " must be a list of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(where(key) + " must be a list of strings");
        std::vector<std::string> out;
        for (const auto& e : v) {
            if (!e.is_string()) throw ConfigError(where(key) + " must be a list of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    Reader child(const std::string& key) { return Reader(raw(key), where(key)); }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!used_.count(key)) throw ConfigError("unknown key " + where(key));
        }
    }

    std::string where(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> used_;
};

TrainMethod method_from(const std::string& name, const std::string& where) {
    try {
        return parse_method(name);
    } catch (const InvalidArgument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

std::vector<double> amplitude_axis(Reader& r, const std::string& key) {
    const json& v = r.raw(key);
    if (v.is_array()) {
        Reader tmp(json::object(), r.where(key));
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(r.where(key) + " must be a list of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    Reader range(v, r.where(key));
    double from = 0.0;
    double to = 0.0;
    int count = 0;
    range.number("from", from);
    range.number("to", to);
    range.integer("count", count);
    range.finish();
    if (count < 1) throw ConfigError(r.where(key) + ".count must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        out[static_cast<std::size_t>(k)] =
            count == 1 ? from
                       : (from * static_cast<double>(count - 1 - k) + to * static_cast<double>(k)) /
                             static_cast<double>(count - 1);
    }
    return out;
}

json yaml_node_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined:
            return nullptr;
        case YAML::NodeType::Sequence: {
            json out = json::array();
            for (const auto& e : node) out.push_back(yaml_node_to_json(e));
            return out;
        }
        case YAML::NodeType::Map: {
            json out = json::object();
            for (const auto& kv : node) out[kv.first.as<std::string>()] = yaml_node_to_json(kv.second);
            return out;
        }
        case YAML::NodeType::Scalar: {
            const std::string text = node.Scalar();
            if (node.Tag() == "!") return text;  // quoted scalar
            if (text == "true" || text == "True") return true;
            if (text == "false" || text == "False") return false;
            long long i = 0;
            if (YAML::convert<long long>::decode(node, i) &&
                text.find_first_of(".eE") == std::string::npos) {
                return i;
            }
            double d = 0.0;
            if (YAML::convert<double>::decode(node, d)) return d;
            return text;
        }
    }
    return nullptr;
}

}  // namespace

StreamTask parse_stream_task(const std::string& text) {
    std::size_t split = text.size();
    while (split > 0 && std::isdigit(static_cast<unsigned char>(text[split - 1]))) --split;
    if (split == 0 || split == text.size()) {
        throw InvalidArgument("stream task '" + text + "' must look like XOR3");
    }
    StreamTask task{parse_function(text.substr(0, split)), std::stoi(text.substr(split))};
    check_arity(task.function, task.n_inputs);
    return task;
}

CircuitParams CircuitConfig::params() const {
    if (R || L || G_N) {
        if (!(R && L && G_N)) throw InvalidArgument("explicit circuit needs all of R, L and G_N");
        CircuitParams p{C, *R, *L, *G_N};
        p.validate();
        return p;
    }
    return size_circuit(g_max, k, C);
}

AmplitudeTable SignalConfig::table() const { return amplitude_table(n_bits, u_min, u_max, amplitudes); }

TrainConfig TrainingConfig::for_method(TrainMethod method, bool stream) const {
    TrainConfig cfg;
    cfg.method = method;
    cfg.ridge_lambda = ridge_lambda;
    cfg.svm_c = svm_c;
    cfg.svm_epochs = svm_epochs;
    cfg.split = stream ? stream_split : split;
    cfg.split_seed = split_seed;
    cfg.svm_seed = svm_seed;
    return cfg;
}

std::vector<double> ExperimentConfig::states() const {
    if (!sweep.memristor_states.empty()) return sweep.memristor_states;
    return {memristor.r_low_voltage};
}

AcquisitionConfig ExperimentConfig::acquisition_for_run() const {
    AcquisitionConfig acq = acquisition;
    acq.rng_seed = seed;
    acq.threads = threads;
    acq.period = signal.period;
    acq.dt = circuit.dt;
    return acq;
}

ExperimentConfig config_from_json(const json& doc) {
    ExperimentConfig cfg;
    Reader top(doc, "");
    top.unsigned_integer("seed", cfg.seed);
    top.string("output_dir", cfg.output_dir);
    top.integer("threads", cfg.threads);

    if (top.has("memristor")) {
        Reader r = top.child("memristor");
        r.number("r_low_voltage", cfg.memristor.r_low_voltage);
        r.number("rho", cfg.memristor.rho);
        r.finish();
    }
    if (top.has("circuit")) {
        Reader r = top.child("circuit");
        r.number("C", cfg.circuit.C);
        r.number("k", cfg.circuit.k);
        r.number("g_max", cfg.circuit.g_max);
        r.optional_number("R", cfg.circuit.R);
        r.optional_number("L", cfg.circuit.L);
        r.optional_number("G_N", cfg.circuit.G_N);
        r.number("dt", cfg.circuit.dt);
        r.finish();
    }
    if (top.has("signal")) {
        Reader r = top.child("signal");
        r.number("period", cfg.signal.period);
        r.integer("n_bits", cfg.signal.n_bits);
        if (r.has("amplitudes")) cfg.signal.amplitudes = r.numbers("amplitudes");
        r.number("u_min", cfg.signal.u_min);
        r.number("u_max", cfg.signal.u_max);
        if (r.has("stream")) {
            Reader s = r.child("stream");
            s.number("u_low", cfg.signal.stream.u_low);
            s.number("u_high", cfg.signal.stream.u_high);
            s.number("offset", cfg.signal.stream.offset);
            s.integer("stream_length", cfg.signal.stream.stream_length);
            s.integer("n_streams", cfg.signal.stream.n_streams);
            s.finish();
        }
        r.finish();
    }
    if (top.has("acquisition")) {
        Reader r = top.child("acquisition");
        auto& a = cfg.acquisition;
        r.integer("samples_per_trace", a.samples_per_trace);
        r.integer("samples_per_period", a.samples_per_period);
        r.integer("periods_per_trace", a.periods_per_trace);
        r.integer("transient_discard_periods", a.transient_discard_periods);
        r.number("init_noise_sigma", a.init_noise_sigma);
        r.number("meas_noise_sigma", a.meas_noise_sigma);
        r.integer("repetitions", a.repetitions);
        r.finish();
    }
    if (top.has("train")) {
        Reader r = top.child("train");
        auto& t = cfg.train;
        if (r.has("methods")) {
            t.methods.clear();
            for (const auto& m : r.strings("methods")) t.methods.push_back(method_from(m, r.where("methods")));
            if (t.methods.empty()) throw ConfigError("train.methods must not be empty");
        }
        if (r.has("stream_method")) {
            std::string m;
            r.string("stream_method", m);
            t.stream_method = method_from(m, r.where("stream_method"));
        }
        r.number("ridge_lambda", t.ridge_lambda);
        r.number("svm_c", t.svm_c);
        r.integer("svm_epochs", t.svm_epochs);
        r.number("split", t.split);
        r.number("stream_split", t.stream_split);
        r.unsigned_integer("split_seed", t.split_seed);
        r.unsigned_integer("svm_seed", t.svm_seed);
        if (r.has("prune_keep")) {
            for (double k : r.numbers("prune_keep")) t.prune_keep.push_back(static_cast<int>(k));
        }
        r.finish();
    }
    if (top.has("tasks")) {
        Reader r = top.child("tasks");
        try {
            if (r.has("static_functions")) {
                cfg.static_functions.clear();
                for (const auto& f : r.strings("static_functions")) cfg.static_functions.push_back(parse_function(f));
            }
            if (r.has("stream_functions")) {
                for (const auto& f : r.strings("stream_functions")) cfg.stream_functions.push_back(parse_stream_task(f));
            }
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("tasks: ") + e.what());
        }
        r.finish();
    }
    if (top.has("sweep")) {
        Reader r = top.child("sweep");
        auto& s = cfg.sweep;
        if (r.has("amplitudes")) s.amplitudes = amplitude_axis(r, "amplitudes");
        if (r.has("memristor_states")) s.memristor_states = r.numbers("memristor_states");
        if (r.has("rho_values")) s.rho_values = r.numbers("rho_values");
        if (r.has("offsets")) s.offsets = r.numbers("offsets");
        if (r.has("amplitude_tables")) {
            for (const auto& t : r.raw("amplitude_tables")) {
                if (!t.is_array()) throw ConfigError("sweep.amplitude_tables must be a list of lists");
                s.amplitude_tables.push_back(t.get<std::vector<double>>());
            }
        }
        if (r.has("stream_levels")) {
            for (const auto& p : r.raw("stream_levels")) {
                if (!p.is_array() || p.size() != 2) throw ConfigError("sweep.stream_levels entries must be [u_low, u_high]");
                s.stream_levels.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
        }
        r.finish();
    }
    if (top.has("analysis")) {
        Reader r = top.child("analysis");
        r.integer("periods", cfg.analysis.periods);
        r.integer("discard_periods", cfg.analysis.discard_periods);
        r.number("hysteresis_eps", cfg.analysis.hysteresis_eps);
        r.number("cluster_eps", cfg.analysis.cluster_eps);
        r.finish();
    }
    if (top.has("crosspoint")) {
        Reader r = top.child("crosspoint");
        auto& d = cfg.crosspoint.device;
        auto& pv = cfg.crosspoint.pv;
        r.number("alpha", d.alpha);
        r.number("sigma_prog", d.sigma_prog);
        r.number("sigma_read", d.sigma_read);
        r.number("g_min", d.g_min);
        r.number("g_max", d.g_max);
        r.number("i_cc0", pv.i_cc0);
        r.number("delta_icc", pv.delta_icc);
        r.number("g_th_fraction", pv.g_th_fraction);
        r.integer("max_iters", pv.max_iters);
        r.integer("keep_m", cfg.crosspoint.keep_m);
        r.number("min_ratio", cfg.crosspoint.min_ratio);
        r.finish();
    }
    if (top.has("ablation")) {
        Reader r = top.child("ablation");
        r.boolean("amplitude_only", cfg.amplitude_only);
        r.finish();
    }
    if (top.has("outputs")) {
        Reader r = top.child("outputs");
        r.boolean("datasets", cfg.write_datasets);
        r.boolean("readouts", cfg.write_readouts);
        r.finish();
    }
    top.finish();

    // Module-level invariants.
    try {
        if (cfg.threads < 1) throw InvalidArgument("threads must be >= 1");
        for (double r : cfg.states()) build_model(MemristorState(r), cfg.memristor.rho);
        for (double rho : cfg.sweep.rho_values) build_model(MemristorState(cfg.memristor.r_low_voltage), rho);
        cfg.circuit.params();
        cfg.signal.table();
        cfg.signal.stream.validate();
        cfg.acquisition_for_run().validate();
        for (TrainMethod m : cfg.train.methods) cfg.train.for_method(m).validate();
        cfg.train.for_method(cfg.train.stream_method, true).validate();
        for (int k : cfg.train.prune_keep) {
            if (k < 1) throw InvalidArgument("prune_keep entries must be >= 1");
        }
        for (const auto& t : cfg.sweep.amplitude_tables) AmplitudeTable(cfg.signal.n_bits, t);
        for (const auto& t : cfg.stream_functions) {
            if (cfg.signal.stream.stream_length < t.n_inputs) {
                throw InvalidArgument("stream_length is shorter than the arity of " + t.name());
            }
        }
        for (BooleanFunction f : cfg.static_functions) check_arity(f, cfg.signal.n_bits);
        if (cfg.analysis.periods <= cfg.analysis.discard_periods || cfg.analysis.discard_periods < 0) {
            throw InvalidArgument("analysis.periods must exceed analysis.discard_periods");
        }
        cfg.crosspoint.device.validate();
        cfg.crosspoint.pv.validate();
        if (cfg.crosspoint.keep_m < 1) throw InvalidArgument("crosspoint.keep_m must be >= 1");
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    if (!cfg.output_dir.empty()) j["output_dir"] = cfg.output_dir;
    j["memristor"] = {{"r_low_voltage", cfg.memristor.r_low_voltage}, {"rho", cfg.memristor.rho}};
    json circuit = {{"C", cfg.circuit.C}, {"k", cfg.circuit.k}, {"g_max", cfg.circuit.g_max}, {"dt", cfg.circuit.dt}};
    if (cfg.circuit.R) circuit["R"] = *cfg.circuit.R;
    if (cfg.circuit.L) circuit["L"] = *cfg.circuit.L;
    if (cfg.circuit.G_N) circuit["G_N"] = *cfg.circuit.G_N;
    j["circuit"] = circuit;
    json signal = {{"period", cfg.signal.period},
                   {"n_bits", cfg.signal.n_bits},
                   {"u_min", cfg.signal.u_min},
                   {"u_max", cfg.signal.u_max},
                   {"stream",
                    {{"u_low", cfg.signal.stream.u_low},
                     {"u_high", cfg.signal.stream.u_high},
                     {"offset", cfg.signal.stream.offset},
                     {"stream_length", cfg.signal.stream.stream_length},
                     {"n_streams", cfg.signal.stream.n_streams}}}};
    if (cfg.signal.amplitudes) signal["amplitudes"] = *cfg.signal.amplitudes;
    j["signal"] = signal;
    const auto& a = cfg.acquisition;
    j["acquisition"] = {{"samples_per_trace", a.samples_per_trace},
                        {"samples_per_period", a.samples_per_period},
                        {"periods_per_trace", a.periods_per_trace},
                        {"transient_discard_periods", a.transient_discard_periods},
                        {"init_noise_sigma", a.init_noise_sigma},
                        {"meas_noise_sigma", a.meas_noise_sigma},
                        {"repetitions", a.repetitions}};
    json methods = json::array();
    for (TrainMethod m : cfg.train.methods) methods.push_back(to_string(m));
    j["train"] = {{"methods", methods},
                  {"stream_method", to_string(cfg.train.stream_method)},
                  {"ridge_lambda", cfg.train.ridge_lambda},
                  {"svm_c", cfg.train.svm_c},
                  {"svm_epochs", cfg.train.svm_epochs},
                  {"split", cfg.train.split},
                  {"stream_split", cfg.train.stream_split},
                  {"split_seed", cfg.train.split_seed},
                  {"svm_seed", cfg.train.svm_seed},
                  {"prune_keep", cfg.train.prune_keep}};
    json fns = json::array();
    for (BooleanFunction f : cfg.static_functions) fns.push_back(to_string(f));
    json sfns = json::array();
    for (const auto& t : cfg.stream_functions) sfns.push_back(t.name());
    j["tasks"] = {{"static_functions", fns}, {"stream_functions", sfns}};
    json sweep = json::object();
    if (!cfg.sweep.amplitudes.empty()) sweep["amplitudes"] = cfg.sweep.amplitudes;
    if (!cfg.sweep.memristor_states.empty()) sweep["memristor_states"] = cfg.sweep.memristor_states;
    if (!cfg.sweep.rho_values.empty()) sweep["rho_values"] = cfg.sweep.rho_values;
    if (!cfg.sweep.amplitude_tables.empty()) sweep["amplitude_tables"] = cfg.sweep.amplitude_tables;
    if (!cfg.sweep.offsets.empty()) sweep["offsets"] = cfg.sweep.offsets;
    if (!cfg.sweep.stream_levels.empty()) {
        json levels = json::array();
        for (const auto& [lo, hi] : cfg.sweep.stream_levels) levels.push_back({lo, hi});
        sweep["stream_levels"] = levels;
    }
    j["sweep"] = sweep;
    j["analysis"] = {{"periods", cfg.analysis.periods},
                     {"discard_periods", cfg.analysis.discard_periods},
                     {"hysteresis_eps", cfg.analysis.hysteresis_eps},
                     {"cluster_eps", cfg.analysis.cluster_eps}};
    const auto& d = cfg.crosspoint.device;
    const auto& pv = cfg.crosspoint.pv;
    j["crosspoint"] = {{"alpha", d.alpha},         {"sigma_prog", d.sigma_prog},
                       {"sigma_read", d.sigma_read}, {"g_min", d.g_min},
                       {"g_max", d.g_max},         {"i_cc0", pv.i_cc0},
                       {"delta_icc", pv.delta_icc}, {"g_th_fraction", pv.g_th_fraction},
                       {"max_iters", pv.max_iters}, {"keep_m", cfg.crosspoint.keep_m},
                       {"min_ratio", cfg.crosspoint.min_ratio}};
    j["ablation"] = {{"amplitude_only", cfg.amplitude_only}};
    j["outputs"] = {{"datasets", cfg.write_datasets}, {"readouts", cfg.write_readouts}};
    return j;
}

json yaml_to_json(const std::string& text) {
    try {
        return yaml_node_to_json(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("YAML parse error: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    json doc;
    const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    if (is_json) {
        try {
            doc = json::parse(text);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("JSON parse error: ") + e.what());
        }
    } else {
        doc = yaml_to_json(text);
        if (doc.is_null()) doc = json::object();
    }
    try {
        return config_from_json(doc);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    }
}

}  // namespace memchaos
