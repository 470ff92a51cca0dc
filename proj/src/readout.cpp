#include "memchaos/readout.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "memchaos/error.hpp"

namespace memchaos {

namespace {

Eigen::VectorXd to_signed(std::span<const std::uint8_t> labels) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k] > 1) throw InvalidArgument("labels must be 0 or 1");
        y[static_cast<Eigen::Index>(k)] = labels[k] ? 1.0 : -1.0;
    }
    return y;
}

void require_both_classes(const Eigen::VectorXd& y) {
    const bool has_pos = (y.array() > 0.0).any();
    const bool has_neg = (y.array() < 0.0).any();
    if (!has_pos || !has_neg) throw DegenerateData("training labels contain a single class");
}

LinearReadout expand(const LinearReadout& sub, std::span<const std::size_t> kept, Eigen::Index width) {
    LinearReadout out = LinearReadout::zeros(width);
    std::fill(out.active_mask.begin(), out.active_mask.end(), false);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        out.weights[static_cast<Eigen::Index>(kept[k])] = sub.weights[static_cast<Eigen::Index>(k)];
        out.active_mask[kept[k]] = true;
    }
    out.bias = sub.bias;
    return out;
}

}  // namespace

TrainMethod parse_method(const std::string& name) {
    if (name == "ridge") return TrainMethod::Ridge;
    if (name == "svm") return TrainMethod::Svm;
    throw InvalidArgument("unknown training method '" + name + "'");
}

std::string to_string(TrainMethod method) { return method == TrainMethod::Ridge ? "ridge" : "svm"; }

void TrainConfig::validate() const {
    if (!(ridge_lambda > 0.0)) throw InvalidArgument("ridge_lambda must be positive");
    if (!(svm_c > 0.0)) throw InvalidArgument("svm_c must be positive");
    if (svm_epochs < 1) throw InvalidArgument("svm_epochs must be >= 1");
    if (!(split > 0.0 && split < 1.0)) throw InvalidArgument("split must lie in (0, 1)");
}

LinearReadout LinearReadout::zeros(Eigen::Index n_features) {
    LinearReadout r;
    r.weights = Eigen::VectorXd::Zero(n_features);
    r.active_mask.assign(static_cast<std::size_t>(n_features), true);
    return r;
}

std::vector<std::size_t> LinearReadout::active_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < active_mask.size(); ++k) {
        if (active_mask[k]) out.push_back(k);
    }
    return out;
}

LinearReadout train_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
    if (X.rows() < 2) throw InvalidArgument("ridge needs at least two rows");
    if (X.rows() != y.size()) throw InvalidArgument("feature rows and targets differ in length");
    if (!(lambda > 0.0)) throw InvalidArgument("ridge lambda must be positive");

    // Centering eliminates the unregularized bias exactly.
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;

    Eigen::VectorXd w;
    if (X.cols() <= X.rows()) {
        Eigen::MatrixXd A = Xc.transpose() * Xc;
        A.diagonal().array() += lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success) throw DegenerateData("ridge normal equations are singular");
        w = llt.solve(Xc.transpose() * yc);
    } else {
        // Dual form: w = Xc^T (Xc Xc^T + lambda I)^-1 yc.
        Eigen::MatrixXd K = Xc * Xc.transpose();
        K.diagonal().array() += lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(K);
        if (llt.info() != Eigen::Success) throw DegenerateData("ridge normal equations are singular");
        w = Xc.transpose() * llt.solve(yc);
    }

    LinearReadout r = LinearReadout::zeros(X.cols());
    r.weights = w;
    r.bias = y_mean - x_mean.dot(w);
    return r;
}

double svm_objective(const LinearReadout& readout, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, double c) {
    const Eigen::ArrayXd margins = y.array() * ((X * readout.weights).array() + readout.bias);
    const double hinge = (1.0 - margins).max(0.0).sum();
    return 0.5 * readout.weights.squaredNorm() + c * hinge;
}

SvmTrace train_svm_traced(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double c, int epochs,
                          std::uint64_t seed) {
    if (X.rows() != y.size()) throw InvalidArgument("feature rows and targets differ in length");
    if (!(c > 0.0)) throw InvalidArgument("svm c must be positive");
    if (epochs < 1) throw InvalidArgument("svm needs at least one epoch");
    require_both_classes(y);

    const Eigen::Index n = X.rows();
    const double lambda = 1.0 / (c * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);

    Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
    Eigen::VectorXd w_avg = w;
    double b = 0.0;
    double b_avg = 0.0;

    SvmTrace trace;
    trace.readout = LinearReadout::zeros(X.cols());
    double best = svm_objective(trace.readout, X, y, c);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    double t = 0.0;
    LinearReadout candidate = LinearReadout::zeros(X.cols());
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index idx : order) {
            t += 1.0;
            const double eta = 1.0 / (lambda * t);
            const double margin = y[idx] * (X.row(idx).dot(w) + b);
            w *= 1.0 - 1.0 / t;
            if (margin < 1.0) {
                w.noalias() += (eta * y[idx]) * X.row(idx).transpose();
                b += eta * y[idx];
            }
            const double norm = w.norm();
            if (norm > radius) w *= radius / norm;
            w_avg += (w - w_avg) / t;
            b_avg += (b - b_avg) / t;
        }
        candidate.weights = w_avg;
        candidate.bias = b_avg;
        const double objective = svm_objective(candidate, X, y, c);
        if (objective < best) {
            best = objective;
            trace.readout = candidate;
        }
        trace.objective.push_back(best);
    }
    return trace;
}

LinearReadout train_svm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double c, int epochs,
                        std::uint64_t seed) {
    return train_svm_traced(X, y, c, epochs, seed).readout;
}

LinearReadout train_classifier(const Eigen::MatrixXd& X, std::span<const std::uint8_t> labels,
                               const TrainConfig& cfg) {
    cfg.validate();
    const Eigen::VectorXd y = to_signed(labels);
    require_both_classes(y);
    if (cfg.method == TrainMethod::Ridge) return train_ridge(X, y, cfg.ridge_lambda);
    return train_svm(X, y, cfg.svm_c, cfg.svm_epochs, cfg.svm_seed);
}

double evaluate(const LinearReadout& readout, const Eigen::MatrixXd& X,
                std::span<const std::uint8_t> labels) {
    if (static_cast<std::size_t>(X.rows()) != labels.size() || X.cols() != readout.n_features()) {
        throw InvalidArgument("evaluate: shape mismatch");
    }
    if (labels.empty()) throw InvalidArgument("evaluate: no rows");
    const Eigen::VectorXd scores = (X * readout.weights).array() + readout.bias;
    std::size_t correct = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const std::uint8_t predicted = scores[static_cast<Eigen::Index>(k)] >= 0.0 ? 1 : 0;
        if (predicted == labels[k]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

Split stratified_split(std::span<const std::size_t> groups, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("split fraction must lie in (0, 1)");
    std::map<std::size_t, std::vector<std::size_t>> members;
    for (std::size_t k = 0; k < groups.size(); ++k) members[groups[k]].push_back(k);
    std::mt19937_64 rng(seed);
    Split out;
    for (auto& [group, rows] : members) {
        std::shuffle(rows.begin(), rows.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows.size())));
        out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.validation.insert(out.validation.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    return out;
}

Split group_split(std::span<const std::size_t> groups, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("split fraction must lie in (0, 1)");
    std::vector<std::size_t> ids(groups.begin(), groups.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
    const std::set<std::size_t> train_groups(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    Split out;
    for (std::size_t k = 0; k < groups.size(); ++k) {
        (train_groups.count(groups[k]) ? out.train : out.validation).push_back(k);
    }
    return out;
}

LabeledSet subset(const Eigen::MatrixXd& X, std::span<const std::uint8_t> labels,
                  std::span<const std::size_t> rows) {
    LabeledSet out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    out.y.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.X.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(rows[k]));
        out.y.push_back(labels[rows[k]]);
    }
    return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, std::span<const std::size_t> cols) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(cols[k]));
    }
    return out;
}

std::vector<std::size_t> top_magnitude(const Eigen::VectorXd& weights, std::size_t m) {
    std::vector<std::size_t> order(static_cast<std::size_t>(weights.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(weights[static_cast<Eigen::Index>(a)]) > std::abs(weights[static_cast<Eigen::Index>(b)]);
    });
    order.resize(std::min(m, order.size()));
    std::sort(order.begin(), order.end());
    return order;
}

PruneResult prune_retrain(const LabeledSet& train, const LabeledSet& validation,
                          const TrainConfig& cfg, std::size_t keep_m) {
    const auto width = static_cast<std::size_t>(train.X.cols());
    if (keep_m < 1 || keep_m > width) throw InvalidArgument("keep_m must lie in [1, feature count]");
    const LinearReadout full = train_classifier(train.X, train.y, cfg);

    PruneResult out;
    if (keep_m == width) {
        out.readout = full;
        out.kept.resize(width);
        std::iota(out.kept.begin(), out.kept.end(), std::size_t{0});
    } else {
        out.kept = top_magnitude(full.weights, keep_m);
        const LinearReadout sub = train_classifier(select_columns(train.X, out.kept), train.y, cfg);
        out.readout = expand(sub, out.kept, train.X.cols());
    }
    out.accuracy = evaluate(out.readout, validation.X, validation.y);
    return out;
}

PruneResult prune_positive(const LabeledSet& train, const LabeledSet& validation,
                           const TrainConfig& cfg, std::size_t keep_m, double min_ratio) {
    const auto width = static_cast<std::size_t>(train.X.cols());
    if (keep_m < 1 || keep_m > width) throw InvalidArgument("keep_m must lie in [1, feature count]");
    if (!(min_ratio >= 0.0 && min_ratio < 1.0)) throw InvalidArgument("min_ratio must lie in [0, 1)");
    const LinearReadout full = train_classifier(train.X, train.y, cfg);

    std::vector<std::size_t> by_weight(width);
    std::iota(by_weight.begin(), by_weight.end(), std::size_t{0});
    std::stable_sort(by_weight.begin(), by_weight.end(), [&](std::size_t a, std::size_t b) {
        return full.weights[static_cast<Eigen::Index>(a)] > full.weights[static_cast<Eigen::Index>(b)];
    });

    std::vector<bool> banned(width, false);
    for (;;) {
        std::vector<std::size_t> candidates;
        for (std::size_t j : by_weight) {
            if (candidates.size() == keep_m) break;
            if (full.weights[static_cast<Eigen::Index>(j)] > 0.0 && !banned[j]) candidates.push_back(j);
        }
        if (candidates.size() < keep_m) {
            throw DegenerateData("not enough positively weighted features for a single-column readout");
        }
        std::sort(candidates.begin(), candidates.end());
        const LinearReadout sub = train_classifier(select_columns(train.X, candidates), train.y, cfg);
        const double largest = sub.weights.maxCoeff();
        bool ok = true;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            const double wk = sub.weights[static_cast<Eigen::Index>(k)];
            if (!(wk > 0.0) || wk < min_ratio * largest) {
                banned[candidates[k]] = true;
                ok = false;
            }
        }
        if (ok) {
            PruneResult out;
            out.kept = candidates;
            out.readout = expand(sub, candidates, train.X.cols());
            out.accuracy = evaluate(out.readout, validation.X, validation.y);
            return out;
        }
    }
}

nlohmann::json to_json(const TrainConfig& cfg) {
    return {{"method", to_string(cfg.method)},   {"ridge_lambda", cfg.ridge_lambda},
            {"svm_c", cfg.svm_c},                {"svm_epochs", cfg.svm_epochs},
            {"split", cfg.split},                {"split_seed", cfg.split_seed},
            {"svm_seed", cfg.svm_seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.method = parse_method(j.at("method").get<std::string>());
    cfg.ridge_lambda = j.at("ridge_lambda").get<double>();
    cfg.svm_c = j.at("svm_c").get<double>();
    cfg.svm_epochs = j.at("svm_epochs").get<int>();
    cfg.split = j.at("split").get<double>();
    cfg.split_seed = j.at("split_seed").get<std::uint64_t>();
    cfg.svm_seed = j.value("svm_seed", cfg.svm_seed);
    cfg.validate();
    return cfg;
}

nlohmann::json readout_to_json(const LinearReadout& readout, const TrainConfig& cfg,
                               const std::string& dataset_hash) {
    nlohmann::json j;
    j["weights"] = std::vector<double>(readout.weights.data(), readout.weights.data() + readout.weights.size());
    j["bias"] = readout.bias;
    j["active_mask"] = readout.active_mask;
    j["train_config"] = to_json(cfg);
    j["dataset_hash"] = dataset_hash;
    return j;
}

LinearReadout readout_from_json(const nlohmann::json& j) {
    try {
        const auto weights = j.at("weights").get<std::vector<double>>();
        LinearReadout r = LinearReadout::zeros(static_cast<Eigen::Index>(weights.size()));
        for (std::size_t k = 0; k < weights.size(); ++k) r.weights[static_cast<Eigen::Index>(k)] = weights[k];
        r.bias = j.at("bias").get<double>();
        r.active_mask = j.at("active_mask").get<std::vector<bool>>();
        if (r.active_mask.size() != weights.size()) {
            throw InvalidArgument("readout mask and weights differ in length");
        }
        for (std::size_t k = 0; k < weights.size(); ++k) {
            if (!r.active_mask[k] && weights[k] != 0.0) {
                throw InvalidArgument("pruned feature carries a nonzero weight");
            }
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed readout JSON: ") + e.what());
    }
}

}  // namespace memchaos
