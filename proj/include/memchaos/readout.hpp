#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace memchaos {

enum class TrainMethod { Ridge, Svm };

TrainMethod parse_method(const std::string& name);
std::string to_string(TrainMethod method);

struct TrainConfig {
    TrainMethod method = TrainMethod::Svm;
    double ridge_lambda = 1e-3;
    double svm_c = 1.0;
    int svm_epochs = 200;
    double split = 0.8;  // training fraction
    std::uint64_t split_seed = 7;
    std::uint64_t svm_seed = 11;  // visiting order of the SVM epochs

    void validate() const;
};

/// Weighted sum plus bias, thresholded at zero. A score of exactly zero is
/// class 1. Pruned features carry weight 0 and a false mask entry.
struct LinearReadout {
    Eigen::VectorXd weights;
    double bias = 0.0;
    std::vector<bool> active_mask;

    static LinearReadout zeros(Eigen::Index n_features);

    Eigen::Index n_features() const { return weights.size(); }
    double score(const Eigen::Ref<const Eigen::VectorXd>& x) const { return weights.dot(x) + bias; }
    std::uint8_t predict(const Eigen::Ref<const Eigen::VectorXd>& x) const { return score(x) >= 0.0 ? 1 : 0; }
    std::vector<std::size_t> active_indices() const;
};

/// Rows of X with 0/1 labels.
struct LabeledSet {
    Eigen::MatrixXd X;
    std::vector<std::uint8_t> y;

    std::size_t rows() const { return y.size(); }
};

/// Minimizes sum (w.x + b - y)^2 + lambda |w|^2 with the bias unregularized.
/// Targets are real-valued; classification uses the sign of the score.
LinearReadout train_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);

/// Objective 0.5 |w|^2 + c sum max(0, 1 - y (w.x + b)), y in {-1, +1}.
double svm_objective(const LinearReadout& readout, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, double c);

struct SvmTrace {
    LinearReadout readout;
    /// Objective of the returned (best-so-far) iterate after each epoch.
    std::vector<double> objective;
};

/// Stochastic subgradient descent (Pegasos schedule) with a seeded
/// per-epoch visiting order; returns the best epoch-averaged iterate.
SvmTrace train_svm_traced(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double c, int epochs,
                          std::uint64_t seed);
LinearReadout train_svm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double c, int epochs,
                        std::uint64_t seed);

/// Maps 0/1 labels to -1/+1 and dispatches on cfg.method.
/// Throws DegenerateData when only one class is present.
LinearReadout train_classifier(const Eigen::MatrixXd& X, std::span<const std::uint8_t> labels,
                               const TrainConfig& cfg);

double evaluate(const LinearReadout& readout, const Eigen::MatrixXd& X,
                std::span<const std::uint8_t> labels);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

/// Per group (e.g. input word), a seeded shuffle puts round(fraction * size)
/// members in training and the rest in validation.
Split stratified_split(std::span<const std::size_t> groups, double fraction, std::uint64_t seed);

/// Whole groups (e.g. bit streams) go to one side: round(fraction * n_groups)
/// groups train, the others validate.
Split group_split(std::span<const std::size_t> groups, double fraction, std::uint64_t seed);

LabeledSet subset(const Eigen::MatrixXd& X, std::span<const std::uint8_t> labels,
                  std::span<const std::size_t> rows);

/// Column restriction of a matrix.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, std::span<const std::size_t> cols);

/// Indices of the `m` largest |w|, ties to the lower index, returned ascending.
std::vector<std::size_t> top_magnitude(const Eigen::VectorXd& weights, std::size_t m);

struct PruneResult {
    LinearReadout readout;  // full width, zeros outside `kept`
    double accuracy = 0.0;  // on the validation set
    std::vector<std::size_t> kept;
};

/// Trains on all features, keeps the keep_m largest |w|, retrains on those
/// columns only and scores the validation set.
PruneResult prune_retrain(const LabeledSet& train, const LabeledSet& validation,
                          const TrainConfig& cfg, std::size_t keep_m);

/// Like prune_retrain but the retrained weights must all be positive and
/// no smaller than `min_ratio` times the largest. Candidates that fail are
/// banned and refilled from the next-largest positive weights of the full
/// model. Throws DegenerateData when the candidate pool runs out.
PruneResult prune_positive(const LabeledSet& train, const LabeledSet& validation,
                           const TrainConfig& cfg, std::size_t keep_m, double min_ratio = 0.0);

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// {weights, bias, active_mask, train_config, dataset_hash}.
nlohmann::json readout_to_json(const LinearReadout& readout, const TrainConfig& cfg,
                               const std::string& dataset_hash);
LinearReadout readout_from_json(const nlohmann::json& j);

}  // namespace memchaos
