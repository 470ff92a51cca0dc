#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "memchaos/readout.hpp"

namespace memchaos {

/// First-order device response to a SET pulse: G = alpha * I_cc * (1 + eta),
/// eta ~ N(0, sigma_prog). Verify reads carry relative noise sigma_read.
struct DeviceProgramModel {
    double alpha = 1.0;  // S/A
    double sigma_prog = 0.05;
    double sigma_read = 0.01;
    double g_min = 1e-6;  // S
    double g_max = 1e-4;  // S

    void validate() const;
};

/// Program-and-verify loop settings.
struct PVConfig {
    double i_cc0 = 5e-6;       // A
    double delta_icc = 1e-6;   // A
    double g_th_fraction = 0.95;
    int max_iters = 500;

    void validate() const;
};

/// Target conductances for the surviving readout features.
struct ColumnMapping {
    std::vector<std::size_t> features;  // indices into the full feature vector
    std::vector<double> target_g;        // S
    double i_th = 0.0;                   // A
    double weight_scale = 0.0;           // S per weight unit
};

struct PVStep {
    int iteration;
    double i_cc;
    double read_g;
};

struct PVResult {
    double achieved_g = 0.0;
    int iterations = 0;  // number of compliance increments
    double relative_error = 0.0;
    std::vector<PVStep> trace;
};

/// A programmed single column: sum_j G_j x_j compared against i_th.
struct CrosspointColumn {
    std::vector<std::size_t> features;
    std::vector<double> conductances;
    double i_th = 0.0;
    double weight_scale = 0.0;

    std::size_t size() const noexcept { return conductances.size(); }
};

struct MacResult {
    double i_out;
    std::uint8_t label;
};

/// Scales the active weights so the largest lands on g_max and sets the
/// threshold current to -scale * bias. Throws UnsupportedMapping for any
/// non-positive surviving weight or a scaled conductance below g_min.
ColumnMapping map_weights(const LinearReadout& readout, const DeviceProgramModel& dev);

/// Simulated program-and-verify of one device towards `target_g`.
PVResult program_and_verify(double target_g, const DeviceProgramModel& dev, const PVConfig& pv,
                            std::uint64_t seed);

/// Column holding exactly the mapped targets.
CrosspointColumn ideal_column(const ColumnMapping& mapping);

/// Programs every device of the mapping; results[k] belongs to device k.
CrosspointColumn program_column(const ColumnMapping& mapping, const DeviceProgramModel& dev,
                                const PVConfig& pv, std::uint64_t seed,
                                std::vector<PVResult>* results = nullptr);

/// `x` holds the sample voltages of the column's features, in order.
MacResult mac_infer(const CrosspointColumn& column, std::span<const double> x);

/// Picks the column's features out of a full feature row and infers.
MacResult mac_infer_row(const CrosspointColumn& column, const Eigen::Ref<const Eigen::VectorXd>& row);

double column_accuracy(const CrosspointColumn& column, const Eigen::MatrixXd& X,
                       std::span<const std::uint8_t> labels);

/// `device,iteration,i_cc,read_g`.
void write_programming_trace_csv(std::ostream& os, std::span<const PVResult> results);

nlohmann::json column_to_json(const CrosspointColumn& column);

}  // namespace memchaos
