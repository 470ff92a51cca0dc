#include "memchaos/crosspoint.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "memchaos/error.hpp"
#include "memchaos/io.hpp"

namespace memchaos {

void DeviceProgramModel::validate() const {
    if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
    if (!(sigma_prog >= 0.0) || !(sigma_read >= 0.0)) throw InvalidArgument("device sigmas must be >= 0");
    if (!(g_min > 0.0) || !(g_min < g_max)) throw InvalidArgument("device bounds need 0 < g_min < g_max");
}

void PVConfig::validate() const {
    if (!(i_cc0 > 0.0) || !(delta_icc > 0.0)) throw InvalidArgument("compliance currents must be positive");
    if (!(g_th_fraction > 0.0 && g_th_fraction <= 1.0)) {
        throw InvalidArgument("g_th_fraction must lie in (0, 1]");
    }
    if (max_iters < 0) throw InvalidArgument("max_iters must be >= 0");
}

ColumnMapping map_weights(const LinearReadout& readout, const DeviceProgramModel& dev) {
    dev.validate();
    ColumnMapping out;
    out.features = readout.active_indices();
    if (out.features.empty()) throw UnsupportedMapping("readout has no surviving features");
    double largest = 0.0;
    for (std::size_t j : out.features) {
        const double w = readout.weights[static_cast<Eigen::Index>(j)];
        if (!(w > 0.0)) {
            throw UnsupportedMapping(
                "feature " + std::to_string(j) +
                " has a non-positive weight; a single positive column cannot realize it "
                "(prune with positive weights or use a differential G+/G- pair)");
        }
        largest = std::max(largest, w);
    }
    out.weight_scale = dev.g_max / largest;
    for (std::size_t j : out.features) {
        const double g = out.weight_scale * readout.weights[static_cast<Eigen::Index>(j)];
        if (g < dev.g_min) {
            throw UnsupportedMapping("scaled conductance " + format_number(g) + " S of feature " +
                                     std::to_string(j) + " is below g_min");
        }
        out.target_g.push_back(std::min(g, dev.g_max));
    }
    out.i_th = -out.weight_scale * readout.bias;
    return out;
}

PVResult program_and_verify(double target_g, const DeviceProgramModel& dev, const PVConfig& pv,
                            std::uint64_t seed) {
    dev.validate();
    pv.validate();
    if (!(target_g > 0.0) || target_g > dev.g_max) {
        throw InvalidArgument("target conductance must lie in (0, g_max]");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double threshold = pv.g_th_fraction * target_g;

    PVResult out;
    for (int k = 0; k <= pv.max_iters; ++k) {
        const double i_cc = pv.i_cc0 + static_cast<double>(k) * pv.delta_icc;
        const double g = dev.alpha * i_cc * (1.0 + dev.sigma_prog * gauss(rng));
        const double read = g * (1.0 + dev.sigma_read * gauss(rng));
        out.trace.push_back({k, i_cc, read});
        if (read >= threshold) {
            out.achieved_g = g;
            out.iterations = k;
            out.relative_error = std::abs(g - target_g) / target_g;
            return out;
        }
    }
    throw ProgrammingFailure("program-and-verify did not reach " + format_number(threshold) +
                             " S within " + std::to_string(pv.max_iters) + " increments");
}

CrosspointColumn ideal_column(const ColumnMapping& mapping) {
    return {mapping.features, mapping.target_g, mapping.i_th, mapping.weight_scale};
}

CrosspointColumn program_column(const ColumnMapping& mapping, const DeviceProgramModel& dev,
                                const PVConfig& pv, std::uint64_t seed,
                                std::vector<PVResult>* results) {
    CrosspointColumn col = ideal_column(mapping);
    std::mt19937_64 seeder(seed);
    if (results) results->clear();
    for (std::size_t k = 0; k < mapping.target_g.size(); ++k) {
        PVResult r = program_and_verify(mapping.target_g[k], dev, pv, seeder());
        col.conductances[k] = r.achieved_g;
        if (results) results->push_back(std::move(r));
    }
    return col;
}

MacResult mac_infer(const CrosspointColumn& column, std::span<const double> x) {
    if (x.size() != column.size()) throw InvalidArgument("input length differs from column size");
    double i_out = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) i_out += column.conductances[k] * x[k];
    return {i_out, static_cast<std::uint8_t>(i_out >= column.i_th ? 1 : 0)};
}

MacResult mac_infer_row(const CrosspointColumn& column, const Eigen::Ref<const Eigen::VectorXd>& row) {
    std::vector<double> x(column.size());
    for (std::size_t k = 0; k < column.size(); ++k) {
        const auto j = static_cast<Eigen::Index>(column.features[k]);
        if (j >= row.size()) throw InvalidArgument("column feature index outside the sample row");
        x[k] = row[j];
    }
    return mac_infer(column, x);
}

double column_accuracy(const CrosspointColumn& column, const Eigen::MatrixXd& X,
                       std::span<const std::uint8_t> labels) {
    if (static_cast<std::size_t>(X.rows()) != labels.size() || labels.empty()) {
        throw InvalidArgument("column_accuracy: shape mismatch");
    }
    std::size_t correct = 0;
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (mac_infer_row(column, X.row(static_cast<Eigen::Index>(r)).transpose()).label == labels[r]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

void write_programming_trace_csv(std::ostream& os, std::span<const PVResult> results) {
    os << "device,iteration,i_cc,read_g\n";
    for (std::size_t d = 0; d < results.size(); ++d) {
        for (const auto& s : results[d].trace) {
            os << d << ',' << s.iteration << ',' << format_number(s.i_cc) << ','
               << format_number(s.read_g) << '\n';
        }
    }
}

nlohmann::json column_to_json(const CrosspointColumn& column) {
    return {{"features", column.features},
            {"conductances", column.conductances},
            {"i_th", column.i_th},
            {"weight_scale", column.weight_scale}};
}

}  // namespace memchaos
