#include "memchaos/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "memchaos/error.hpp"
#include "memchaos/io.hpp"
#include "memchaos/parallel.hpp"

namespace memchaos {

const char* to_string(ExtremumKind kind) { return kind == ExtremumKind::Max ? "max" : "min"; }

std::vector<double> ExtremaSet::values(ExtremumKind kind) const {
    std::vector<double> out;
    for (const auto& p : points) {
        if (p.kind == kind) out.push_back(p.v);
    }
    return out;
}

ExtremaSet local_extrema(const Trajectory& traj, int discard_periods, double hysteresis_eps,
                         double drive_period) {
    traj.validate();
    if (discard_periods < 0) throw InvalidArgument("discard_periods must be >= 0");
    if (!(hysteresis_eps >= 0.0)) throw InvalidArgument("hysteresis_eps must be >= 0");
    if (!(drive_period > 0.0)) throw InvalidArgument("drive period must be positive");

    const double t0 = traj.t.front();
    const double start = t0 + discard_periods * drive_period;
    if (!(traj.t.back() > start)) {
        throw InvalidArgument("trajectory does not extend past the discarded transient");
    }
    const std::size_t n = traj.size();
    std::size_t s = 0;
    while (s < n && traj.t[s] < start - 1e-9 * drive_period) ++s;

    ExtremaSet out;
    out.window_start = traj.t[s];
    out.window_end = traj.t.back();

    const auto& v = traj.v;
    auto emit = [&](std::size_t k, ExtremumKind kind) {
        out.points.push_back({traj.t[k], v[k], kind});
    };

    int dir = 0;
    std::size_t hi = s;
    std::size_t lo = s;
    double peak_before_lo = v[s];
    double trough_before_hi = v[s];
    for (std::size_t k = s + 1; k < n; ++k) {
        const double x = v[k];
        if (dir == 0) {
            if (x > v[hi]) {
                hi = k;
                trough_before_hi = v[lo];
            }
            if (x < v[lo]) {
                lo = k;
                peak_before_lo = v[hi];
            }
            if (x - v[lo] > hysteresis_eps) {
                if (peak_before_lo - v[lo] > hysteresis_eps) emit(lo, ExtremumKind::Min);
                dir = 1;
                hi = k;
            } else if (v[hi] - x > hysteresis_eps) {
                if (v[hi] - trough_before_hi > hysteresis_eps) emit(hi, ExtremumKind::Max);
                dir = -1;
                lo = k;
            }
        } else if (dir > 0) {
            if (x > v[hi]) {
                hi = k;
            } else if (v[hi] - x > hysteresis_eps) {
                emit(hi, ExtremumKind::Max);
                dir = -1;
                lo = k;
            }
        } else {
            if (x < v[lo]) {
                lo = k;
            } else if (x - v[lo] > hysteresis_eps) {
                emit(lo, ExtremumKind::Min);
                dir = 1;
                hi = k;
            }
        }
    }
    return out;
}

std::vector<int> cluster_labels(std::span<const double> values, double eps) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<int> labels(values.size(), 0);
    int label = -1;
    double leader = 0.0;
    for (std::size_t idx : order) {
        if (label < 0 || values[idx] - leader > eps) {
            ++label;
            leader = values[idx];
        }
        labels[idx] = label;
    }
    return labels;
}

int cluster_count(std::span<const double> values, double eps) {
    if (values.empty()) return 0;
    const auto labels = cluster_labels(values, eps);
    return *std::max_element(labels.begin(), labels.end()) + 1;
}

OrbitClass classify_orbit(const ExtremaSet& extrema, double drive_period, double cluster_eps) {
    if (extrema.points.size() < 6) throw InvalidArgument("classify_orbit needs at least 6 extrema");
    if (!(drive_period > 0.0)) throw InvalidArgument("drive period must be positive");

    std::vector<double> max_t;
    std::vector<double> max_v;
    for (const auto& p : extrema.points) {
        if (p.kind == ExtremumKind::Max) {
            max_t.push_back(p.t);
            max_v.push_back(p.v);
        }
    }
    const auto labels = cluster_labels(max_v, cluster_eps);
    const auto n_periods = static_cast<std::size_t>(
        std::floor((extrema.window_end - extrema.window_start) / drive_period + 1e-9));

    // Per drive period, the sorted multiset of max-cluster labels.
    std::vector<std::vector<int>> signature(n_periods);
    for (std::size_t k = 0; k < max_t.size(); ++k) {
        const auto p = static_cast<std::size_t>(
            std::floor((max_t[k] - extrema.window_start) / drive_period));
        if (p < n_periods) signature[p].push_back(labels[k]);
    }
    for (auto& s : signature) std::sort(s.begin(), s.end());

    OrbitClass out;
    out.cluster_eps = cluster_eps;
    for (int n = 1; n <= kMaxOrbitPeriod; ++n) {
        const auto step = static_cast<std::size_t>(n);
        if (n_periods < 2 * step) break;
        bool repeats = true;
        for (std::size_t p = 0; p + step < n_periods && repeats; ++p) {
            repeats = signature[p] == signature[p + step];
        }
        if (repeats) {
            out.period = n;
            return out;
        }
    }
    return out;
}

Trajectory driven_response(double amplitude, const CircuitParams& params, const MemristorIV& model,
                           const SweepConfig& cfg, double init_perturbation) {
    CircuitState init = initialize_state(1, params, model, cfg.dt);
    init.v += init_perturbation;
    const Waveform drive({Segment::square(amplitude, cfg.period, cfg.periods, cfg.offset)});
    return simulate(drive, params, model, init, cfg.dt);
}

std::vector<AmplitudeResponse> sweep_responses(std::span<const double> amplitudes,
                                               const CircuitParams& params, const MemristorIV& model,
                                               const SweepConfig& cfg, double cluster_eps) {
    if (amplitudes.empty()) throw InvalidArgument("bifurcation sweep needs at least one amplitude");
    if (cfg.periods <= cfg.discard_periods) {
        throw InvalidArgument("sweep must simulate more periods than it discards");
    }
    std::vector<AmplitudeResponse> out(amplitudes.size());
    parallel_for(amplitudes.size(), cfg.threads, [&](std::size_t k) {
        const double u = amplitudes[k];
        AmplitudeResponse& r = out[k];
        r.amplitude = u;
        try {
            const Trajectory traj = driven_response(u, params, model, cfg);
            r.extrema = local_extrema(traj, cfg.discard_periods, cfg.hysteresis_eps, cfg.period);
        } catch (const IntegrationError& e) {
            throw IntegrationError(std::string(e.what()) + " (amplitude " + format_number(u) + " V)",
                                   e.time());
        }
        r.clusters = cluster_count(r.extrema.values(ExtremumKind::Max), cluster_eps) +
                     cluster_count(r.extrema.values(ExtremumKind::Min), cluster_eps);
        if (r.extrema.points.size() >= 6) r.orbit = classify_orbit(r.extrema, cfg.period, cluster_eps);
    });
    return out;
}

std::vector<BifurcationPoint> bifurcation_points(std::span<const AmplitudeResponse> responses) {
    std::vector<BifurcationPoint> out;
    for (const auto& r : responses) {
        for (const auto& p : r.extrema.points) out.push_back({r.amplitude, p.v, p.kind});
    }
    return out;
}

std::vector<BifurcationPoint> bifurcation_sweep(std::span<const double> amplitudes,
                                                const CircuitParams& params,
                                                const MemristorIV& model, const SweepConfig& cfg) {
    return bifurcation_points(sweep_responses(amplitudes, params, model, cfg));
}

std::string orbit_label(const std::optional<OrbitClass>& orbit) {
    if (!orbit) return "undetermined";
    if (orbit->aperiodic()) return "aperiodic";
    return "P" + std::to_string(*orbit->period);
}

std::vector<std::pair<double, int>> clusters_per_amplitude(std::span<const BifurcationPoint> points,
                                                           double cluster_eps) {
    std::vector<std::pair<double, int>> out;
    std::size_t k = 0;
    while (k < points.size()) {
        const double u = points[k].amplitude;
        std::vector<double> maxima;
        std::vector<double> minima;
        for (; k < points.size() && points[k].amplitude == u; ++k) {
            (points[k].kind == ExtremumKind::Max ? maxima : minima).push_back(points[k].v);
        }
        out.emplace_back(u, cluster_count(maxima, cluster_eps) + cluster_count(minima, cluster_eps));
    }
    return out;
}

std::optional<double> divergence_time(const Trajectory& a, const Trajectory& b, double threshold) {
    if (a.size() != b.size()) throw InvalidArgument("trajectories have different grids");
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::abs(a.t[k] - b.t[k]) > 1e-12 * std::max(1.0, std::abs(a.t[k]))) {
            throw InvalidArgument("trajectories have different grids");
        }
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::abs(a.v[k] - b.v[k]) > threshold) return a.t[k];
    }
    return std::nullopt;
}

void write_bifurcation_csv(std::ostream& os, std::span<const BifurcationPoint> points) {
    os << "U,v,kind\n";
    for (const auto& p : points) {
        os << format_number(p.amplitude) << ',' << format_number(p.v) << ',' << to_string(p.kind)
           << '\n';
    }
}

}  // namespace memchaos
