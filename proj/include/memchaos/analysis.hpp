#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memchaos/circuit.hpp"

namespace memchaos {

enum class ExtremumKind { Max, Min };

const char* to_string(ExtremumKind kind);

struct Extremum {
    double t;
    double v;
    ExtremumKind kind;
};

/// Turning points of v after the transient, alternating in kind.
struct ExtremaSet {
    std::vector<Extremum> points;
    double window_start = 0.0;
    double window_end = 0.0;

    std::vector<double> values(ExtremumKind kind) const;
};

/// Steady-state orbit label. `period` is the repetition length in drive
/// periods, or nullopt for an aperiodic (chaotic) orbit.
struct OrbitClass {
    std::optional<int> period;
    double cluster_eps = 0.0;

    bool aperiodic() const noexcept { return !period.has_value(); }
};

struct BifurcationPoint {
    double amplitude;
    double v;
    ExtremumKind kind;
};

struct SweepConfig {
    int periods = 40;
    int discard_periods = 15;
    double period = kDefaultPeriod;
    double offset = 0.0;
    double dt = kDefaultDt;
    double hysteresis_eps = 2e-3;
    int threads = 1;
};

/// Default turning-point hysteresis and clustering tolerance, volts.
inline constexpr double kDefaultHysteresis = 2e-3;
inline constexpr double kDefaultClusterEps = 2e-3;
/// Longest repetition length searched by classify_orbit.
inline constexpr int kMaxOrbitPeriod = 8;

/// Extrema of v where the signal reverses by more than `hysteresis_eps`,
/// ignoring the first `discard_periods` drive periods of the trajectory.
ExtremaSet local_extrema(const Trajectory& traj, int discard_periods, double hysteresis_eps,
                         double drive_period = kDefaultPeriod);

/// Leader clustering of sorted values: a cluster spans at most `eps`.
/// Returns one label per input value (labels ordered by value).
std::vector<int> cluster_labels(std::span<const double> values, double eps);
int cluster_count(std::span<const double> values, double eps);

OrbitClass classify_orbit(const ExtremaSet& extrema, double drive_period,
                          double cluster_eps = kDefaultClusterEps);

/// For each amplitude: initialize to the positive equilibrium, drive with a
/// square wave for `cfg.periods` periods, keep extrema after the discard.
std::vector<BifurcationPoint> bifurcation_sweep(std::span<const double> amplitudes,
                                                const CircuitParams& params,
                                                const MemristorIV& model,
                                                const SweepConfig& cfg = {});

/// Extrema, orbit label and cluster count (max plus min clusters) for one
/// amplitude. `orbit` is empty when too few extrema survive the transient.
struct AmplitudeResponse {
    double amplitude = 0.0;
    ExtremaSet extrema;
    std::optional<OrbitClass> orbit;
    int clusters = 0;
};

std::vector<AmplitudeResponse> sweep_responses(std::span<const double> amplitudes,
                                               const CircuitParams& params, const MemristorIV& model,
                                               const SweepConfig& cfg = {},
                                               double cluster_eps = kDefaultClusterEps);

/// Flattens sweep responses into (U, v, kind) points, in amplitude order.
std::vector<BifurcationPoint> bifurcation_points(std::span<const AmplitudeResponse> responses);

/// "P<n>", "aperiodic", or "undetermined".
std::string orbit_label(const std::optional<OrbitClass>& orbit);

/// Steady-state trajectory for one drive amplitude (initialized +1); the
/// building block of the sweep.
Trajectory driven_response(double amplitude, const CircuitParams& params, const MemristorIV& model,
                           const SweepConfig& cfg, double init_perturbation = 0.0);

/// Number of max clusters plus number of min clusters per amplitude, in
/// the order amplitudes first appear in `points`.
std::vector<std::pair<double, int>> clusters_per_amplitude(std::span<const BifurcationPoint> points,
                                                           double cluster_eps = kDefaultClusterEps);

/// First grid time where |v_a - v_b| exceeds `threshold`.
std::optional<double> divergence_time(const Trajectory& a, const Trajectory& b, double threshold);

void write_bifurcation_csv(std::ostream& os, std::span<const BifurcationPoint> points);

}  // namespace memchaos
