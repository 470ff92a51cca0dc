#pragma once

#include <iosfwd>
#include <vector>

#include "memchaos/memristor.hpp"
#include "memchaos/signal.hpp"

namespace memchaos {

/// Default integration step. Divides the 0.5 ms pulse, the 2 ms settling gap
/// and the 0.567 ms half-period of the default drive.
inline constexpr double kDefaultDt = 0.5e-6;

/// Runaway guards on the state variables.
inline constexpr double kMaxVoltage = 10.0;
inline constexpr double kMaxCurrent = 1.0e-3;

/// Component values of the driven circuit. G_N is the signed (negative)
/// conductance of the active element.
struct CircuitParams {
    double C = 0.0;    // F
    double R = 0.0;    // ohm
    double L = 0.0;    // H
    double G_N = 0.0;  // S, < 0

    /// Throws InvalidArgument unless C, R, L > 0 and G_N < 0.
    void validate() const;
    double negative_resistance() const { return -1.0 / G_N; }
};

struct CircuitState {
    double v = 0.0;  // V across the memristor
    double i = 0.0;  // A through the inductor
};

struct Derivative {
    double dv_dt = 0.0;
    double di_dt = 0.0;
};

/// Uniform-grid time series produced by `simulate`.
struct Trajectory {
    std::vector<double> t;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> i;

    std::size_t size() const noexcept { return t.size(); }
    double dt() const { return t.at(1) - t.at(0); }
    CircuitState back() const { return {v.back(), i.back()}; }
    /// Checks equal lengths >= 2 and a constant step.
    void validate() const;
};

/// Component sizing from the peak memristor conductance `g_max`, the voltage
/// margin factor `k` and the chosen capacitance:
/// R = 1/(k g_max), R_N = R k/(1+k), L = C R^2.
CircuitParams size_circuit(double g_max, double k, double C);

/// Component values used throughout: g_max = 14.771 uS, k = 5, C = 10 nF.
CircuitParams default_circuit();

/// True when G_N + g1 + 1/R < 0, i.e. the undriven circuit has two
/// nonzero equilibria around a saddle at the origin.
bool is_bistable(const CircuitParams& params, const MemristorIV& model);

/// Equilibrium voltages of the undriven circuit, ascending: {0} or {-v*, 0, +v*}.
std::vector<double> equilibria(const CircuitParams& params, const MemristorIV& model);

Derivative derivatives(const CircuitState& state, double u, const CircuitParams& params,
                       const MemristorIV& model);

/// Classical RK4 step under a constant drive level.
CircuitState step_rk4(const CircuitState& state, double u, double dt, const CircuitParams& params,
                      const MemristorIV& model);

/// Classical RK4 step sampling the drive at t, t + dt/2 and (left limit) t + dt.
/// Throws IntegrationError if the result leaves the runaway bounds.
CircuitState step_rk4(const CircuitState& state, double t, double dt, const Waveform& drive,
                      const CircuitParams& params, const MemristorIV& model);

/// Integrates over the whole drive. `dt` must divide every constant piece of
/// the drive, so no step straddles a jump.
Trajectory simulate(const Waveform& drive, const CircuitParams& params, const MemristorIV& model,
                    const CircuitState& init, double dt = kDefaultDt);

/// Final state after the initialization pulse of the given polarity and the
/// settling gap, starting from rest.
CircuitState initialize_state(int polarity, const CircuitParams& params, const MemristorIV& model,
                              double dt = kDefaultDt);

/// Writes `t,u,v,i` in SI units, one row per grid point.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

}  // namespace memchaos
