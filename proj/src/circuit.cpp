#include "memchaos/circuit.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "memchaos/error.hpp"
#include "memchaos/io.hpp"

namespace memchaos {

namespace {

inline Derivative rates(double v, double i, double u, const CircuitParams& p,
                        const MemristorIV& m) {
    const double im = m.g1 * v + m.g3 * v * v * v;
    return {(i - p.G_N * v - im) / p.C, (u - i * p.R - v) / p.L};
}

inline CircuitState rk4(const CircuitState& s, double u0, double u_mid, double u1, double dt,
                        const CircuitParams& p, const MemristorIV& m) {
    const double h2 = 0.5 * dt;
    const Derivative k1 = rates(s.v, s.i, u0, p, m);
    const Derivative k2 = rates(s.v + h2 * k1.dv_dt, s.i + h2 * k1.di_dt, u_mid, p, m);
    const Derivative k3 = rates(s.v + h2 * k2.dv_dt, s.i + h2 * k2.di_dt, u_mid, p, m);
    const Derivative k4 = rates(s.v + dt * k3.dv_dt, s.i + dt * k3.di_dt, u1, p, m);
    return {s.v + dt / 6.0 * (k1.dv_dt + 2.0 * k2.dv_dt + 2.0 * k3.dv_dt + k4.dv_dt),
            s.i + dt / 6.0 * (k1.di_dt + 2.0 * k2.di_dt + 2.0 * k3.di_dt + k4.di_dt)};
}

inline bool runaway(const CircuitState& s) {
    return !std::isfinite(s.v) || !std::isfinite(s.i) || std::abs(s.v) > kMaxVoltage ||
           std::abs(s.i) > kMaxCurrent;
}

[[noreturn]] void throw_runaway(double t) {
    throw IntegrationError("integration runaway at t = " + format_number(t) + " s", t);
}

}  // namespace

void CircuitParams::validate() const {
    if (!(C > 0.0) || !(R > 0.0) || !(L > 0.0)) {
        throw InvalidArgument("C, R and L must be positive");
    }
    if (!(G_N < 0.0) || !std::isfinite(G_N)) {
        throw InvalidArgument("G_N must be a finite negative conductance");
    }
}

void Trajectory::validate() const {
    const std::size_t n = t.size();
    if (n < 2 || u.size() != n || v.size() != n || i.size() != n) {
        throw InvalidArgument("trajectory arrays must have equal length >= 2");
    }
    const double step = t[1] - t[0];
    if (!(step > 0.0)) throw InvalidArgument("trajectory time must increase");
    for (std::size_t k = 1; k < n; ++k) {
        if (std::abs((t[k] - t[k - 1]) - step) > 1e-9 * step) {
            throw InvalidArgument("trajectory time grid is not uniform");
        }
    }
}

CircuitParams size_circuit(double g_max, double k, double C) {
    if (!(g_max > 0.0) || !(k > 0.0) || !(C > 0.0)) {
        throw InvalidArgument("size_circuit needs positive g_max, k and C");
    }
    CircuitParams p;
    p.C = C;
    p.R = 1.0 / (k * g_max);
    const double r_n = p.R * k / (1.0 + k);
    p.G_N = -1.0 / r_n;
    p.L = C * p.R * p.R;
    return p;
}

CircuitParams default_circuit() { return size_circuit(1.4771e-5, 5.0, 10e-9); }

bool is_bistable(const CircuitParams& params, const MemristorIV& model) {
    return params.G_N + model.g1 + 1.0 / params.R < 0.0;
}

std::vector<double> equilibria(const CircuitParams& params, const MemristorIV& model) {
    params.validate();
    if (!is_bistable(params, model)) return {0.0};
    if (model.g3 <= 0.0) {
        throw InvalidArgument("linear memristor with a net negative conductance has no bounded equilibria");
    }
    const double v_star = std::sqrt(-(params.G_N + model.g1 + 1.0 / params.R) / model.g3);
    return {-v_star, 0.0, v_star};
}

Derivative derivatives(const CircuitState& state, double u, const CircuitParams& params,
                       const MemristorIV& model) {
    if (!std::isfinite(state.v) || !std::isfinite(state.i) || !std::isfinite(u)) {
        throw InvalidArgument("derivatives need finite state and drive");
    }
    return rates(state.v, state.i, u, params, model);
}

CircuitState step_rk4(const CircuitState& state, double u, double dt, const CircuitParams& params,
                      const MemristorIV& model) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    return rk4(state, u, u, u, dt, params, model);
}

CircuitState step_rk4(const CircuitState& state, double t, double dt, const Waveform& drive,
                      const CircuitParams& params, const MemristorIV& model) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    const CircuitState next = rk4(state, drive.value(t), drive.value(t + 0.5 * dt),
                                  drive.value_before(t + dt), dt, params, model);
    if (runaway(next)) throw_runaway(t + dt);
    return next;
}

Trajectory simulate(const Waveform& drive, const CircuitParams& params, const MemristorIV& model,
                    const CircuitState& init, double dt) {
    params.validate();
    if (drive.empty()) throw InvalidArgument("cannot simulate an empty drive");
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");

    const std::vector<Piece> pieces = drive.pieces();
    std::vector<long long> steps(pieces.size());
    long long total = 0;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const double ratio = pieces[k].duration / dt;
        const long long n = std::llround(ratio);
        if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-6) {
            throw InvalidArgument("dt = " + format_number(dt) +
                                  " s does not divide the drive piece of duration " +
                                  format_number(pieces[k].duration) + " s");
        }
        steps[k] = n;
        total += n;
    }

    Trajectory traj;
    const auto n_points = static_cast<std::size_t>(total + 1);
    traj.t.resize(n_points);
    traj.u.resize(n_points);
    traj.v.resize(n_points);
    traj.i.resize(n_points);

    CircuitState s = init;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const double u = pieces[k].value;
        for (long long j = 0; j < steps[k]; ++j, ++idx) {
            traj.t[idx] = static_cast<double>(idx) * dt;
            traj.u[idx] = u;
            traj.v[idx] = s.v;
            traj.i[idx] = s.i;
            s = rk4(s, u, u, u, dt, params, model);
            if (runaway(s)) throw_runaway(static_cast<double>(idx + 1) * dt);
        }
    }
    traj.t[idx] = static_cast<double>(idx) * dt;
    traj.u[idx] = pieces.back().value;
    traj.v[idx] = s.v;
    traj.i[idx] = s.i;
    return traj;
}

CircuitState initialize_state(int polarity, const CircuitParams& params, const MemristorIV& model,
                              double dt) {
    if (polarity != 1 && polarity != -1) throw InvalidArgument("polarity must be +1 or -1");
    if (!is_bistable(params, model)) {
        throw InitializationError("circuit has a single equilibrium; the initialization pulse cannot select a polarity");
    }
    const Trajectory traj = simulate(build_drive(polarity, Waveform{}), params, model, {}, dt);
    const CircuitState s = traj.back();
    if (s.v * polarity <= 0.0) {
        throw InitializationError("initialization pulse left v with the wrong sign");
    }
    return s;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    os << "t,u,v,i\n";
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        os << format_number(trajectory.t[k]) << ',' << format_number(trajectory.u[k]) << ','
           << format_number(trajectory.v[k]) << ',' << format_number(trajectory.i[k]) << '\n';
    }
}

}  // namespace memchaos
