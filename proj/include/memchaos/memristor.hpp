#pragma once

namespace memchaos {

/// Read voltage at which a memristor state is labelled (secant resistance).
inline constexpr double kReadVoltage = 0.1;

/// Operating window of the low-voltage resistance, in ohms.
inline constexpr double kStateWindowMin = 1.0e5;
inline constexpr double kStateWindowMax = 1.1e6;

/// Nonvolatile memristor state, labelled by its secant resistance at +100 mV.
class MemristorState {
public:
    /// Throws InvalidArgument outside [kStateWindowMin, kStateWindowMax].
    explicit MemristorState(double r_low_voltage);

    double r_low_voltage() const noexcept { return r_; }
    double read_conductance() const noexcept { return 1.0 / r_; }

private:
    double r_;
};

/// Odd cubic current-voltage law i(v) = g1 v + g3 v^3.
struct MemristorIV {
    double g1 = 0.0;  // S
    double g3 = 0.0;  // A/V^3
    MemristorState state{4.65e5};
};

/// Splits the 100 mV read conductance between the linear and cubic terms;
/// `rho` is the cubic share, in [0, 1).
MemristorIV build_model(const MemristorState& state, double rho);

double memristor_current(const MemristorIV& model, double v);

/// di/dv of the model.
double memristor_slope(const MemristorIV& model, double v);

}  // namespace memchaos
