#include "memchaos/memristor.hpp"

#include <cmath>
#include <string>

#include "memchaos/error.hpp"

namespace memchaos {

MemristorState::MemristorState(double r_low_voltage) : r_(r_low_voltage) {
    if (!std::isfinite(r_) || r_ < kStateWindowMin || r_ > kStateWindowMax) {
        throw InvalidArgument("memristor state " + std::to_string(r_) +
                              " ohm outside the operating window [1e5, 1.1e6]");
    }
}

MemristorIV build_model(const MemristorState& state, double rho) {
    if (!std::isfinite(rho) || rho < 0.0 || rho >= 1.0) {
        throw InvalidArgument("rho must lie in [0, 1)");
    }
    const double r = state.r_low_voltage();
    MemristorIV model;
    model.g1 = (1.0 - rho) / r;
    model.g3 = rho / (r * kReadVoltage * kReadVoltage);
    model.state = state;
    return model;
}

double memristor_current(const MemristorIV& model, double v) {
    if (!std::isfinite(v)) throw InvalidArgument("memristor voltage is not finite");
    return model.g1 * v + model.g3 * v * v * v;
}

double memristor_slope(const MemristorIV& model, double v) {
    if (!std::isfinite(v)) throw InvalidArgument("memristor voltage is not finite");
    return model.g1 + 3.0 * model.g3 * v * v;
}

}  // namespace memchaos
