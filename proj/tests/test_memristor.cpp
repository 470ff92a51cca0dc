#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "memchaos/error.hpp"
#include "memchaos/memristor.hpp"

using namespace memchaos;

TEST_CASE("coefficients follow the calibrated cubic") {
    const MemristorIV m = build_model(MemristorState(4.65e5), 0.5);
    CHECK(m.g1 == doctest::Approx(0.5 / 4.65e5).epsilon(1e-14));
    CHECK(m.g3 == doctest::Approx(0.5 / (4.65e5 * 0.01)).epsilon(1e-14));
    CHECK(m.state.r_low_voltage() == 4.65e5);
    CHECK(MemristorState(4.65e5).read_conductance() == doctest::Approx(1.0 / 4.65e5));
}

TEST_CASE("current examples") {
    const MemristorIV m = build_model(MemristorState(4.65e5), 0.5);
    CHECK(memristor_current(m, 0.0) == 0.0);
    CHECK(memristor_current(m, 0.1) == doctest::Approx(0.1 / 465000.0).epsilon(1e-12));
    CHECK(memristor_current(m, 0.1) == doctest::Approx(2.1505e-7).epsilon(1e-4));
    CHECK(memristor_current(m, -0.2) == -memristor_current(m, 0.2));
}

TEST_CASE("oddness is exact on random voltages") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    const MemristorIV m = build_model(MemristorState(7.0e5), 0.75);
    for (int k = 0; k < 1000; ++k) {
        const double x = v(rng);
        CHECK(memristor_current(m, -x) == -memristor_current(m, x));
    }
}

TEST_CASE("secant conductance at the read voltage equals the state label") {
    for (double r = 1.0e5; r <= 1.1e6 + 1.0; r += 5.0e4) {
        for (double rho : {0.0, 0.25, 0.5, 0.75}) {
            const MemristorIV m = build_model(MemristorState(r), rho);
            const double secant = memristor_current(m, kReadVoltage) / kReadVoltage;
            CHECK(std::abs(secant * r - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("slope examples and finite differences") {
    const MemristorIV lin = build_model(MemristorState(4.65e5), 0.0);
    CHECK(memristor_slope(lin, 0.3) == doctest::Approx(2.1505e-6).epsilon(1e-4));
    CHECK(memristor_slope(lin, -0.7) == doctest::Approx(1.0 / 4.65e5).epsilon(1e-14));

    const MemristorIV m = build_model(MemristorState(4.65e5), 0.5);
    CHECK(memristor_slope(m, 0.0) == m.g1);
    CHECK(memristor_slope(m, 0.1) == doctest::Approx(m.g1 + 3.0 * m.g3 * 0.01).epsilon(1e-14));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    const double h = 1e-6;
    for (double x : {0.1, 0.25, -0.4}) {
        const double fd = (memristor_current(m, x + h) - memristor_current(m, x - h)) / (2.0 * h);
        CHECK(std::abs(fd / memristor_slope(m, x) - 1.0) < 1e-6);
    }
    for (int k = 0; k < 200; ++k) {
        const double x = v(rng);
        const double fd = (memristor_current(m, x + h) - memristor_current(m, x - h)) / (2.0 * h);
        CHECK(std::abs(fd / memristor_slope(m, x) - 1.0) < 1e-6);
    }
}

TEST_CASE("current decreases with resistance at fixed positive voltage") {
    for (double rho : {0.0, 0.5, 0.9}) {
        double previous = std::numeric_limits<double>::infinity();
        for (double r = 1.0e5; r <= 1.1e6; r += 1.0e5) {
            const double i = memristor_current(build_model(MemristorState(r), rho), 0.3);
            CHECK(i < previous);
            previous = i;
        }
    }
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(MemristorState(5.0e4), InvalidArgument);
    CHECK_THROWS_AS(MemristorState(2.0e6), InvalidArgument);
    CHECK_THROWS_AS(MemristorState(std::nan("")), InvalidArgument);
    CHECK_THROWS_AS(build_model(MemristorState(4.65e5), 1.0), InvalidArgument);
    CHECK_THROWS_AS(build_model(MemristorState(4.65e5), -0.1), InvalidArgument);
    const MemristorIV m = build_model(MemristorState(4.65e5), 0.5);
    CHECK_THROWS_AS(memristor_current(m, std::numeric_limits<double>::infinity()), InvalidArgument);
    CHECK_THROWS_AS(memristor_slope(m, std::nan("")), InvalidArgument);
}
