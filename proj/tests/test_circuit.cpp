#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "memchaos/circuit.hpp"
#include "memchaos/error.hpp"

using namespace memchaos;

namespace {

const MemristorIV kModel = build_model(MemristorState(4.65e5), 0.5);

struct Vec2 {
    long double v, i;
};

// Exact solution of the linear circuit (rho = 0) under a constant drive:
// x(T) = e^{AT} x0 + A^{-1} (e^{AT} - I) f, with the 2x2 exponential in closed form.
Vec2 linear_exact(const CircuitParams& p, long double g1, Vec2 x0, long double u, long double T) {
    const long double a = -(static_cast<long double>(p.G_N) + g1) / p.C;
    const long double b = 1.0L / p.C;
    const long double c = -1.0L / p.L;
    const long double d = -static_cast<long double>(p.R) / p.L;
    const long double s = 0.5L * (a + d);
    const long double det = a * d - b * c;
    const long double disc = s * s - det;
    // e^{AT} = e^{sT} (co I + si (A - sI)); trigonometric or hyperbolic by the discriminant.
    const long double w = std::sqrt(std::abs(disc));
    const long double e = std::exp(s * T);
    const long double co = disc < 0.0L ? std::cos(w * T) : std::cosh(w * T);
    const long double si = (disc < 0.0L ? std::sin(w * T) : std::sinh(w * T)) / w;
    // E = e^{AT}
    const long double e11 = e * (co + si * (a - s));
    const long double e12 = e * (si * b);
    const long double e21 = e * (si * c);
    const long double e22 = e * (co + si * (d - s));
    const long double fv = 0.0L;
    const long double fi = u / p.L;
    // (E - I) f
    const long double m1 = (e11 - 1.0L) * fv + e12 * fi;
    const long double m2 = e21 * fv + (e22 - 1.0L) * fi;
    // A^{-1} m
    const long double p1 = (d * m1 - b * m2) / det;
    const long double p2 = (-c * m1 + a * m2) / det;
    return {e11 * x0.v + e12 * x0.i + p1, e21 * x0.v + e22 * x0.i + p2};
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxy / sxx;
}

}  // namespace

TEST_CASE("sizing rule") {
    const CircuitParams p = size_circuit(1.4771e-5, 5.0, 10e-9);
    CHECK(p.R == doctest::Approx(13.54e3).epsilon(1e-3));
    CHECK(p.negative_resistance() == doctest::Approx(11.28e3).epsilon(1e-3));
    CHECK(p.L == doctest::Approx(1.833).epsilon(1e-3));
    CHECK(p.G_N < 0.0);

    const CircuitParams unit = size_circuit(1.0, 1.0, 1.0);
    CHECK(unit.R == doctest::Approx(1.0));
    CHECK(unit.negative_resistance() == doctest::Approx(0.5));
    CHECK(unit.L == doctest::Approx(1.0));

    const CircuitParams q = size_circuit(2e-5, 5.0, 10e-9);
    CHECK(q.R == doctest::Approx(1e4));
    CHECK(q.L == doctest::Approx(1.0));

    CHECK_THROWS_AS(size_circuit(0.0, 5.0, 1e-8), InvalidArgument);
    CHECK_THROWS_AS(size_circuit(1e-5, -1.0, 1e-8), InvalidArgument);
    CHECK_THROWS_AS(size_circuit(1e-5, 5.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS((CircuitParams{1e-8, 1e4, 1.0, 1e-5}.validate()), InvalidArgument);
}

TEST_CASE("equilibria") {
    const CircuitParams p = default_circuit();
    const auto eq = equilibria(p, kModel);
    REQUIRE(eq.size() == 3);
    const double R = 1.0 / (5.0 * 1.4771e-5);
    const double G_N = -(1.0 + 5.0) / (R * 5.0);
    const double v_star = std::sqrt(-(G_N + 0.5 / 4.65e5 + 1.0 / R) / (0.5 / (4.65e5 * 0.01)));
    CHECK(eq[2] == doctest::Approx(v_star).epsilon(1e-12));
    CHECK(eq[0] == -eq[2]);
    CHECK(eq[1] == 0.0);
    CHECK(eq[2] == doctest::Approx(0.357).epsilon(5e-3));

    CircuitParams weak = p;
    weak.G_N = -10e-6;
    CHECK(equilibria(weak, kModel) == std::vector<double>{0.0});
    CHECK_FALSE(is_bistable(weak, kModel));

    CircuitParams mild = p;
    mild.G_N = -1e-6;
    CHECK(equilibria(mild, build_model(MemristorState(4.65e5), 0.0)) == std::vector<double>{0.0});
    CHECK_THROWS_AS(equilibria(p, build_model(MemristorState(4.65e5), 0.0)), InvalidArgument);
}

TEST_CASE("derivatives") {
    const CircuitParams p = default_circuit();
    const Derivative zero = derivatives({0.0, 0.0}, 0.0, p, kModel);
    CHECK(zero.dv_dt == 0.0);
    CHECK(zero.di_dt == 0.0);

    const double v_star = equilibria(p, kModel)[2];
    const Derivative at_eq = derivatives({v_star, -v_star / p.R}, 0.0, p, kModel);
    CHECK(std::abs(at_eq.dv_dt) < 1e-9);
    CHECK(std::abs(at_eq.di_dt) < 1e-12);

    const Derivative d = derivatives({0.1, 0.0}, 0.0, p, kModel);
    CHECK(d.dv_dt == doctest::Approx((-p.G_N * 0.1 - 0.1 / 465000.0) / 10e-9).epsilon(1e-12));
    CHECK(d.dv_dt == doctest::Approx(865.0).epsilon(1e-3));
    CHECK(d.di_dt == doctest::Approx(-0.05456).epsilon(1e-3));

    CHECK_THROWS_AS(derivatives({std::nan(""), 0.0}, 0.0, p, kModel), InvalidArgument);
}

TEST_CASE("rk4 step at an equilibrium stays put") {
    const CircuitParams p = default_circuit();
    const double v_star = equilibria(p, kModel)[2];
    CircuitState s{v_star, -v_star / p.R};
    for (int k = 0; k < 100; ++k) s = step_rk4(s, 0.0, kDefaultDt, p, kModel);
    CHECK(std::abs(s.v - v_star) < 1e-12);
    CHECK(std::abs(s.i + v_star / p.R) < 1e-12);
    CHECK_THROWS_AS(step_rk4(s, 0.0, 0.0, p, kModel), InvalidArgument);
}

TEST_CASE("rk4 is fourth order against the exact linear solution") {
    const CircuitParams p = default_circuit();
    const MemristorIV lin = build_model(MemristorState(4.65e5), 0.0);
    const double T = kDefaultPeriod;
    const double u = 0.1;
    const Vec2 exact = linear_exact(p, lin.g1, {0.1L, 0.0L}, u, T);
    std::vector<double> log_dt, log_err;
    double previous = 0.0;
    for (int n : {512, 1024, 2048, 4096, 8192}) {
        const double dt = T / n;
        CircuitState s{0.1, 0.0};
        for (int k = 0; k < n; ++k) s = step_rk4(s, u, dt, p, lin);
        const double err = std::abs(s.v - static_cast<double>(exact.v));
        log_dt.push_back(std::log(dt));
        log_err.push_back(std::log(err));
        if (n == 1024) CHECK(previous / err == doctest::Approx(16.0).epsilon(0.05));
        previous = err;
    }
    const double slope = fitted_slope(log_dt, log_err);
    MESSAGE("fitted slope " << slope);
    CHECK(std::abs(slope - 4.0) <= 0.3);
}

TEST_CASE("simulate: grid, zero drive and alignment") {
    const CircuitParams p = default_circuit();
    const double v_star = equilibria(p, kModel)[2];
    const Waveform rest({Segment::pulse(0.0, 20e-3)});
    const Trajectory t = simulate(rest, p, kModel, {v_star, -v_star / p.R});
    CHECK(t.size() == 40001);
    t.validate();
    CHECK(t.dt() == doctest::Approx(kDefaultDt).epsilon(1e-12));
    for (double v : t.v) CHECK(std::abs(v - v_star) < 1e-6);

    const Waveform odd({Segment::pulse(0.0, 1.1e-6)});
    CHECK_THROWS_AS(simulate(odd, p, kModel, {0.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(simulate(Waveform{}, p, kModel, {0.0, 0.0}), InvalidArgument);
}

TEST_CASE("runaway raises an integration error with its time") {
    const CircuitParams p = default_circuit();
    const Waveform big({Segment::pulse(100.0, 10e-3)});
    try {
        simulate(big, p, build_model(MemristorState(4.65e5), 0.0), {0.0, 0.0});
        FAIL("expected runaway");
    } catch (const IntegrationError& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.time() <= 10e-3);
    }
}

TEST_CASE("odd symmetry over a 20-period chaotic run") {
    const CircuitParams p = default_circuit();
    for (double U : {0.05, 0.25}) {
        const Waveform up = build_drive(1, Waveform({Segment::square(U, kDefaultPeriod, 20)}));
        const Waveform down = build_drive(-1, Waveform({Segment::square(-U, kDefaultPeriod, 20)}));
        const Trajectory a = simulate(up, p, kModel, {0.0, 0.0});
        const Trajectory b = simulate(down, p, kModel, {0.0, 0.0});
        REQUIRE(a.size() == b.size());
        double worst = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            worst = std::max(worst, std::abs(a.v[k] + b.v[k]));
            CHECK(a.u[k] == -b.u[k]);
        }
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("passive energy does not grow without the negative conductance") {
    CircuitParams p = default_circuit();
    p.G_N = -1e-15;  // effectively removed
    const MemristorIV lin = build_model(MemristorState(4.65e5), 0.0);
    const Trajectory t = simulate(Waveform({Segment::pulse(0.0, 10e-3)}), p, lin, {0.3, 1e-5});
    double previous = 1e300;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double e = 0.5 * p.C * t.v[k] * t.v[k] + 0.5 * p.L * t.i[k] * t.i[k];
        CHECK(e <= previous * (1.0 + 1e-12));
        previous = e;
    }
}

TEST_CASE("outer equilibria attract, the origin repels") {
    const CircuitParams p = default_circuit();
    const double v_star = equilibria(p, kModel)[2];
    const Waveform rest({Segment::pulse(0.0, 60e-3)});
    for (double sign : {1.0, -1.0}) {
        const Trajectory t = simulate(rest, p, kModel, {sign * (v_star + 0.02), -sign * v_star / p.R});
        CHECK(std::abs(t.v.back() - sign * v_star) < 1e-4);
    }
    const Trajectory origin = simulate(rest, p, kModel, {1e-3, 0.0});
    double far = 0.0;
    for (double v : origin.v) far = std::max(far, std::abs(v));
    CHECK(far > 0.1);
}

TEST_CASE("initialization reaches the requested sign symmetrically") {
    const CircuitParams p = default_circuit();
    const CircuitState up = initialize_state(1, p, kModel);
    const CircuitState down = initialize_state(-1, p, kModel);
    CHECK(up.v > 0.0);
    CHECK(down.v < 0.0);
    CHECK(std::abs(up.v + down.v) < 1e-9);
    CHECK(std::abs(up.i + down.i) < 1e-12);

    CircuitParams weak = p;
    weak.G_N = -10e-6;
    CHECK_THROWS_AS(initialize_state(1, weak, kModel), InitializationError);
    CHECK_THROWS_AS(initialize_state(0, p, kModel), InvalidArgument);
}

TEST_CASE("trajectory csv") {
    const CircuitParams p = default_circuit();
    const Trajectory t = simulate(Waveform({Segment::pulse(0.1, 2e-6)}), p, kModel, {0.0, 0.0});
    std::ostringstream os;
    write_trajectory_csv(os, t);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,u,v,i");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 5);
}
