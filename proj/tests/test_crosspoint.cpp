#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "memchaos/crosspoint.hpp"
#include "memchaos/error.hpp"

using namespace memchaos;

namespace {

DeviceProgramModel noiseless() {
    DeviceProgramModel dev;
    dev.sigma_prog = 0.0;
    dev.sigma_read = 0.0;
    return dev;
}

// Steps the deterministic loop one compliance value at a time.
int brute_force_increments(double target, const DeviceProgramModel& dev, const PVConfig& pv) {
    for (int k = 0;; ++k) {
        const double g = dev.alpha * (pv.i_cc0 + k * pv.delta_icc);
        if (g >= pv.g_th_fraction * target) return k;
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

LinearReadout readout(std::vector<double> w, double b) {
    LinearReadout r = LinearReadout::zeros(static_cast<Eigen::Index>(w.size()));
    for (std::size_t k = 0; k < w.size(); ++k) r.weights[static_cast<Eigen::Index>(k)] = w[k];
    r.bias = b;
    return r;
}

}  // namespace

TEST_CASE("map_weights examples") {
    const DeviceProgramModel dev;
    const ColumnMapping m = map_weights(readout({1.0, 2.0}, -0.3), dev);
    REQUIRE(m.target_g.size() == 2);
    CHECK(m.target_g[0] == doctest::Approx(50e-6).epsilon(1e-12));
    CHECK(m.target_g[1] == doctest::Approx(100e-6).epsilon(1e-12));
    CHECK(m.i_th == doctest::Approx(15e-6).epsilon(1e-12));
    CHECK(m.weight_scale == doctest::Approx(50e-6));

    const ColumnMapping one = map_weights(readout({1.0}, 0.0), dev);
    CHECK(one.target_g == std::vector<double>{dev.g_max});
    CHECK(one.i_th == 0.0);

    CHECK_THROWS_AS(map_weights(readout({1.0, -0.5}, 0.0), dev), UnsupportedMapping);
    CHECK_THROWS_AS(map_weights(readout({1.0, 1e-3}, 0.0), dev), UnsupportedMapping);
    LinearReadout pruned = readout({0.0, 0.0}, 0.1);
    pruned.active_mask = {false, false};
    CHECK_THROWS_AS(map_weights(pruned, dev), UnsupportedMapping);

    // Masked-out features are ignored, even when their slot would be negative.
    LinearReadout masked = readout({2.0, 0.0, 1.0}, 0.0);
    masked.active_mask = {true, false, true};
    const ColumnMapping mm = map_weights(masked, dev);
    CHECK(mm.features == std::vector<std::size_t>{0, 2});
}

TEST_CASE("zero-noise iteration count follows the closed form") {
    const DeviceProgramModel dev = noiseless();
    const PVConfig pv;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(dev.g_min, dev.g_max);
    int checked = 0;
    while (checked < 500) {
        const double target = u(rng);
        const double q = (pv.g_th_fraction * target / dev.alpha - pv.i_cc0) / pv.delta_icc;
        if (q > 0.0 && std::abs(q - std::round(q)) < 1e-6) continue;
        const int closed = std::max(0, static_cast<int>(std::ceil(q)));
        const int brute = brute_force_increments(target, dev, pv);
        CHECK(closed == brute);
        const PVResult r = program_and_verify(target, dev, pv, 1);
        CHECK(r.iterations == brute);
        CHECK(r.trace.size() == static_cast<std::size_t>(brute + 1));
        for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].read_g >= r.trace[k - 1].read_g);
        CHECK(r.achieved_g >= pv.g_th_fraction * target);
        ++checked;
    }
    const PVResult first = program_and_verify(dev.alpha * pv.i_cc0, dev, pv, 1);
    CHECK(first.iterations == 0);
}

TEST_CASE("program-and-verify errors") {
    DeviceProgramModel dev = noiseless();
    PVConfig pv;
    pv.max_iters = 3;
    CHECK_THROWS_AS(program_and_verify(dev.g_max, dev, pv, 1), ProgrammingFailure);
    CHECK_THROWS_AS(program_and_verify(2 * dev.g_max, dev, pv, 1), InvalidArgument);
    CHECK_THROWS_AS(program_and_verify(0.0, dev, pv, 1), InvalidArgument);
    pv.g_th_fraction = 1.5;
    CHECK_THROWS_AS(program_and_verify(dev.g_max, dev, pv, 1), InvalidArgument);
    dev.g_min = dev.g_max;
    CHECK_THROWS_AS(dev.validate(), InvalidArgument);
}

TEST_CASE("noisy programming lands above the verify threshold") {
    const DeviceProgramModel dev;
    const PVConfig pv;
    for (double target : {dev.g_max, dev.g_max / 2, dev.g_max / 10}) {
        int above = 0;
        const int trials = 10000;
        for (int s = 0; s < trials; ++s) {
            const PVResult r = program_and_verify(target, dev, pv, static_cast<std::uint64_t>(s));
            above += r.achieved_g >= pv.g_th_fraction * target * (1.0 - 3.0 * dev.sigma_read);
        }
        CHECK(above >= 0.99 * trials);
    }
}

TEST_CASE("small targets carry larger relative error") {
    const DeviceProgramModel dev;
    const PVConfig pv;
    std::vector<double> low, high;
    for (int s = 0; s < 10000; ++s) {
        low.push_back(program_and_verify(dev.g_max / 10, dev, pv, static_cast<std::uint64_t>(s)).relative_error);
        high.push_back(program_and_verify(dev.g_max, dev, pv, static_cast<std::uint64_t>(s)).relative_error);
    }
    CHECK(median(low) >= median(high));
}

TEST_CASE("mac inference") {
    const DeviceProgramModel dev;
    const LinearReadout r = readout({0.7, 1.3, 0.2}, -0.4);
    const CrosspointColumn col = ideal_column(map_weights(r, dev));
    const std::vector<double> zero(3, 0.0);
    const MacResult z = mac_infer(col, zero);
    CHECK(z.i_out == 0.0);
    CHECK(z.label == (0.0 >= col.i_th ? 1 : 0));
    CHECK_THROWS_AS(mac_infer(col, std::vector<double>(2, 0.0)), InvalidArgument);

    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 0.5);
    Eigen::MatrixXd X(2000, 3);
    std::vector<std::uint8_t> labels(2000);
    for (int k = 0; k < 2000; ++k) {
        for (int c = 0; c < 3; ++c) X(k, c) = g(rng);
        const Eigen::VectorXd x = X.row(k).transpose();
        CHECK(mac_infer_row(col, x).label == r.predict(x));
        labels[static_cast<std::size_t>(k)] = r.predict(x);
    }
    CHECK(column_accuracy(col, X, labels) == 1.0);
    CHECK(evaluate(r, X, labels) == 1.0);
}

TEST_CASE("programmed column is deterministic and serializes") {
    const DeviceProgramModel dev;
    const PVConfig pv;
    const ColumnMapping m = map_weights(readout({0.5, 1.0, 0.25, 0.8}, -0.1), dev);
    std::vector<PVResult> a, b;
    const CrosspointColumn c1 = program_column(m, dev, pv, 42, &a);
    const CrosspointColumn c2 = program_column(m, dev, pv, 42, &b);
    CHECK(c1.conductances == c2.conductances);
    REQUIRE(a.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(c1.conductances[k] == a[k].achieved_g);

    std::ostringstream csv;
    write_programming_trace_csv(csv, a);
    std::size_t rows = 0;
    for (const auto& r : a) rows += r.trace.size();
    const std::string text = csv.str();
    CHECK(text.rfind("device,iteration,i_cc,read_g\n", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == rows + 1);

    const auto j = column_to_json(c1);
    CHECK(j.at("features").size() == 4);
    CHECK(j.at("i_th").get<double>() == c1.i_th);
}
