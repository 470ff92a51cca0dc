#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "memchaos/error.hpp"
#include "memchaos/signal.hpp"

using namespace memchaos;

namespace {
const std::vector<double> kTable{0.161, 0.188, 0.299, 0.346};
}

TEST_CASE("amplitude tables") {
    const AmplitudeTable t = amplitude_table(2, 0.0, 1.0, kTable);
    CHECK(t.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(t[k] == kTable[k]);

    const AmplitudeTable one = amplitude_table(1, 0.1, 0.3);
    CHECK(one[0] == doctest::Approx(0.1));
    CHECK(one[1] == doctest::Approx(0.3));

    const AmplitudeTable three = amplitude_table(3, 0.161, 0.346);
    CHECK(three[4] == doctest::Approx(0.161 + 4.0 / 7.0 * 0.185).epsilon(1e-12));
    CHECK(three[4] == doctest::Approx(0.2667).epsilon(1e-3));
    // Affine in the index: three collinear points.
    CHECK((three[5] - three[2]) / 3.0 == doctest::Approx(three[7] - three[6]).epsilon(1e-12));
    CHECK((three[2] - three[0]) == doctest::Approx(2.0 * (three[1] - three[0])).epsilon(1e-12));

    CHECK_THROWS_AS(amplitude_table(2, 0.0, 1.0, std::vector<double>{0.1, 0.2, 0.3}), InvalidArgument);
    CHECK_THROWS_AS(amplitude_table(2, 0.0, 1.0, std::vector<double>{0.1, 0.3, 0.2, 0.4}), InvalidArgument);
    CHECK_THROWS_AS(amplitude_table(2, 0.3, 0.3), InvalidArgument);
    CHECK_THROWS_AS(amplitude_table(0, 0.1, 0.3), InvalidArgument);
    CHECK_THROWS_AS(amplitude_table(9, 0.1, 0.3), InvalidArgument);
}

TEST_CASE("words map big-endian") {
    const AmplitudeTable t(2, kTable);
    const BitVector w00{0, 0}, w01{0, 1}, w10{1, 0}, w11{1, 1};
    CHECK(encode_word(w00, t) == 0.161);
    CHECK(encode_word(w11, t) == 0.346);
    CHECK(encode_word(w01, t) == 0.188);
    CHECK(encode_word(w10, t) == 0.299);
    CHECK(word_index(w10) == 2);
    CHECK(word_bits(6, 3) == BitVector{1, 1, 0});
    for (std::size_t k = 0; k < 16; ++k) CHECK(word_index(word_bits(k, 4)) == k);

    const AmplitudeTable one(1, {0.2, 0.4});
    CHECK(encode_word(BitVector{0}, one) == 0.2);
    CHECK_THROWS_AS(encode_word(BitVector{0, 1, 1}, t), InvalidArgument);
    CHECK_THROWS_AS(word_index(BitVector{2}), InvalidArgument);
}

TEST_CASE("square segments") {
    const Waveform w({Segment::square(0.2, 1e-3, 2, 0.05)});
    CHECK(w.duration() == doctest::Approx(2e-3));
    CHECK(w.value(0.0) == doctest::Approx(0.15));
    CHECK(w.value(0.4e-3) == doctest::Approx(0.15));
    CHECK(w.value(0.5e-3) == doctest::Approx(-0.05));
    CHECK(w.value_before(0.5e-3) == doctest::Approx(0.15));
    CHECK(w.value(1.2e-3) == doctest::Approx(0.15));
    CHECK(w.value(2e-3) == doctest::Approx(-0.05));
    CHECK_THROWS_AS(w.value(-1e-9), InvalidArgument);
    CHECK_THROWS_AS(w.value(2.1e-3), InvalidArgument);
    CHECK_THROWS_AS(Segment::pulse(0.1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(Segment::square(0.1, 1e-3, 0), InvalidArgument);
    CHECK_THROWS_AS(Waveform{}.value(0.0), InvalidArgument);
    const auto pieces = w.pieces();
    REQUIRE(pieces.size() == 4);
    CHECK(pieces[3].start == doctest::Approx(1.5e-3));
    CHECK(pieces[3].value == doctest::Approx(-0.05));
}

TEST_CASE("sampling anywhere in range never fails") {
    const BitVector bits{1, 0, 1, 1, 0};
    const Waveform w = build_drive(1, encode_stream(bits, 0.1, 0.25, 0.01, kDefaultPeriod));
    for (int k = 0; k <= 10000; ++k) {
        const double t = w.duration() * k / 10000.0;
        CHECK_NOTHROW(w.value(t));
        CHECK_NOTHROW(w.value_before(t));
    }
}

TEST_CASE("bit streams") {
    const BitVector bits{1, 0, 1};
    const Waveform w = encode_stream(bits, 0.1, 0.25, 0.01, 1.134e-3);
    CHECK(w.duration() == doctest::Approx(3.402e-3).epsilon(1e-12));
    REQUIRE(w.segments().size() == 3);
    CHECK(w.segments()[0].amplitude == 0.25);
    CHECK(w.segments()[1].amplitude == 0.1);
    CHECK(w.segments()[2].amplitude == 0.25);

    // Per period: mean equals the offset, peak-to-peak equals the bit's level.
    for (std::size_t j = 0; j < bits.size(); ++j) {
        double sum = 0.0, lo = 1e9, hi = -1e9;
        const int n = 1000;
        for (int k = 0; k < n; ++k) {
            const double v = w.value((j + (k + 0.5) / n) * 1.134e-3);
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(sum / n == doctest::Approx(0.01).epsilon(1e-9));
        CHECK(hi - lo == doctest::Approx(bits[j] ? 0.25 : 0.1).epsilon(1e-12));
    }

    const Waveform single = encode_stream(BitVector{0}, 0.2, 0.2, 0.0, 1e-3);
    const Waveform plain({Segment::square(0.2, 1e-3, 1)});
    for (double t : {0.0, 0.3e-3, 0.6e-3, 0.99e-3}) CHECK(single.value(t) == plain.value(t));

    const AmplitudeTable one(1, {0.1, 0.25});
    const Waveform ones = encode_stream(BitVector{1, 1, 1, 1}, 0.1, 0.25, 0.0, 1e-3);
    const Waveform constant({Segment::square(encode_word(BitVector{1}, one), 1e-3, 4)});
    for (int k = 0; k < 400; ++k) CHECK(ones.value(k * 1e-5) == constant.value(k * 1e-5));
    CHECK_THROWS_AS(encode_stream(BitVector{}, 0.1, 0.2, 0.0, 1e-3), InvalidArgument);
}

TEST_CASE("drive assembly") {
    const Waveform data({Segment::square(0.161, kDefaultPeriod, 20)});
    CHECK(build_drive(1, data).duration() == doctest::Approx(25.18e-3).epsilon(1e-9));
    const Waveform empty_data;
    const Waveform init_only = build_drive(-1, empty_data);
    CHECK(init_only.duration() == doctest::Approx(2.5e-3));
    CHECK(init_only.value(0.1e-3) == -0.2);
    CHECK(init_only.value(1.0e-3) == 0.0);
    BitVector bits(30, 1);
    const Waveform stream = build_drive(1, encode_stream(bits, 0.1, 0.25, 0.01, kDefaultPeriod));
    CHECK(stream.duration() == doctest::Approx(36.52e-3).epsilon(1e-9));
    CHECK_THROWS_AS(build_drive(2, data), InvalidArgument);
}

TEST_CASE("waveform csv") {
    const Waveform w({Segment::pulse(0.1, 1e-3)});
    std::ostringstream os;
    write_waveform_csv(os, w, 0.5e-3);
    CHECK(os.str().rfind("t,u\n", 0) == 0);
}
