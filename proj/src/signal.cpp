#include "memchaos/signal.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "memchaos/error.hpp"
#include "memchaos/io.hpp"

namespace memchaos {

namespace {

constexpr double kRelTol = 1e-9;

long long whole_periods(double duration, double period) {
    const double ratio = duration / period;
    const long long n = std::llround(ratio);
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > kRelTol * ratio) {
        throw InvalidArgument("square segment duration must be a whole number of periods");
    }
    return n;
}

void validate(const Segment& s) {
    if (!std::isfinite(s.amplitude) || !std::isfinite(s.offset)) {
        throw InvalidArgument("segment levels must be finite");
    }
    if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
        throw InvalidArgument("segment duration must be positive");
    }
    if (s.kind == SegmentKind::Square) {
        if (!(s.period > 0.0)) throw InvalidArgument("square period must be positive");
        whole_periods(s.duration, s.period);
    }
}

// Level of half-period `half` of a square segment.
double square_level(const Segment& s, long long half) {
    return (half % 2 == 0) ? s.offset + 0.5 * s.amplitude : s.offset - 0.5 * s.amplitude;
}

}  // namespace

Segment Segment::pulse(double amplitude, double duration) {
    Segment s;
    s.kind = SegmentKind::Pulse;
    s.amplitude = amplitude;
    s.duration = duration;
    validate(s);
    return s;
}

Segment Segment::square(double amplitude, double period, int n_periods, double offset) {
    if (n_periods < 1) throw InvalidArgument("square segment needs at least one period");
    Segment s;
    s.kind = SegmentKind::Square;
    s.amplitude = amplitude;
    s.offset = offset;
    s.period = period;
    s.duration = period * n_periods;
    validate(s);
    return s;
}

Waveform::Waveform(std::vector<Segment> segments) {
    for (const auto& s : segments) append(s);
}

void Waveform::append(const Segment& segment) {
    validate(segment);
    starts_.push_back(duration_);
    segments_.push_back(segment);
    duration_ += segment.duration;
}

void Waveform::append(const Waveform& other) {
    for (const auto& s : other.segments_) append(s);
}

double Waveform::value(double t) const {
    if (segments_.empty()) throw InvalidArgument("empty waveform");
    if (!(t >= 0.0) || t > duration_ * (1.0 + 1e-12)) {
        throw InvalidArgument("waveform sampled outside [0, duration]");
    }
    if (t >= duration_) return value_before(duration_);
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    const std::size_t idx = static_cast<std::size_t>(it - starts_.begin()) - 1;
    const Segment& s = segments_[idx];
    if (s.kind == SegmentKind::Pulse) return s.amplitude;
    const long long halves = 2 * whole_periods(s.duration, s.period);
    auto half = static_cast<long long>(std::floor((t - starts_[idx]) / (0.5 * s.period)));
    half = std::clamp(half, 0LL, halves - 1);
    return square_level(s, half);
}

double Waveform::value_before(double t) const {
    if (segments_.empty()) throw InvalidArgument("empty waveform");
    if (!(t >= 0.0) || t > duration_ * (1.0 + 1e-12)) {
        throw InvalidArgument("waveform sampled outside [0, duration]");
    }
    if (t <= 0.0) return value(0.0);
    // Segment whose half-open interval (start, end] contains t.
    auto it = std::lower_bound(starts_.begin(), starts_.end(), t);
    const std::size_t idx = static_cast<std::size_t>(it - starts_.begin()) - 1;
    const Segment& s = segments_[idx];
    if (s.kind == SegmentKind::Pulse) return s.amplitude;
    const long long halves = 2 * whole_periods(s.duration, s.period);
    auto half = static_cast<long long>(std::ceil((t - starts_[idx]) / (0.5 * s.period))) - 1;
    half = std::clamp(half, 0LL, halves - 1);
    return square_level(s, half);
}

std::vector<Piece> Waveform::pieces() const {
    std::vector<Piece> out;
    for (std::size_t k = 0; k < segments_.size(); ++k) {
        const Segment& s = segments_[k];
        if (s.kind == SegmentKind::Pulse) {
            out.push_back({starts_[k], s.duration, s.amplitude});
            continue;
        }
        const long long halves = 2 * whole_periods(s.duration, s.period);
        const double half = 0.5 * s.period;
        for (long long h = 0; h < halves; ++h) {
            out.push_back({starts_[k] + static_cast<double>(h) * half, half, square_level(s, h)});
        }
    }
    return out;
}

AmplitudeTable::AmplitudeTable(int n_bits, std::vector<double> amplitudes)
    : n_bits_(n_bits), amplitudes_(std::move(amplitudes)) {
    if (n_bits_ < 1 || n_bits_ > 8) throw InvalidArgument("n_bits must lie in [1, 8]");
    if (amplitudes_.size() != (std::size_t{1} << n_bits_)) {
        throw InvalidArgument("amplitude table needs 2^n_bits entries");
    }
    for (std::size_t k = 0; k < amplitudes_.size(); ++k) {
        if (!std::isfinite(amplitudes_[k])) throw InvalidArgument("amplitude is not finite");
        if (k > 0 && !(amplitudes_[k] > amplitudes_[k - 1])) {
            throw InvalidArgument("amplitude table must be strictly increasing");
        }
    }
}

AmplitudeTable amplitude_table(int n_bits, double u_min, double u_max,
                               const std::optional<std::vector<double>>& explicit_amplitudes) {
    if (explicit_amplitudes) return AmplitudeTable(n_bits, *explicit_amplitudes);
    if (n_bits < 1 || n_bits > 8) throw InvalidArgument("n_bits must lie in [1, 8]");
    if (!(u_min < u_max)) throw InvalidArgument("amplitude range needs u_min < u_max");
    const std::size_t n = std::size_t{1} << n_bits;
    std::vector<double> amps(n);
    for (std::size_t k = 0; k < n; ++k) {
        amps[k] = u_min + (u_max - u_min) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    return AmplitudeTable(n_bits, std::move(amps));
}

std::size_t word_index(std::span<const std::uint8_t> word) {
    std::size_t index = 0;
    for (std::uint8_t b : word) {
        if (b > 1) throw InvalidArgument("bits must be 0 or 1");
        index = (index << 1) | b;
    }
    return index;
}

BitVector word_bits(std::size_t index, int n_bits) {
    BitVector bits(static_cast<std::size_t>(n_bits));
    for (int k = 0; k < n_bits; ++k) {
        bits[static_cast<std::size_t>(n_bits - 1 - k)] = static_cast<std::uint8_t>((index >> k) & 1U);
    }
    return bits;
}

double encode_word(std::span<const std::uint8_t> word, const AmplitudeTable& table) {
    if (word.size() != static_cast<std::size_t>(table.n_bits())) {
        throw InvalidArgument("word length does not match the amplitude table");
    }
    return table[word_index(word)];
}

Waveform encode_stream(std::span<const std::uint8_t> bits, double u_low, double u_high,
                       double offset, double period) {
    if (bits.empty()) throw InvalidArgument("bit stream is empty");
    if (!(period > 0.0)) throw InvalidArgument("period must be positive");
    Waveform w;
    for (std::uint8_t b : bits) {
        if (b > 1) throw InvalidArgument("bits must be 0 or 1");
        w.append(Segment::square(b ? u_high : u_low, period, 1, offset));
    }
    return w;
}

Waveform build_drive(int polarity, const Waveform& data) {
    if (polarity != 1 && polarity != -1) throw InvalidArgument("polarity must be +1 or -1");
    Waveform w;
    w.append(Segment::pulse(polarity * kInitPulseAmplitude, kInitPulseWidth));
    w.append(Segment::pulse(0.0, kSettleTime));
    w.append(data);
    return w;
}

void write_waveform_csv(std::ostream& os, const Waveform& waveform, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("sampling step must be positive");
    os << "t,u\n";
    const auto n = static_cast<long long>(std::floor(waveform.duration() / dt * (1.0 + 1e-12)));
    for (long long k = 0; k <= n; ++k) {
        const double t = std::min(static_cast<double>(k) * dt, waveform.duration());
        os << format_number(t) << ',' << format_number(waveform.value(t)) << '\n';
    }
}

}  // namespace memchaos
