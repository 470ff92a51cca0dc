#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace memchaos {

using BitVector = std::vector<std::uint8_t>;

/// Drive period of the data segment, in seconds.
inline constexpr double kDefaultPeriod = 1.134e-3;
inline constexpr double kInitPulseAmplitude = 0.2;
inline constexpr double kInitPulseWidth = 0.5e-3;
/// Zero-drive gap between the initialization pulse and the data.
inline constexpr double kSettleTime = 2.0e-3;

enum class SegmentKind { Pulse, Square };

/// One stretch of the drive. A pulse holds `amplitude` for `duration`; a
/// square wave sits at offset + amplitude/2 for the first half of each period
/// and at offset - amplitude/2 for the second half.
struct Segment {
    SegmentKind kind = SegmentKind::Pulse;
    double amplitude = 0.0;
    double offset = 0.0;
    double period = 0.0;
    double duration = 0.0;

    static Segment pulse(double amplitude, double duration);
    static Segment square(double amplitude, double period, int n_periods, double offset = 0.0);
};

/// Constant-valued interval of a waveform, [start, start + duration).
struct Piece {
    double start;
    double duration;
    double value;
};

/// Piecewise-constant drive u(t) on [0, duration()].
class Waveform {
public:
    Waveform() = default;
    explicit Waveform(std::vector<Segment> segments);

    void append(const Segment& segment);
    void append(const Waveform& other);

    const std::vector<Segment>& segments() const noexcept { return segments_; }
    bool empty() const noexcept { return segments_.empty(); }
    double duration() const noexcept { return duration_; }

    /// Right-continuous value; u(duration()) is the final level.
    double value(double t) const;
    /// Left limit at t; equals value(t) away from jumps.
    double value_before(double t) const;

    /// Expansion into constant pieces, square half-periods included.
    std::vector<Piece> pieces() const;

private:
    std::vector<Segment> segments_;
    std::vector<double> starts_;
    double duration_ = 0.0;
};

/// Maps a big-endian word index to a drive amplitude.
class AmplitudeTable {
public:
    AmplitudeTable(int n_bits, std::vector<double> amplitudes);

    int n_bits() const noexcept { return n_bits_; }
    std::size_t size() const noexcept { return amplitudes_.size(); }
    double operator[](std::size_t index) const { return amplitudes_.at(index); }
    const std::vector<double>& amplitudes() const noexcept { return amplitudes_; }

private:
    int n_bits_;
    std::vector<double> amplitudes_;
};

/// Linear table over [u_min, u_max] unless `explicit_amplitudes` is given.
AmplitudeTable amplitude_table(int n_bits, double u_min, double u_max,
                               const std::optional<std::vector<double>>& explicit_amplitudes = {});

/// Big-endian value of `word`: [a b] -> 2a + b.
std::size_t word_index(std::span<const std::uint8_t> word);
BitVector word_bits(std::size_t index, int n_bits);

double encode_word(std::span<const std::uint8_t> word, const AmplitudeTable& table);

/// One square period per bit at u_low or u_high, with a constant offset.
Waveform encode_stream(std::span<const std::uint8_t> bits, double u_low, double u_high,
                       double offset, double period);

/// Initialization pulse of the given polarity, settling gap, then `data`.
Waveform build_drive(int polarity, const Waveform& data);

/// Writes `t,u` sampled every `dt` seconds.
void write_waveform_csv(std::ostream& os, const Waveform& waveform, double dt);

}  // namespace memchaos
