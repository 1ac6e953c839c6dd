#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace hpsim {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

// Counter-based stream. The seed is the Philox key; the stream id and a lane
// word live in the counter, so any (seed, stream_id, lane) triple can be
// regenerated without touching other streams.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t lane = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint32_t lane() const { return lane_; }

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    // [0, 1) with 53 random bits.
    double uniform();
    // (0, 1), never returns 0.
    double uniform_open();

    // Independent sub-stream; tag < 256. Nesting depth is limited to four levels.
    RandomStream child(std::uint32_t tag) const;

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint32_t lane_;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

RandomStream make_stream(std::uint64_t seed, std::uint64_t stream_id);

// Injective map (experiment, replicate) -> stream id; experiment < 2^24,
// replicate < 2^40.
std::uint64_t derive_stream_id(std::uint64_t experiment, std::uint64_t replicate);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi > lo ? hi - lo : 0.0; }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

struct Rect {
    double x0 = 0.0, x1 = 0.0;
    double t0 = 0.0, t1 = 0.0;
    double width() const { return x1 - x0; }
    double height() const { return t1 - t0; }
    double area() const { return width() * height(); }
};

struct PointSet1D {
    std::vector<double> coords;  // sorted ascending
    Interval window;
};

struct Point2 {
    double x = 0.0;
    double t = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

struct PointSet2D {
    std::vector<Point2> points;  // sorted by (x, t)
    Rect window;
};

std::uint64_t sample_poisson(RandomStream& s, double mean);
double sample_exponential(RandomStream& s, double rate);
PointSet1D sample_ppp_1d(RandomStream& s, double rate, Interval window);
PointSet2D sample_ppp_2d(RandomStream& s, double rate, const Rect& window);

}  // namespace hpsim
