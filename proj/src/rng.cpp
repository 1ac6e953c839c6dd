#include "hpsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hpsim/error.hpp"

namespace hpsim {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t lane)
    : seed_(seed), stream_id_(stream_id), lane_(lane) {}

void RandomStream::refill() {
    if (block_ == 0xFFFFFFFFu) throw OutOfDomain("RandomStream: counter space exhausted");
    std::array<std::uint32_t, 4> ctr{block_, lane_, static_cast<std::uint32_t>(stream_id_),
                                     static_cast<std::uint32_t>(stream_id_ >> 32)};
    std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                     static_cast<std::uint32_t>(seed_ >> 32)};
    buf_ = philox4x32_10(ctr, key);
    ++block_;
    pos_ = 0;
}

std::uint32_t RandomStream::next_u32() {
    if (pos_ >= 4) refill();
    return buf_[pos_++];
}

std::uint64_t RandomStream::next_u64() {
    std::uint64_t hi = next_u32();
    std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double RandomStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

RandomStream RandomStream::child(std::uint32_t tag) const {
    if (tag >= 255) throw InvalidParameter("RandomStream::child: tag must be < 255");
    if (lane_ >> 24) throw InvalidParameter("RandomStream::child: nesting too deep");
    return RandomStream(seed_, stream_id_, (lane_ << 8) | (tag + 1));
}

RandomStream make_stream(std::uint64_t seed, std::uint64_t stream_id) {
    return RandomStream(seed, stream_id);
}

std::uint64_t derive_stream_id(std::uint64_t experiment, std::uint64_t replicate) {
    if (experiment >= (1ull << 24)) throw InvalidParameter("derive_stream_id: experiment id too large");
    if (replicate >= (1ull << 40)) throw InvalidParameter("derive_stream_id: replicate id too large");
    return (experiment << 40) | replicate;
}

namespace {

std::uint64_t poisson_inversion(RandomStream& s, double mean) {
    double u = s.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf) {
        ++k;
        p *= mean / static_cast<double>(k);
        double next = cdf + p;
        if (next == cdf) break;  // tail underflow, u sits in rounding slack
        cdf = next;
    }
    return k;
}

// Transformed rejection with squeeze (Hormann 1993).
std::uint64_t poisson_ptrs(RandomStream& s, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = s.uniform() - 0.5;
        double v = s.uniform();
        double us = 0.5 - std::fabs(u);
        double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kd);
        if (kd < 0.0 || (us < 0.013 && v > us)) continue;
        double lhs = std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b);
        double rhs = -mean + kd * loglam - std::lgamma(kd + 1.0);
        if (lhs <= rhs) return static_cast<std::uint64_t>(kd);
    }
}

}  // namespace

std::uint64_t sample_poisson(RandomStream& s, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidParameter("sample_poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 30.0) return poisson_inversion(s, mean);
    return poisson_ptrs(s, mean);
}

double sample_exponential(RandomStream& s, double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidParameter("sample_exponential: rate must be > 0");
    return -std::log(s.uniform_open()) / rate;
}

PointSet1D sample_ppp_1d(RandomStream& s, double rate, Interval window) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw InvalidParameter("sample_ppp_1d: rate must be >= 0");
    if (window.hi < window.lo) throw InvalidParameter("sample_ppp_1d: window hi < lo");
    PointSet1D out;
    out.window = window;
    const double len = window.length();
    if (rate == 0.0 || len == 0.0) return out;
    std::uint64_t n = sample_poisson(s, rate * len);
    out.coords.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        double v = window.lo + len * s.uniform_open();
        out.coords.push_back(std::min(v, window.hi));
    }
    std::sort(out.coords.begin(), out.coords.end());
    return out;
}

PointSet2D sample_ppp_2d(RandomStream& s, double rate, const Rect& window) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw InvalidParameter("sample_ppp_2d: rate must be >= 0");
    if (window.x1 < window.x0 || window.t1 < window.t0) throw InvalidParameter("sample_ppp_2d: malformed window");
    PointSet2D out;
    out.window = window;
    const double w = window.width(), h = window.height();
    if (rate == 0.0 || w == 0.0 || h == 0.0) return out;
    std::uint64_t n = sample_poisson(s, rate * w * h);
    out.points.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        double x = std::min(window.x0 + w * s.uniform_open(), window.x1);
        double t = std::min(window.t0 + h * s.uniform_open(), window.t1);
        out.points.push_back({x, t});
    }
    std::sort(out.points.begin(), out.points.end(), [](const Point2& p, const Point2& q) {
        return p.x < q.x || (p.x == q.x && p.t < q.t);
    });
    return out;
}

}  // namespace hpsim
