#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "hpsim/error.hpp"
#include "hpsim/rng.hpp"
#include "hpsim/stats.hpp"

using namespace hpsim;

TEST_CASE("philox known answers") {
    auto r = philox4x32_10({0, 0, 0, 0}, {0, 0});
    CHECK(r == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    r = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(r == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    r = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(r == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible") {
    auto a = make_stream(7, 3), b = make_stream(7, 3);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.uniform() == b.uniform());
    auto z = make_stream(0, 0);
    double u = z.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
}

TEST_CASE("distinct stream ids are uncorrelated") {
    auto a = make_stream(7, 3), b = make_stream(7, 4);
    const int n = 100000;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = a.uniform();
        y[i] = b.uniform();
    }
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    CHECK(std::fabs(sxy / std::sqrt(sxx * syy)) < 0.01);
}

TEST_CASE("child streams differ from parent and each other") {
    auto s = make_stream(1, 2);
    auto c0 = s.child(0), c1 = s.child(1);
    CHECK(c0.lane() != s.lane());
    CHECK(c0.next_u64() != c1.next_u64());
    CHECK_THROWS_AS(s.child(255), InvalidParameter);
    CHECK(derive_stream_id(1, 0) != derive_stream_id(0, 1));
    CHECK_THROWS_AS(derive_stream_id(1ull << 24, 0), InvalidParameter);
}

TEST_CASE("uniform_open never hits the endpoints") {
    auto s = make_stream(3, 3);
    for (int i = 0; i < 100000; ++i) {
        double u = s.uniform_open();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("ppp_1d edge cases and mean count") {
    auto s = make_stream(11, 0);
    CHECK(sample_ppp_1d(s, 0.0, {0, 10}).coords.empty());
    CHECK(sample_ppp_1d(s, 2.0, {0, 0}).coords.empty());
    CHECK_THROWS_AS(sample_ppp_1d(s, -1.0, {0, 10}), InvalidParameter);
    const int reps = 10000;
    double sum = 0;
    for (int r = 0; r < reps; ++r) {
        auto p = sample_ppp_1d(s, 2.0, {0, 10});
        REQUIRE(std::is_sorted(p.coords.begin(), p.coords.end()));
        for (double v : p.coords) REQUIRE((v >= 0.0 && v <= 10.0));
        sum += static_cast<double>(p.coords.size());
    }
    CHECK(std::fabs(sum / reps - 20.0) < 3.0 * std::sqrt(20.0 / reps));
}

TEST_CASE("ppp_2d edge cases and mean count") {
    auto s = make_stream(12, 0);
    CHECK(sample_ppp_2d(s, 0.0, {0, 5, 0, 5}).points.empty());
    CHECK(sample_ppp_2d(s, 1.0, {0, 5, 1, 1}).points.empty());
    const int reps = 10000;
    double sum = 0;
    for (int r = 0; r < reps; ++r) sum += static_cast<double>(sample_ppp_2d(s, 1.0, {0, 5, 0, 5}).points.size());
    CHECK(std::fabs(sum / reps - 25.0) < 3.0 * std::sqrt(25.0 / reps));
}

TEST_CASE("exponential draws") {
    auto s = make_stream(13, 0);
    CHECK_THROWS_AS(sample_exponential(s, 0.0), InvalidParameter);
    for (double rate : {1.0, 4.0}) {
        const int n = 100000;
        std::vector<double> v(n);
        for (auto& x : v) {
            x = sample_exponential(s, rate);
            REQUIRE(x > 0.0);
        }
        auto e = mc_estimate(v);
        CHECK(std::fabs(e.mean - 1.0 / rate) < 3.0 * (1.0 / rate) / std::sqrt(double(n)));
    }
}

TEST_CASE("poisson counts fit the pmf at small and large means") {
    for (double mean : {0.7, 4.0, 29.5, 30.0, 75.0, 400.0}) {
        auto s = make_stream(14, static_cast<std::uint64_t>(mean * 10));
        std::vector<std::uint64_t> counts(20000);
        for (auto& c : counts) c = sample_poisson(s, mean);
        auto r = chi_square_poisson(counts, mean);
        CHECK_MESSAGE(r.p_value > 1e-3, "mean " << mean << " p " << r.p_value);
    }
}
