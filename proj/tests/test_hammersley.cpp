#include <doctest.h>

#include <cmath>
#include <vector>

#include "hpsim/error.hpp"
#include "hpsim/hammersley.hpp"
#include "hpsim/stats.hpp"
#include "hpsim/verify/oracles.hpp"

using namespace hpsim;

namespace {

BoxEnvironment small_env(std::uint64_t rep, std::size_t max_marks) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        auto s = make_stream(31, rep * 1000 + attempt);
        double lambda = 0.5 + 1.5 * s.uniform();
        double w = 0.5 + 2.5 * s.uniform(), h = 0.5 + 2.5 * s.uniform();
        auto env = sample_box_environment(s, lambda, {-1.0, -1.0 + w, 2.0, 2.0 + h});
        std::size_t n = env.sources.coords.size() + env.sinks.coords.size() + env.clocks.points.size();
        if (n <= max_marks) return env;
    }
}

}  // namespace

TEST_CASE("environment sampling") {
    auto s = make_stream(30, 0);
    auto e = sample_box_environment(s, 1.0, {3, 3, 1, 1});
    CHECK(e.sources.coords.empty());
    CHECK(e.sinks.coords.empty());
    CHECK(e.clocks.points.empty());
    CHECK_THROWS_AS(sample_box_environment(s, 0.0, {0, 1, 0, 1}), InvalidParameter);
    CHECK_THROWS_AS(sample_box_environment(s, 1.0, {1, 0, 0, 1}), InvalidParameter);

    for (double lambda : {1.0, 2.0}) {
        const int reps = 10000;
        double src = 0, snk = 0;
        for (int r = 0; r < reps; ++r) {
            auto rs = make_stream(30, 100 + r);
            auto env = sample_box_environment(rs, lambda, {0, 20, 0, 20});
            src += static_cast<double>(env.sources.coords.size());
            snk += static_cast<double>(env.sinks.coords.size());
        }
        double ms = 20 * lambda, mk = 20 / lambda;
        CHECK(std::fabs(src / reps - ms) < 3 * std::sqrt(ms / reps));
        CHECK(std::fabs(snk / reps - mk) < 3 * std::sqrt(mk / reps));
    }
}

TEST_CASE("environment json round trip") {
    auto s = make_stream(30, 7);
    auto env = sample_box_environment(s, 1.3, {0.1, 3.7, -2.0, 1.5});
    auto back = load_environment(dump_environment(env));
    CHECK(back.lambda == env.lambda);
    CHECK(back.sources.coords == env.sources.coords);
    CHECK(back.sinks.coords == env.sinks.coords);
    CHECK(back.clocks.points == env.clocks.points);
    CHECK(dump_environment(back) == dump_environment(env));
    CHECK_THROWS_AS(load_environment("{\"lambda\": 1}"), InvalidConfiguration);
    CHECK_THROWS_AS(load_environment("not json"), InvalidConfiguration);
}

TEST_CASE("lis_count") {
    PointSet2D p;
    CHECK(lis_count(p, {0, 4, 0, 4}) == 0);
    p.points = {{1, 1}, {2, 2}, {3, 3}};
    CHECK(lis_count(p, {0, 4, 0, 4}) == 3);
    CHECK(lis_count(p, {1, 4, 0, 4}) == 2);  // half-open on the left
    p.points = {{1, 2}, {2, 1}};
    CHECK(lis_count(p, {0, 4, 0, 4}) == 1);
    for (int rep = 0; rep < 50; ++rep) {
        auto s = make_stream(32, rep);
        PointSet2D q;
        for (int i = 0; i < 10; ++i) q.points.push_back({s.uniform(), s.uniform()});
        CHECK(lis_count(q, {0, 1, 0, 1}) == oracle::lis_subsets(q.points));
    }
}

TEST_CASE("lpp field trivial cases") {
    BoxEnvironment env;
    env.box = {0, 10, 0, 5};
    env.sources.coords = {1, 4, 6};
    LppField f(env, true);
    for (double t : {0.0, 2.5, 5.0}) {
        CHECK(f.value(0.5, t) == 0);
        CHECK(f.value(4.0, t) == 2);
        CHECK(f.value(10, t) == 3);
    }
    CHECK_THROWS_AS(f.value(11, 1), OutOfDomain);
    BoxEnvironment chain;
    chain.box = {0, 4, 0, 4};
    chain.clocks.points = {{1, 1}, {2, 2}, {3, 3}};
    CHECK(lpp_field(chain).value(4, 4) == 3);
}

TEST_CASE("single clock moves the single source") {
    BoxEnvironment env;
    env.box = {0, 10, 0, 5};
    env.sources.coords = {5};
    env.clocks.points = {{2, 1}};
    auto h = evolve_particles(env);
    REQUIRE(h.events.size() == 1);
    CHECK(h.events[0].kind == EventKind::BulkJump);
    CHECK(h.events[0].time == 1);
    CHECK(h.events[0].to == 2);
    CHECK(h.configuration_at(0.999) == std::vector<double>{5});
    CHECK(h.configuration_at(1.0) == std::vector<double>{2});
    BoxEnvironment none;
    none.box = {0, 10, 0, 5};
    none.sources.coords = {1, 2};
    CHECK(evolve_particles(none).events.empty());
}

TEST_CASE("measure query trivial cases") {
    BoxEnvironment env;
    env.box = {0, 10, 0, 5};
    LppField f(env, true);
    auto h = evolve_particles(env);
    CHECK(measure_query(f, 0, 10, 2) == 0);
    CHECK(measure_query(h, 0, 10, 2) == 0);
    auto s = make_stream(33, 0);
    auto e2 = sample_box_environment(s, 1.0, {0, 5, 0, 5});
    CHECK(measure_query(lpp_field(e2), 0, 5, 0) == static_cast<std::int64_t>(e2.sources.coords.size()));
    CHECK(measure_query(evolve_particles(e2), 0, 5, 0) == static_cast<std::int64_t>(e2.sources.coords.size()));
    CHECK_THROWS_AS(measure_query(f, 0, 11, 2), OutOfDomain);
}

TEST_CASE("cross representation on random environments") {
    for (int rep = 0; rep < 200; ++rep) {
        auto s = make_stream(34, rep);
        double lambda = 0.5 + 1.5 * s.uniform();
        auto env = sample_box_environment(s, lambda, {0, 1 + 4 * s.uniform(), 0, 1 + 4 * s.uniform()});
        LppField f(env, true);
        auto h = evolve_particles(env);
        for (int q = 0; q < 30; ++q) {
            double a = env.box.x0 + env.box.width() * s.uniform();
            double b = env.box.x0 + env.box.width() * s.uniform();
            if (a > b) std::swap(a, b);
            double t = env.box.t0 + env.box.height() * s.uniform();
            REQUIRE(measure_query(f, a, b, t) == measure_query(h, a, b, t));
        }
        double t = env.box.t1 * s.uniform();
        REQUIRE(f.profile(t) == h.configuration_at(t));
        REQUIRE(h.configuration_at(t) == oracle::particles_at(env, t));
    }
}

TEST_CASE("lpp field and exit point against enumeration") {
    for (int rep = 0; rep < 100; ++rep) {
        auto env = small_env(rep, 12);
        auto s = make_stream(35, rep);
        LppField f(env, true), g(env, false);
        for (int q = 0; q < 20; ++q) {
            double x = env.box.x0 + env.box.width() * s.uniform();
            double t = env.box.t0 + env.box.height() * s.uniform();
            REQUIRE(f.value(x, t) == oracle::lpp_value(env, x, t, true));
            REQUIRE(g.value(x, t) == oracle::lpp_value(env, x, t, false));
            auto fast = exit_point(env, x, t);
            auto slow = oracle::exit_point(env, x, t);
            REQUIRE(fast.value == f.value(x, t));
            REQUIRE(fast.value == slow.value);
            REQUIRE(fast.z == slow.z);
            auto fast_ns = exit_point(env, x, t, false);
            REQUIRE(fast_ns.z == oracle::exit_point(env, x, t, false).z);
        }
    }
}

TEST_CASE("exit point with no clocks is the full source span") {
    BoxEnvironment env;
    env.box = {2, 7, 0, 3};
    env.sources.coords = {3, 4.5};
    env.sinks.coords = {1};
    CHECK(exit_point(env, 6, 2).z == doctest::Approx(4.0));
    CHECK(exit_point(env, 6, 2).value == 2);
}

TEST_CASE("exit point monotonicity and lpp monotonicity") {
    for (int rep = 0; rep < 100; ++rep) {
        auto s = make_stream(36, rep);
        auto env = sample_box_environment(s, 0.5 + 1.5 * s.uniform(), {0, 6, 0, 6});
        LppField f(env, true);
        for (double t = 0.5; t <= 6; t += 0.5) {
            double prev_z = -1e9;
            std::int64_t prev_v = -1;
            for (double x = 0.0; x <= 6; x += 0.25) {
                auto e = exit_point(env, x, t);
                REQUIRE(e.z >= prev_z);
                REQUIRE(e.value >= prev_v);
                prev_z = e.z;
                prev_v = e.value;
                if (t + 0.5 <= 6) {
                    REQUIRE(exit_point(env, x, t + 0.5).z <= e.z);
                    REQUIRE(f.value(x, t + 0.5) >= e.value);
                }
            }
        }
    }
}

TEST_CASE("no-sinks restriction") {
    int verified = 0;
    for (int rep = 0; rep < 200; ++rep) {
        auto s = make_stream(37, rep);
        auto env = sample_box_environment(s, 1.0, {0, 8, 0, 8});
        std::vector<Point2> qs;
        for (int i = 0; i < 30; ++i) qs.push_back({4 + 4 * s.uniform(), 4 * s.uniform()});
        auto v = check_no_sinks_restriction(env, 4, 4, qs);
        REQUIRE(v != CheckVerdict::Violation);
        if (v == CheckVerdict::Verified) ++verified;
    }
    CHECK(verified > 0);
}

TEST_CASE("flux count") {
    BoxEnvironment env;
    env.box = {0, 10, 0, 5};
    env.sources.coords = {3, 6};
    env.clocks.points = {{2, 1}, {5, 2}, {9, 3}};
    auto h = evolve_particles(env);
    CHECK(flux_count(h, 4, 0, 5) == 0);
    CHECK(flux_count(h, 2.5, 0, 5) == 1);
    CHECK(flux_count(h, 5, 0, 5) == 1);
    CHECK(flux_count(h, 5, 2, 5) == 0);
    CHECK(flux_count(h, 9.5, 0, 5) == 1);
    CHECK_THROWS_AS(flux_count(h, 11, 0, 5), OutOfDomain);
}

TEST_CASE("stationary counts and flux are Poisson") {
    const double lambda = 1.0;
    std::vector<std::uint64_t> counts, flux;
    for (int r = 0; r < 2000; ++r) {
        auto s = make_stream(33, r);
        auto env = sample_box_environment(s, lambda, {0, 30, 0, 20});
        auto h = evolve_particles(env);
        counts.push_back(h.count(10, 20, 10));
        flux.push_back(flux_count(h, 15, 5, 13));
    }
    CHECK(chi_square_poisson(counts, 10 * lambda).p_value > 1e-3);
    CHECK(chi_square_poisson(flux, 8 / lambda).p_value > 1e-3);
}

TEST_CASE("exit point concentrates near the characteristic") {
    std::vector<double> d;
    for (int r = 0; r < 300; ++r) {
        auto s = make_stream(34, r);
        auto env = sample_box_environment(s, 1.0, {0, 200, 0, 200});
        d.push_back(std::fabs(exit_point(env, 200, 200).z) / 200);
    }
    CHECK(mc_estimate(d).mean <= 0.2);

    // Sources at rate lambda put the characteristic through (x, t) at x - t / lambda^2.
    const double t = 60;
    for (double lambda : {1.5, 2.0}) {
        auto sample = sample_exit_positions(lambda, {-200, 0, 0, t}, 0, t, 200, RunOptions{35, 0, 1});
        CHECK(sample.sink_exits == 0);
        CHECK(std::fabs(mc_estimate(sample.positions).mean + t / (lambda * lambda)) < 0.1 * t);
    }
}
