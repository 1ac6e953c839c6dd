#include <doctest.h>

#include <cmath>
#include <vector>

#include "hpsim/detection.hpp"
#include "hpsim/error.hpp"
#include "hpsim/verify/oracles.hpp"

using namespace hpsim;

namespace {

SiteGrid bernoulli_grid(RandomStream& s, int x_lo, int x_hi, int n_lo, int n_hi, double p_open) {
    SiteGrid g = SiteGrid::all_open(x_lo, x_hi, n_lo, n_hi);
    for (auto& o : g.open) o = s.uniform() < p_open ? 1 : 0;
    return g;
}

BoxEnvironment empty_env(const SpaceTimeBox& box) {
    BoxEnvironment e;
    e.lambda = 1.0;
    e.box = box;
    e.sources.window = {box.x0, box.x1};
    e.sinks.window = {box.t0, box.t1};
    return e;
}

}  // namespace

TEST_CASE("openness on hand-built environments") {
    auto env = empty_env({-4, 4, 0, 4});
    auto g = openness_grid(evolve_particles(env), 1.0, SiteWindow{-3, 3, 0, 2});
    for (auto o : g.open) CHECK(o == 1);

    env.sources.coords = {0.0};
    g = openness_grid(evolve_particles(env), 1.0, SiteWindow{-3, 3, 0, 2});
    for (int n = 0; n <= 2; ++n)
        for (int x = -3; x <= 3; ++x) CHECK(g.is_open(x, n) == (x != 0));

    CHECK_THROWS_AS(openness_grid(evolve_particles(env), 1.0, SiteWindow{-3, 3, 0, 4}), OutOfDomain);
    CHECK_THROWS_AS(openness_grid(evolve_particles(env), 1.5, SiteWindow{-3, 3, 0, 2}), OutOfDomain);
}

TEST_CASE("openness matches the brute-force scan") {
    for (int i = 0; i < 60; ++i) {
        auto s = make_stream(61, i);
        double lambda = 0.5 + 1.5 * s.uniform();
        double r = (i % 3 == 0) ? 0.3 : (i % 3 == 1 ? 0.5 : 1.0);
        double ds = (i % 2 == 0) ? 1.0 : 0.5;
        double dt = (i % 4 < 2) ? 1.0 : 0.75;
        SiteWindow w{-3, 3, 0, 4};
        SpaceTimeBox box{-3 * ds - r - 0.5, 3 * ds + r + 0.5, 0.0, 5 * dt + 0.2};
        auto env = sample_box_environment(s, lambda, box);
        auto fast = openness_grid(evolve_particles(env), r, w, ds, dt);
        auto slow = oracle::openness_grid(env, r, w, ds, dt);
        CHECK(fast.open == slow.open);
    }
}

TEST_CASE("reach_dp trivial cases") {
    auto g = SiteGrid::all_open(-10, 10, 0, 5);
    auto ev = reach_dp(g, 2);
    CHECK(ev.survived());
    CHECK_FALSE(ev.censored);
    REQUIRE(ev.sets.size() == 6);
    for (int n = 0; n <= 5; ++n) {
        std::vector<int> want;
        for (int x = std::max(-10, -2 * n); x <= std::min(10, 2 * n); ++x) want.push_back(x);
        CHECK(ev.sets[n] == want);
    }
    CHECK(reach_dp(g, 3).censored);

    g.set_open(0, 0, false);
    ev = reach_dp(g, 2);
    CHECK(ev.detected_at == 0);
    CHECK_THROWS_AS(reach_dp(g, -1), InvalidParameter);
}

TEST_CASE("reach_dp matches path enumeration on 8x8 grids") {
    int agree = 0, total = 0;
    for (int i = 0; i < 400; ++i) {
        auto s = make_stream(62, i);
        double p = 0.35 + 0.5 * s.uniform();
        auto g = bernoulli_grid(s, -3, 4, 0, 7, p);
        int N = i % 4;
        auto fast = reach_dp(g, N);
        auto slow = oracle::reach_sets(g, N);
        ++total;
        if (fast.sets == slow.sets && fast.detected_at == slow.detected_at) ++agree;
    }
    CHECK(agree == total);
}

TEST_CASE("reach sets are monotone in N and in the open set") {
    for (int i = 0; i < 200; ++i) {
        auto s = make_stream(63, i);
        auto g = bernoulli_grid(s, -6, 6, 0, 12, 0.5);
        auto more = g;
        for (auto& o : more.open)
            if (s.uniform() < 0.2) o = 1;
        for (int N = 0; N < 4; ++N) {
            auto a = reach_dp(g, N), b = reach_dp(g, N + 1), c = reach_dp(more, N);
            for (std::size_t n = 0; n < a.sets.size(); ++n) {
                for (int x : a.sets[n]) {
                    REQUIRE(n < b.sets.size());
                    CHECK(std::binary_search(b.sets[n].begin(), b.sets[n].end(), x));
                    REQUIRE(n < c.sets.size());
                    CHECK(std::binary_search(c.sets[n].begin(), c.sets[n].end(), x));
                }
            }
        }
    }
}

TEST_CASE("survival is monotone in N and r on shared environments") {
    SpaceTimeBox box{-12, 12, 0, 11};
    for (int i = 0; i < 200; ++i) {
        auto s = make_stream(64, i);
        auto env = sample_box_environment(s, 1.0, box);
        auto h = evolve_particles(env);
        SiteWindow w{-8, 8, 0, 10};
        std::vector<bool> prev_r;
        for (double r : {0.2, 0.4, 0.8}) {
            auto g = openness_grid(h, r, w);
            std::vector<bool> surv;
            bool prev = false;
            for (int N = 0; N <= 4; ++N) {
                bool now = reach_dp(g, N).survived();
                CHECK((!prev || now));
                prev = now;
                surv.push_back(now);
            }
            if (!prev_r.empty())
                for (std::size_t j = 0; j < surv.size(); ++j) CHECK((!surv[j] || prev_r[j]));
            prev_r = surv;
        }
    }
}

TEST_CASE("survival estimates at the extremes") {
    RunOptions opt{65, 1, 1};
    SurvivalParams p;
    p.lambda = 0.01;
    p.r = 0.01;
    p.N = 20;
    p.horizon = 10;
    p.half_width = 20;
    p.reps = 400;
    auto hi = estimate_survival(p, opt);
    CHECK(hi.mean > 0.95);
    CHECK(hi.has_flag("censored"));

    p.lambda = 2.0;
    p.r = 6.0;
    p.N = 1;
    p.half_width = 10;
    auto lo = estimate_survival(p, opt);
    CHECK(lo.mean < 0.05);

    p.lambda = 1.0;
    p.r = 0.5;
    p.half_width = 30;
    p.reps = 200;
    auto rows = survival_curve(p, {0, 1, 2, 3}, opt);
    for (std::size_t j = 1; j < rows.size(); ++j) CHECK(rows[j].estimate.mean >= rows[j - 1].estimate.mean);
    CHECK(rows[0].censored_fraction == 0.0);
    auto csv = survival_csv(rows);
    CHECK(csv.rfind("N,estimate,stderr,reps,censored_fraction\n", 0) == 0);

    RunOptions four{65, 1, 4};
    auto again = survival_curve(p, {0, 1, 2, 3}, four);
    CHECK(survival_csv(again) == csv);
}

TEST_CASE("detection schedule") {
    BigInt googol = boost::multiprecision::pow(BigInt(10), 100);
    auto rows = detection_schedule(googol, 10);
    REQUIRE(rows.size() == 11);
    CHECK(rows[0].l == googol);
    CHECK(rows[0].L == 3 * googol / 2);
    for (int k = 0; k < 10; ++k) {
        const BigInt& l = rows[k].l;
        const BigInt& l1 = rows[k + 1].l;
        BigInt cube = l * l * l;
        CHECK(cube <= 4 * l1 * l1);
        CHECK(l1 * l1 <= cube);
        CHECK(l <= rows[k].L);
        if (k >= 2) CHECK(rows[k].L <= 2 * l);
    }
    CHECK(rows[1].L == (5 * rows[1].l) / 2);

    auto small = detection_schedule(4, 2);
    CHECK(small[1].l == 8);
    CHECK(small[1].L == 20);
    CHECK(small[0].L == 6);
    CHECK_THROWS_AS(detection_schedule(1, 3), InvalidParameter);
}

TEST_CASE("crossing checker trivial cases") {
    for (int l0 = 2; l0 <= 6; ++l0) {
        auto rows = detection_schedule(l0, 0);
        int l = rows[0].l.convert_to<int>(), L = rows[0].L.convert_to<int>();
        auto g = SiteGrid::all_open(0, l + L, 0, l + L);
        CHECK(crossing_exists(g, L + l + 1, 0, l0));
        auto closed = g;
        for (auto& o : closed.open) o = 0;
        CHECK_FALSE(crossing_exists(closed, L + l + 1, 0, l0));
        CHECK_FALSE(crossing_exists(g, 0, 0, l0));
        // The corner site is the only way from the lower to the upper part.
        auto cut = g;
        cut.set_open(l, L, false);
        CHECK_FALSE(crossing_exists(cut, L + l + 1, 0, l0));
        CHECK_FALSE(oracle::crossing_exists(cut, L + l + 1, l, L));
    }
}

TEST_CASE("crossing checker matches enumeration for l0 <= 6") {
    int agree = 0, total = 0, positives = 0;
    for (int l0 = 2; l0 <= 6; ++l0)
        for (int k = 0; k <= 1; ++k) {
            auto rows = detection_schedule(l0, k);
            int l = rows[k].l.convert_to<int>(), L = rows[k].L.convert_to<int>();
            int E = l + L;
            for (int i = 0; i < 6; ++i) {
                auto s = make_stream(66, static_cast<std::uint64_t>(l0 * 100 + k * 10 + i));
                double p = 0.6 + 0.07 * i;
                auto g = bernoulli_grid(s, 0, E, 0, E, p);
                for (int R = 0; R <= E + 1; ++R) {
                    bool fast = crossing_exists(g, R, k, l0);
                    bool slow = oracle::crossing_exists(g, R, l, L);
                    ++total;
                    positives += fast ? 1 : 0;
                    if (fast == slow) ++agree;
                }
            }
        }
    CHECK(agree == total);
    CHECK(positives > 0);
    CHECK(positives < total);
}

TEST_CASE("J event probability") {
    CHECK(j_event_probability(1.0, 0.0) == 0.0);
    CHECK(j_event_probability(1.0, 1.0) == doctest::Approx(0.98168).epsilon(1e-5));
    CHECK_THROWS_AS(j_event_probability(0.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(j_event_probability(1.0, -1.0), InvalidParameter);
    std::uint64_t e = 0;
    for (double lambda : {0.5, 1.0, 2.0})
        for (double r : {0.05, 0.2, 0.5}) {
            auto est = j_event_monte_carlo(lambda, r, 10000, RunOptions{67, e++, 1});
            CHECK(std::fabs(est.mean - j_event_probability(lambda, r)) <= 3 * est.std_error);
        }
}

TEST_CASE("trigger check at desk scale") {
    auto rep = trigger_check(0.5, 0.25, 8, 0, 300, RunOptions{68, 0, 1});
    CHECK(rep.l == 8);
    CHECK(rep.L == 12);
    CHECK(rep.N == 21);
    CHECK(rep.p_hat.has_flag("L0-convention"));
    CHECK(rep.p_hat.mean <= rep.bound + 3 * rep.p_hat.std_error);
}
