#include <doctest.h>

#include <cmath>
#include <vector>

#include "hpsim/coupling.hpp"
#include "hpsim/error.hpp"
#include "hpsim/rwre.hpp"

using namespace hpsim;

TEST_CASE("uniform field is keyed by vertex") {
    auto s = make_stream(70, 0);
    auto a = sample_uniform_field(s, {-5, 5, 0, 5});
    UniformField b(a.key(), {-50, 50, -10, 50});
    for (int n = 0; n <= 5; ++n)
        for (int x = -5; x <= 5; ++x)
            if (on_lattice({x, n})) CHECK(a.at(x, n) == b.at(x, n));
    CHECK_THROWS_AS(a.at(0, 1), InvalidParameter);
    CHECK_THROWS_AS(a.at(6, 0), OutOfDomain);

    UniformField big(12345, {-400, 400, -200, 200});
    std::vector<double> vals;
    for (int n = -120; n < 130 && vals.size() < 100000; ++n)
        for (int x = -400; x <= 400 && vals.size() < 100000; ++x)
            if (on_lattice({x, n})) vals.push_back(big.at(x, n));
    REQUIRE(vals.size() == 100000);
    auto res = ks_test(vals, [](double u) { return std::clamp(u, 0.0, 1.0); });
    CHECK(res.p_value > 1e-3);
}

TEST_CASE("occupancy follows the particle configuration") {
    BoxEnvironment env;
    env.lambda = 1.0;
    env.box = {-3, 3, 0, 3};
    env.sources.coords = {0.2, 1.5};
    env.sources.window = {-3, 3};
    env.sinks.window = {0, 3};
    env.clocks.points = {{-1.9, 1.5}};
    env.clocks.window = env.box;
    auto occ = Occupancy::from_history(evolve_particles(env));
    CHECK(occ.region().x_lo == -2);
    CHECK(occ.region().x_hi == 2);
    CHECK(occ.occupied(0, 0));
    CHECK_FALSE(occ.occupied(1, 0));
    CHECK_FALSE(occ.occupied(2, 0));
    // The clock pulls the particle at 0.2 to -1.9 at time 1.5.
    CHECK(occ.occupied(0, 1));
    CHECK_FALSE(occ.occupied(0, 2));
    CHECK(occ.occupied(-2, 2));
    CHECK_THROWS_AS(occ.occupied(3, 0), OutOfDomain);
}

TEST_CASE("deterministic and forced walks") {
    LatticeRegion region{-1100, 1100, 0, 1000};
    auto dense = Occupancy::forced(true, region);
    UniformField u(7, region);
    auto xs = run_walk(dense, u, {0, 0}, 1000, WalkConfig{1.0, 1.0});
    CHECK(xs.back() == 1000);
    xs = run_walk(dense, u, {0, 0}, 1000, WalkConfig{0.0, 0.0});
    CHECK(xs.back() == -1000);
    CHECK_THROWS_AS(run_walk(dense, u, {0, 1}, 10, WalkConfig{}), InvalidParameter);
    CHECK_THROWS_AS(run_walk(dense, u, {0, 0}, 1002, WalkConfig{}), OutOfDomain);
    CHECK_THROWS_AS(run_walk(dense, u, {0, 0}, 10, WalkConfig{1.5, 0.5}), InvalidParameter);

    const double pb = 0.7;
    std::vector<double> speeds;
    for (int r = 0; r < 1000; ++r) {
        auto s = make_stream(71, r);
        auto f = sample_uniform_field(s, region);
        auto w = run_walk(dense, f, {0, 0}, 1000, WalkConfig{pb, 0.2});
        speeds.push_back(w.back() / 1000.0);
    }
    auto est = mc_estimate(speeds);
    CHECK(std::fabs(est.mean - (2 * pb - 1)) <= 3 * est.std_error);
}

TEST_CASE("coalescence and start monotonicity") {
    const int H = 60;
    SpaceTimeBox box{-H - 10.5, H + 20.5, 0.0, H + 0.5};
    LatticeRegion region{-H - 10, H + 20, 0, H};
    int violations = 0, met = 0;
    for (int r = 0; r < 1000; ++r) {
        auto s = make_stream(72, r);
        auto es = s.child(0);
        auto occ = Occupancy::from_history(evolve_particles(sample_box_environment(es, 1.0, box)));
        auto us = s.child(1);
        auto u = sample_uniform_field(us, region);
        WalkConfig cfg{0.8, 0.3};
        int gap = 2 * (1 + r % 4);
        auto a = run_walk(occ, u, {0, 0}, H, cfg);
        auto b = run_walk(occ, u, {gap, 0}, H, cfg);
        bool joined = false;
        for (int m = 0; m <= H; ++m) {
            if (a[m] > b[m]) ++violations;
            if (joined && a[m] != b[m]) ++violations;
            if (a[m] == b[m]) joined = true;
        }
        met += joined ? 1 : 0;
    }
    CHECK(violations == 0);
    CHECK(met > 0);
}

TEST_CASE("walks are monotone in the environment density") {
    const int H = 60;
    SpaceTimeBox box{-H - 1.5, H + 1.5, 0.0, H + 0.5};
    LatticeRegion region{-H - 1, H + 1, 0, H};
    int violations = 0, differ = 0;
    for (int r = 0; r < 1000; ++r) {
        auto s = make_stream(73, r);
        auto es = s.child(0);
        auto c = ordered_couple(es, 0.6, 1.4, box);
        auto lo = Occupancy::from_history(evolve_particles(c.lo()));
        auto hi = Occupancy::from_history(evolve_particles(c.hi()));
        auto us = s.child(1);
        auto u = sample_uniform_field(us, region);
        WalkConfig cfg{0.85, 0.25};
        auto a = run_walk(lo, u, {0, 0}, H, cfg);
        auto b = run_walk(hi, u, {0, 0}, H, cfg);
        for (int m = 0; m <= H; ++m)
            if (a[m] > b[m]) ++violations;
        differ += a != b ? 1 : 0;
    }
    CHECK(violations == 0);
    CHECK(differ > 0);
}

TEST_CASE("diamond offsets") {
    auto o = diamond_offsets(5);
    CHECK(o.size() == 13);
    for (const auto& w : o) CHECK(std::abs(w.x) + std::abs(w.t) <= 1.0);
    CHECK(diamond_offsets(1).size() == 1);
    CHECK(diamond_offsets(2).size() == 1);
    CHECK(diamond_offsets(3).size() == 5);
}

TEST_CASE("p_H estimator") {
    WalkExperiment e;
    e.rho = 1.0;
    e.H = 40;
    e.reps = 60;
    e.cfg = {0.8, 0.3};
    RunOptions opt{74, 0, 1};
    auto t = displacement_table(e, opt);
    CHECK(estimate_pH(t, EventSide::Upper, -1.0).mean == 1.0);
    CHECK(estimate_pH(t, EventSide::Lower, 1.0).mean == 1.0);
    CHECK_THROWS_AS(estimate_pH(t, EventSide::Upper, 1.5), InvalidParameter);

    double prev_up = 2.0, prev_lo = -1.0;
    for (double v = -1.0; v <= 1.0; v += 0.1) {
        auto up = estimate_pH(t, EventSide::Upper, v);
        auto lo = estimate_pH(t, EventSide::Lower, v);
        CHECK(up.mean <= prev_up);
        CHECK(lo.mean >= prev_lo);
        prev_up = up.mean;
        prev_lo = lo.mean;
    }

    RunOptions four{74, 0, 4};
    auto t4 = displacement_table(e, four);
    CHECK(t4.max_disp == t.max_disp);
    CHECK(t4.min_disp == t.min_disp);

    WalkExperiment d;
    d.mode = EnvironmentMode::ForcedDense;
    d.H = 1000;
    d.reps = 40;
    d.cfg = {0.9, 0.1};
    auto up = estimate_pH(EventSide::Upper, 0.9, d, RunOptions{75, 0, 1});
    CHECK(up.mean < 0.05);
}

TEST_CASE("speed brackets") {
    WalkExperiment d;
    d.mode = EnvironmentMode::ForcedDense;
    d.H = 400;
    d.reps = 60;
    d.cfg = {0.75, 0.2};
    const double tol = 0.01;
    auto b = speed_bracket(d, tol, RunOptions{76, 0, 1});
    const double sigma = 2 * std::sqrt(0.75 * 0.25 / d.H);
    CHECK(std::fabs(b.v_plus - 0.5) <= tol + 3 * sigma);
    CHECK(std::fabs(b.v_minus - 0.5) <= tol + 3 * sigma);
    CHECK(b.v_minus <= b.v_plus + tol);

    WalkExperiment flat;
    flat.rho = 0.5;
    flat.H = 200;
    flat.reps = 30;
    flat.cfg = {0.6, 0.6};
    auto fb = speed_bracket(flat, tol, RunOptions{77, 0, 1});
    const double sf = 2 * std::sqrt(0.6 * 0.4 / flat.H);
    CHECK(std::fabs(fb.v_plus - 0.2) <= tol + 3 * sf);
    CHECK(std::fabs(fb.v_minus - 0.2) <= tol + 3 * sf);
    CHECK(fb.v_minus <= fb.v_plus + tol);

    auto rows = ph_sweep(displacement_table(flat, RunOptions{77, 0, 1}), {0.0, 0.2, 0.4});
    CHECK(rows.size() == 6);
    auto csv = sweep_csv(flat.rho, flat.H, rows);
    CHECK(csv.rfind("rho,H,v,direction,estimate,stderr\n", 0) == 0);
}

TEST_CASE("multiscale schedule") {
    ScheduleParams p;
    auto t = rwre_schedule(p);
    REQUIRE(t.rows.size() == 11);
    CHECK(t.rows[0].L == 10000000000ULL);
    CHECK(t.rows[0].l == 316);
    CHECK(t.rows[0].eps == doctest::Approx(0.23714).epsilon(1e-5));
    CHECK(std::fabs(t.rows[0].eps - std::pow(10.0, -10.0 / 16.0)) < 1e-12);
    CHECK(t.rows[1].L == boost::multiprecision::cpp_int(316) * 10000000000ULL);
    for (std::size_t k = 0; k + 1 < t.rows.size(); ++k) {
        CHECK(t.rows[k + 1].L == t.rows[k].l * t.rows[k].L);
        CHECK(t.rows[k + 1].eps < t.rows[k].eps);
    }
    CHECK(t.eps_tail_k6 <= p.delta / 4);
    for (const auto& r : t.rows) {
        if (r.k < t.k6) CHECK(std::isnan(r.rho));
        if (r.k < t.k7) CHECK(std::isnan(r.v_tilde));
    }
    REQUIRE(t.k7 + 2 < static_cast<int>(t.rows.size()));
    CHECK(t.rows[t.k6].rho == doctest::Approx(p.rho_c_minus - 1.25 * p.delta));
    CHECK(t.rows[t.k6 + 1].rho < t.rows[t.k6].rho);
    CHECK(t.rows[t.k7].v_tilde == doctest::Approx(p.v_target - (p.v_target - p.rho) / 8));
    CHECK(t.rows[t.k7 + 1].v_tilde < t.rows[t.k7].v_tilde);

    ScheduleParams longer = p;
    longer.k_max = 20;
    double partial = 0, prev = 0;
    for (const auto& r : rwre_schedule(longer).rows) {
        prev = partial;
        partial += r.eps;
    }
    CHECK(partial - prev < 1e-6);

    auto csv = schedule_csv(t);
    CHECK(csv.find("\n0,10000000000,316,") != std::string::npos);

    ScheduleParams bad = p;
    bad.rho = 0.45;
    CHECK_THROWS_AS(rwre_schedule(bad), InvalidParameter);
    bad = p;
    bad.L0 = 15;
    CHECK_THROWS_AS(rwre_schedule(bad), InvalidParameter);
}
