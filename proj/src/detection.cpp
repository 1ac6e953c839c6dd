#include "hpsim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hpsim/error.hpp"
#include "hpsim/format.hpp"

namespace hpsim {

SiteGrid SiteGrid::all_open(int x_lo, int x_hi, int n_lo, int n_hi) {
    if (x_lo > x_hi || n_lo > n_hi) throw InvalidParameter("SiteGrid: empty window");
    SiteGrid g;
    g.x_lo = x_lo;
    g.x_hi = x_hi;
    g.n_lo = n_lo;
    g.n_hi = n_hi;
    g.open.assign(static_cast<std::size_t>(g.width()) * g.height(), 1);
    return g;
}

bool SiteGrid::is_open(int x, int n) const {
    if (!contains(x, n)) throw OutOfDomain("SiteGrid: site outside the window");
    return open[static_cast<std::size_t>(n - n_lo) * width() + (x - x_lo)] != 0;
}

void SiteGrid::set_open(int x, int n, bool v) {
    if (!contains(x, n)) throw OutOfDomain("SiteGrid: site outside the window");
    open[static_cast<std::size_t>(n - n_lo) * width() + (x - x_lo)] = v ? 1 : 0;
}

namespace {

void close_around(SiteGrid& g, int n, double p) {
    double lo = std::floor((p - g.r) / g.delta_s);
    double hi = std::ceil((p + g.r) / g.delta_s);
    int a = static_cast<int>(std::max<double>(lo, g.x_lo));
    int b = static_cast<int>(std::min<double>(hi, g.x_hi));
    for (int x = a; x <= b; ++x)
        if (std::abs(x * g.delta_s - p) < g.r) g.set_open(x, n, false);
}

}  // namespace

SiteGrid openness_grid(const ParticleHistory& h, double r, const SiteWindow& w, double delta_s, double delta_t) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidParameter("openness_grid: r must be finite and >= 0");
    if (!(delta_s > 0.0) || !(delta_t > 0.0)) throw InvalidParameter("openness_grid: lattice steps must be positive");
    SiteGrid g = SiteGrid::all_open(w.x_lo, w.x_hi, w.n_lo, w.n_hi);
    g.r = r;
    g.delta_s = delta_s;
    g.delta_t = delta_t;
    const auto& box = h.box;
    if (w.x_lo * delta_s - r < box.x0 || w.x_hi * delta_s + r > box.x1 || w.n_lo * delta_t < box.t0 ||
        (w.n_hi + 1) * delta_t > box.t1)
        throw OutOfDomain("openness_grid: window exceeds the environment box");

    HistoryCursor cur(h);
    for (int n = w.n_lo; n <= w.n_hi; ++n) {
        double ta = n * delta_t, tb = (n + 1) * delta_t;
        cur.advance_to(ta);
        for (double p : cur.positions()) close_around(g, n, p);
        for (std::size_t i = cur.next_event(); i < h.events.size() && h.events[i].time < tb; ++i) {
            const auto& e = h.events[i];
            if (e.kind == EventKind::BulkJump || e.kind == EventKind::RightEntry) close_around(g, n, e.to);
        }
    }
    return g;
}

ReachEvolution reach_dp(const SiteGrid& g, int N) {
    if (N < 0) throw InvalidParameter("reach_dp: N must be >= 0");
    ReachEvolution out;
    if (!g.contains(0, g.n_lo)) throw OutOfDomain("reach_dp: origin outside the window");
    std::vector<int> cur;
    if (g.is_open(0, g.n_lo)) cur.push_back(0);
    out.sets.push_back(cur);
    if (cur.empty()) {
        out.detected_at = 0;
        return out;
    }
    const int W = g.width();
    std::vector<int> diff(W + 1);
    for (int n = g.n_lo + 1; n <= g.n_hi; ++n) {
        std::fill(diff.begin(), diff.end(), 0);
        for (int x : cur) {
            long a = static_cast<long>(x) - N, b = static_cast<long>(x) + N;
            if (a < g.x_lo || b > g.x_hi) out.censored = true;
            a = std::max<long>(a, g.x_lo);
            b = std::min<long>(b, g.x_hi);
            ++diff[a - g.x_lo];
            --diff[b - g.x_lo + 1];
        }
        std::vector<int> next;
        int run = 0;
        for (int i = 0; i < W; ++i) {
            run += diff[i];
            if (run > 0 && g.is_open(g.x_lo + i, n)) next.push_back(g.x_lo + i);
        }
        cur = std::move(next);
        out.sets.push_back(cur);
        if (cur.empty()) {
            out.detected_at = n - g.n_lo;
            break;
        }
    }
    return out;
}

namespace {

void validate_survival(const SurvivalParams& p) {
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) throw InvalidParameter("survival: lambda must be positive");
    if (!(p.r >= 0.0) || !std::isfinite(p.r)) throw InvalidParameter("survival: r must be >= 0");
    if (p.N < 0) throw InvalidParameter("survival: N must be >= 0");
    if (p.horizon < 0 || p.half_width < 0) throw InvalidParameter("survival: horizon and half width must be >= 0");
    if (!(p.delta_s > 0.0) || !(p.delta_t > 0.0)) throw InvalidParameter("survival: lattice steps must be positive");
}

}  // namespace

SpaceTimeBox survival_box(const SurvivalParams& p) {
    double xs = p.half_width * p.delta_s + p.r;
    // A strictly positive margin keeps boundary marks off the window edge.
    double m = std::max(1e-9, 1e-9 * xs);
    return SpaceTimeBox{-xs - m, xs + m, 0.0, (p.horizon + 1) * p.delta_t};
}

SiteGrid survival_grid(RandomStream& s, const SurvivalParams& p) {
    validate_survival(p);
    auto env = sample_box_environment(s, p.lambda, survival_box(p));
    auto h = evolve_particles(env);
    SiteGrid g = openness_grid(h, p.r, SiteWindow{-p.half_width, p.half_width, 0, p.horizon}, p.delta_s, p.delta_t);
    g.lambda = p.lambda;
    return g;
}

std::vector<SurvivalRow> survival_curve(const SurvivalParams& p, const std::vector<int>& Ns, const RunOptions& opt) {
    validate_survival(p);
    if (Ns.empty()) throw InvalidParameter("survival_curve: no N values");
    for (int N : Ns)
        if (N < 0) throw InvalidParameter("survival_curve: N must be >= 0");
    struct Rep {
        std::vector<double> survived;
        std::vector<double> censored;
    };
    auto reps = run_replicates<Rep>(p.reps, opt.workers, [&](std::size_t rep) {
        auto s = replicate_stream(opt, rep);
        SiteGrid g = survival_grid(s, p);
        Rep r;
        for (int N : Ns) {
            auto ev = reach_dp(g, N);
            r.survived.push_back(ev.survived() ? 1.0 : 0.0);
            r.censored.push_back(ev.censored ? 1.0 : 0.0);
        }
        return r;
    });
    std::vector<SurvivalRow> rows;
    for (std::size_t j = 0; j < Ns.size(); ++j) {
        std::vector<double> ind, cen;
        for (const auto& r : reps) {
            ind.push_back(r.survived[j]);
            cen.push_back(r.censored[j]);
        }
        SurvivalRow row;
        row.N = Ns[j];
        row.estimate = mc_estimate(ind);
        row.censored_fraction = pairwise_sum(cen) / static_cast<double>(cen.size());
        if (row.censored_fraction > 0.0) row.estimate.add_flag("censored");
        rows.push_back(row);
    }
    return rows;
}

McEstimate estimate_survival(const SurvivalParams& p, const RunOptions& opt) {
    return survival_curve(p, {p.N}, opt).front().estimate;
}

std::string survival_csv(const std::vector<SurvivalRow>& rows) {
    std::ostringstream os;
    os << "N,estimate,stderr,reps,censored_fraction\n";
    for (const auto& r : rows)
        os << r.N << ',' << fmt_double(r.estimate.mean) << ',' << fmt_double(r.estimate.std_error) << ','
           << r.estimate.reps << ',' << fmt_double(r.censored_fraction) << '\n';
    return os.str();
}

std::vector<ScaleRow> detection_schedule(const BigInt& l0, int k_max) {
    if (l0 < 2) throw InvalidParameter("detection_schedule: l0 must be >= 2");
    if (k_max < 0) throw InvalidParameter("detection_schedule: k_max must be >= 0");
    std::vector<ScaleRow> rows;
    BigInt l = l0;
    for (int k = 0; k <= k_max; ++k) {
        ScaleRow row;
        row.k = k;
        row.l = l;
        if (k == 0)
            row.L = (3 * l) / 2;
        else
            row.L = ((3 * k + 2) * l) / (2 * k);
        rows.push_back(row);
        l = boost::multiprecision::sqrt(l) * l;
    }
    return rows;
}

namespace {

int to_small(const BigInt& v, const char* who) {
    if (v > 1000000) throw InvalidParameter(std::string(who) + ": scale too large for a site grid");
    return v.convert_to<int>();
}

void require_block(const SiteGrid& g, int x1, int n1, const char* who) {
    if (!g.contains(0, 0) || !g.contains(x1, n1))
        throw OutOfDomain(std::string(who) + ": grid does not cover the crossing set");
}

// Open sites in [a, b] on row n within distance R of some site in cur.
std::vector<int> step_row(const SiteGrid& g, const std::vector<int>& cur, int R, int a, int b, int n) {
    std::vector<int> diff(b - a + 2, 0);
    for (int x : cur) {
        long lo = std::max<long>(static_cast<long>(x) - R, a);
        long hi = std::min<long>(static_cast<long>(x) + R, b);
        if (lo > hi) continue;
        ++diff[lo - a];
        --diff[hi - a + 1];
    }
    std::vector<int> next;
    int run = 0;
    for (int y = a; y <= b; ++y) {
        run += diff[y - a];
        if (run > 0 && g.is_open(y, n)) next.push_back(y);
    }
    return next;
}

std::vector<int> open_row(const SiteGrid& g, int a, int b, int n) {
    std::vector<int> out;
    for (int x = a; x <= b; ++x)
        if (g.is_open(x, n)) out.push_back(x);
    return out;
}

}  // namespace

bool crosses_l_shape(const SiteGrid& g, int R, int l, int L) {
    if (R < 0 || l < 0 || L < 0) throw InvalidParameter("crosses_l_shape: negative size");
    const int E = l + L;
    require_block(g, E, E, "crosses_l_shape");
    // The two rectangles touch only at (l, L), so every crossing passes
    // through that site at row L.
    auto cur = open_row(g, 0, l, 0);
    for (int n = 0; n < L && !cur.empty(); ++n) cur = step_row(g, cur, R, 0, l, n + 1);
    if (!std::binary_search(cur.begin(), cur.end(), l)) return false;
    cur.assign(1, l);
    for (int n = L; n <= E; ++n) {
        if (cur.empty()) return false;
        if (cur.back() == E) return true;
        // A step overshooting x = E crosses the edge strictly before row n + 1.
        if (n < E && static_cast<long>(cur.back()) + R > E) return true;
        if (n == E) break;
        cur = step_row(g, cur, R, l, E, n + 1);
    }
    return false;
}

bool crossing_exists(const SiteGrid& g, int R, int k, int l0) {
    if (k < 0) throw InvalidParameter("crossing_exists: k must be >= 0");
    auto rows = detection_schedule(BigInt(l0), k);
    return crosses_l_shape(g, R, to_small(rows[k].l, "crossing_exists"), to_small(rows[k].L, "crossing_exists"));
}

bool vertical_crossing_exists(const SiteGrid& g, int R, int l, int L) {
    if (R < 0 || l < 0 || L < 0) throw InvalidParameter("vertical_crossing_exists: negative size");
    require_block(g, l, L, "vertical_crossing_exists");
    auto cur = open_row(g, 0, l, 0);
    for (int n = 0; n < L && !cur.empty(); ++n) cur = step_row(g, cur, R, 0, l, n + 1);
    return !cur.empty();
}

double j_event_probability(double lambda, double r) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParameter("j_event_probability: lambda must be positive");
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidParameter("j_event_probability: r must be >= 0");
    return -std::expm1(-2.0 * r * (lambda + 1.0));
}

McEstimate j_event_monte_carlo(double lambda, double r, std::size_t reps, const RunOptions& opt) {
    j_event_probability(lambda, r);
    SpaceTimeBox box{-r - 2.0, r + 2.0, 0.0, 2.0};
    auto vals = run_replicates<double>(reps, opt.workers, [&](std::size_t rep) {
        auto s = replicate_stream(opt, rep);
        auto env = sample_box_environment(s, lambda, box);
        auto h = evolve_particles(env);
        for (double p : h.configuration_at(1.0))
            if (std::abs(p) < r) return 1.0;
        for (const auto& c : env.clocks.points)
            if (std::abs(c.x) < r && c.t >= 1.0 && c.t < 2.0) return 1.0;
        return 0.0;
    });
    return mc_estimate(vals);
}

TriggerReport trigger_check(double lambda, double r, int l0, int k, std::size_t reps, const RunOptions& opt) {
    if (!(r > 0.0)) throw InvalidParameter("trigger_check: r must be positive");
    if (k < 0) throw InvalidParameter("trigger_check: k must be >= 0");
    auto rows = detection_schedule(BigInt(l0), k);
    TriggerReport rep;
    rep.k = k;
    rep.l = to_small(rows[k].l, "trigger_check");
    rep.L = to_small(rows[k].L, "trigger_check");
    rep.N = rep.L + rep.l + 1;
    SpaceTimeBox box{-r - 1.0, rep.l + r + 1.0, 0.0, rep.L + 1.0};
    auto vals = run_replicates<double>(reps, opt.workers, [&](std::size_t i) {
        auto s = replicate_stream(opt, i);
        auto env = sample_box_environment(s, lambda, box);
        auto h = evolve_particles(env);
        auto g = openness_grid(h, r, SiteWindow{0, rep.l, 0, rep.L});
        return vertical_crossing_exists(g, rep.N, rep.l, rep.L) ? 0.0 : 1.0;
    });
    rep.p_hat = mc_estimate(vals);
    if (k == 0) rep.p_hat.add_flag("L0-convention");
    rep.target = std::pow(static_cast<double>(rep.l), -4.0);
    rep.bound = (2.0 * rep.l + 1.0) *
                std::pow(1.0 - std::exp(-2.0 * r * (lambda + 1.0)), std::floor(rep.l / (2.0 * r)));
    return rep;
}

}  // namespace hpsim
