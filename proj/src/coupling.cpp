#include "hpsim/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "hpsim/error.hpp"

namespace hpsim {

BoxEnvironment CoupledEnvironments::lo() const {
    BoxEnvironment e;
    e.lambda = lambda_lo;
    e.box = box;
    e.sources = sources_lo;
    e.sinks = sinks_lo;
    e.clocks = clocks;
    return e;
}

BoxEnvironment CoupledEnvironments::hi() const {
    BoxEnvironment e;
    e.lambda = lambda_hi;
    e.box = box;
    e.sources = sources_hi;
    e.sinks = sinks_hi;
    e.clocks = clocks;
    return e;
}

namespace {

void check_densities(double lo, double hi, const char* who) {
    if (!(lo > 0.0) || !(hi > 0.0) || !std::isfinite(lo) || !std::isfinite(hi))
        throw InvalidParameter(std::string(who) + ": densities must be positive");
    if (!(lo < hi)) throw InvalidParameter(std::string(who) + ": need lambda_lo < lambda_hi");
}

PointSet1D thin(RandomStream& s, const PointSet1D& p, double keep) {
    PointSet1D out;
    out.window = p.window;
    for (double v : p.coords)
        if (s.uniform() < keep) out.coords.push_back(v);
    return out;
}

}  // namespace

CoupledEnvironments basic_couple(RandomStream& s, double lambda_lo, double lambda_hi, const SpaceTimeBox& box) {
    check_densities(lambda_lo, lambda_hi, "basic_couple");
    RandomStream lo_stream = s.child(0), hi_stream = s.child(1);
    auto lo = sample_box_environment(lo_stream, lambda_lo, box);
    auto hi = sample_box_environment(hi_stream, lambda_hi, box);
    CoupledEnvironments c;
    c.box = box;
    c.clocks = std::move(lo.clocks);
    c.lambda_lo = lambda_lo;
    c.lambda_hi = lambda_hi;
    c.sources_lo = std::move(lo.sources);
    c.sinks_lo = std::move(lo.sinks);
    c.sources_hi = std::move(hi.sources);
    c.sinks_hi = std::move(hi.sinks);
    return c;
}

CoupledEnvironments ordered_couple(RandomStream& s, double lambda_lo, double lambda_hi, const SpaceTimeBox& box) {
    check_densities(lambda_lo, lambda_hi, "ordered_couple");
    RandomStream base_stream = s.child(0), lo_stream = s.child(1), thin_stream = s.child(2);
    auto hi = sample_box_environment(base_stream, lambda_hi, box);
    auto lo = sample_box_environment(lo_stream, lambda_lo, box);
    CoupledEnvironments c;
    c.box = box;
    c.clocks = std::move(hi.clocks);
    c.lambda_lo = lambda_lo;
    c.lambda_hi = lambda_hi;
    const double keep = lambda_lo / lambda_hi;
    c.sources_hi = std::move(hi.sources);
    c.sources_lo = thin(thin_stream, c.sources_hi, keep);
    c.sinks_lo = std::move(lo.sinks);
    c.sinks_hi = thin(thin_stream, c.sinks_lo, keep);
    return c;
}

bool sorted_multiset_subset(std::span<const double> lo, std::span<const double> hi) {
    return std::includes(hi.begin(), hi.end(), lo.begin(), lo.end());
}

bool dominates_on(std::span<const double> lo, std::span<const double> hi, double a, double b) {
    auto cut = [a, b](std::span<const double> v) {
        auto first = std::upper_bound(v.begin(), v.end(), a);
        auto last = std::upper_bound(v.begin(), v.end(), b);
        return v.subspan(static_cast<std::size_t>(first - v.begin()), static_cast<std::size_t>(last - first));
    };
    // Every small interval around a low particle must hold a high particle
    // at the same place, so domination on all subintervals is containment.
    return sorted_multiset_subset(cut(lo), cut(hi));
}

CheckVerdict check_comparison_lemma(const CoupledEnvironments& c, double a, double b, double t) {
    if (a > b) throw InvalidParameter("check_comparison_lemma: need a <= b");
    if (a == b) return CheckVerdict::Verified;
    const auto lo = c.lo(), hi = c.hi();
    if (!in_box(c.box, a, t) || !in_box(c.box, b, t)) throw OutOfDomain("check_comparison_lemma: outside the box");
    double zb = exit_point(lo, b, t).z;
    double za = exit_point(hi, a, t).z;
    if (!(zb <= za)) return CheckVerdict::HypothesisNotMet;

    LppField flo(lo, true), fhi(hi, true);
    const auto plo = flo.profile(t), phi = fhi.profile(t);
    const std::int64_t base_diff = fhi.base(t) - flo.base(t);
    std::vector<double> pts{a};
    for (double p : plo)
        if (p > a && p <= b) pts.push_back(p);
    for (double p : phi)
        if (p > a && p <= b) pts.push_back(p);
    const int grid = 32;
    for (int i = 1; i <= grid; ++i) pts.push_back(a + (b - a) * i / grid);
    std::sort(pts.begin(), pts.end());
    auto count_le = [](const std::vector<double>& v, double x) {
        return static_cast<std::int64_t>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
    };
    std::int64_t prev = 0;
    bool first = true;
    for (double x : pts) {
        std::int64_t d = base_diff + count_le(phi, x) - count_le(plo, x);
        if (!first && d < prev) return CheckVerdict::Violation;
        prev = d;
        first = false;
    }
    return CheckVerdict::Verified;
}

double domination_time_threshold(const DominationParams& p) {
    double eps = 1.0 / (p.lambda * p.lambda) - 1.0 / (p.lambda_prime * p.lambda_prime);
    return 4.0 / eps * (p.b - p.a + p.s_len / (p.lambda * p.lambda));
}

namespace {

std::vector<double> window_of(const std::deque<double>& d, double a, double b) {
    auto first = std::upper_bound(d.begin(), d.end(), a);
    auto last = std::upper_bound(d.begin(), d.end(), b);
    return {first, last};
}

}  // namespace

McEstimate estimate_domination_event(const DominationParams& p, const RunOptions& opt) {
    if (!(p.lambda > 0.0) || !(p.lambda_prime > 0.0)) throw InvalidParameter("domination: densities must be positive");
    if (!(p.lambda < p.lambda_prime)) throw InvalidParameter("domination: need lambda < lambda_prime");
    if (!(p.a < p.b)) throw InvalidParameter("domination: need a < b");
    if (!(p.t >= 0.0) || !(p.s_len >= 0.0)) throw InvalidParameter("domination: t and s_len must be >= 0");
    if (p.reps < 2) throw InvalidParameter("domination: reps must be >= 2");
    const double inv2 = 1.0 / (p.lambda * p.lambda);
    const double horizon = p.t + p.s_len;
    const double x0 = p.a - 1.5 * horizon * inv2 - 10.0;
    const SpaceTimeBox box{x0, p.b, 0.0, horizon};

    struct Rep {
        double hit = 0.0;
        bool contaminated = false;
    };
    auto reps = run_replicates<Rep>(p.reps, opt.workers, [&](std::size_t r) {
        RandomStream rs = replicate_stream(opt, r);
        auto c = basic_couple(rs, p.lambda, p.lambda_prime, box);
        auto lo = c.lo(), hi = c.hi();
        auto hlo = evolve_particles(lo), hhi = evolve_particles(hi);
        Rep out;
        out.contaminated = exit_point(lo, p.a, horizon).z <= 0.0 || exit_point(hi, p.a, horizon).z <= 0.0;
        HistoryCursor clo(hlo), chi(hhi);
        clo.advance_to(p.t);
        chi.advance_to(p.t);
        auto ok = [&] {
            auto l = window_of(clo.positions(), p.a, p.b);
            auto h = window_of(chi.positions(), p.a, p.b);
            return dominates_on(l, h, p.a, p.b);
        };
        bool good = ok();
        while (good) {
            double next = horizon + 1.0;
            if (clo.next_event() < hlo.events.size()) next = std::min(next, hlo.events[clo.next_event()].time);
            if (chi.next_event() < hhi.events.size()) next = std::min(next, hhi.events[chi.next_event()].time);
            if (next > horizon) break;
            clo.advance_to(next);
            chi.advance_to(next);
            good = ok();
        }
        out.hit = good ? 1.0 : 0.0;
        return out;
    });
    std::vector<double> hits(reps.size());
    std::size_t contaminated = 0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        hits[i] = reps[i].hit;
        if (reps[i].contaminated) ++contaminated;
    }
    auto est = mc_estimate(hits);
    const double eps = inv2 - 1.0 / (p.lambda_prime * p.lambda_prime);
    if (!(eps > 0.0 && eps < 1.5 / (p.lambda_prime * p.lambda_prime))) est.add_flag("epsilon-out-of-range");
    if (p.t <= domination_time_threshold(p)) est.add_flag("below-threshold");
    if (contaminated > 0) est.add_flag("boundary-contaminated");
    return est;
}

const char* to_string(FunctionKind k) {
    switch (k) {
        case FunctionKind::AtLeast: return "at-least";
        case FunctionKind::AtMost: return "at-most";
        case FunctionKind::MaxOverWindow: return "max-over-window";
    }
    return "?";
}

const char* to_string(Direction d) {
    return d == Direction::NonDecreasing ? "non-decreasing" : "non-increasing";
}

Direction natural_direction(FunctionKind k) {
    return k == FunctionKind::AtMost ? Direction::NonIncreasing : Direction::NonDecreasing;
}

void validate_function(const MonotoneFunctionSpec& f, const SpaceTimeBox& support_box) {
    if (f.direction != natural_direction(f.kind))
        throw InvalidConfiguration(std::string("function kind ") + to_string(f.kind) + " is not " +
                                   to_string(f.direction));
    if (!(f.lo <= f.hi) || !(f.t_lo <= f.t_hi)) throw InvalidConfiguration("function support is malformed");
    if (f.lo < support_box.x0 || f.hi > support_box.x1 || f.t_lo < support_box.t0 || f.t_hi > support_box.t1)
        throw InvalidConfiguration("function support is not inside its box");
    if (f.kind == FunctionKind::MaxOverWindow && !(f.threshold > 0.0))
        throw InvalidConfiguration("max-over-window needs a positive threshold");
}

double evaluate_function(const MonotoneFunctionSpec& f, const ParticleHistory& h) {
    HistoryCursor cur(h);
    cur.advance_to(f.t_lo);
    auto count = [&] {
        const auto& pos = cur.positions();
        return static_cast<double>(std::upper_bound(pos.begin(), pos.end(), f.hi) -
                                   std::upper_bound(pos.begin(), pos.end(), f.lo));
    };
    double mx = count();
    bool any_ge = mx >= f.threshold;
    bool all_le = mx <= f.threshold;
    while (cur.next_event() < h.events.size()) {
        double next = h.events[cur.next_event()].time;
        if (next > f.t_hi) break;
        cur.advance_to(next);
        double c = count();
        mx = std::max(mx, c);
        any_ge = any_ge || c >= f.threshold;
        all_le = all_le && c <= f.threshold;
    }
    switch (f.kind) {
        case FunctionKind::AtLeast: return any_ge ? 1.0 : 0.0;
        case FunctionKind::AtMost: return all_le ? 1.0 : 0.0;
        case FunctionKind::MaxOverWindow: return std::min(1.0, mx / f.threshold);
    }
    return 0.0;
}

double box_distance(const SpaceTimeBox& a, const SpaceTimeBox& b) {
    double dh = std::max(0.0, std::max(a.x0, b.x0) - std::min(a.x1, b.x1));
    double dv = std::max(0.0, std::max(a.t0, b.t0) - std::min(a.t1, b.t1));
    return dh + dv;
}

double box_perimeter(const SpaceTimeBox& b) {
    return b.width() + b.height();
}

DecouplingReport make_decoupling_report(std::span<const double> joint, std::span<const double> f1,
                                        std::span<const double> f2) {
    auto e = mc_estimate(joint), e1 = mc_estimate(f1), e2 = mc_estimate(f2);
    DecouplingReport r;
    r.reps = joint.size();
    r.lhs = e.mean;
    r.lhs_se = e.std_error;
    r.f1_mean = e1.mean;
    r.f1_se = e1.std_error;
    r.f2_mean = e2.mean;
    r.f2_se = e2.std_error;
    r.rhs = e1.mean * e2.mean;
    double a = e2.mean * e1.std_error, b = e1.mean * e2.std_error;
    r.combined_se = std::sqrt(e.std_error * e.std_error + a * a + b * b);
    r.slack = 2.0 * r.combined_se;
    r.pass = r.lhs <= r.rhs + r.slack;
    return r;
}

DecouplingReport decoupling_check(const MonotoneFunctionSpec& f1, const MonotoneFunctionSpec& f2,
                                  const SpaceTimeBox& b1, const SpaceTimeBox& b2, double lambda,
                                  double lambda_prime, std::size_t reps, const RunOptions& opt) {
    if (!(lambda > 0.0) || !(lambda_prime > 0.0)) throw InvalidParameter("decoupling_check: densities must be positive");
    if (reps < 2) throw InvalidParameter("decoupling_check: reps must be >= 2");
    validate_box(b1);
    validate_box(b2);
    validate_function(f1, b1);
    validate_function(f2, b2);
    if (f1.direction != f2.direction) throw InvalidConfiguration("decoupling_check: functions have different directions");
    if (f1.direction == Direction::NonDecreasing && !(lambda < lambda_prime))
        throw InvalidConfiguration("decoupling_check: non-decreasing functions need lambda < lambda_prime");
    if (f1.direction == Direction::NonIncreasing && !(lambda_prime < lambda))
        throw InvalidConfiguration("decoupling_check: non-increasing functions need lambda_prime < lambda");

    const SpaceTimeBox joint_box{std::min(b1.x0, b2.x0), std::max(b1.x1, b2.x1), std::min(b1.t0, b2.t0),
                                 std::max(b1.t1, b2.t1)};
    struct Rep {
        double joint = 0, g1 = 0, g2 = 0;
    };
    auto out = run_replicates<Rep>(reps, opt.workers, [&](std::size_t r) {
        RandomStream rs = replicate_stream(opt, r);
        RandomStream s_joint = rs.child(0), s1 = rs.child(1), s2 = rs.child(2);
        Rep o;
        auto hj = evolve_particles(sample_box_environment(s_joint, lambda, joint_box));
        o.joint = evaluate_function(f1, hj) * evaluate_function(f2, hj);
        o.g1 = evaluate_function(f1, evolve_particles(sample_box_environment(s1, lambda, b1)));
        o.g2 = evaluate_function(f2, evolve_particles(sample_box_environment(s2, lambda_prime, b2)));
        return o;
    });
    std::vector<double> j(reps), g1(reps), g2(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        j[i] = out[i].joint;
        g1[i] = out[i].g1;
        g2[i] = out[i].g2;
    }
    auto rep = make_decoupling_report(j, g1, g2);
    rep.epsilon = std::fabs(1.0 / (lambda * lambda) - 1.0 / (lambda_prime * lambda_prime));
    rep.distance = box_distance(b1, b2);
    rep.perimeter1 = box_perimeter(b1);
    rep.perimeter2 = box_perimeter(b2);
    return rep;
}

std::string report_json(const DecouplingReport& r) {
    nlohmann::ordered_json j;
    j["lhs"] = r.lhs;
    j["lhs_se"] = r.lhs_se;
    j["f1_mean"] = r.f1_mean;
    j["f1_se"] = r.f1_se;
    j["f2_mean"] = r.f2_mean;
    j["f2_se"] = r.f2_se;
    j["rhs"] = r.rhs;
    j["combined_se"] = r.combined_se;
    j["slack"] = r.slack;
    j["epsilon"] = r.epsilon;
    j["distance"] = r.distance;
    j["perimeter1"] = r.perimeter1;
    j["perimeter2"] = r.perimeter2;
    j["reps"] = r.reps;
    j["verdict"] = r.pass ? "pass" : "fail";
    return j.dump();
}

}  // namespace hpsim
