#include "hpsim/hammersley.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <json.hpp>

#include "hpsim/error.hpp"

namespace hpsim {

void validate_box(const SpaceTimeBox& box) {
    if (!std::isfinite(box.x0) || !std::isfinite(box.x1) || !std::isfinite(box.t0) || !std::isfinite(box.t1))
        throw InvalidParameter("box coordinates must be finite");
    if (box.x1 < box.x0 || box.t1 < box.t0) throw InvalidParameter("box must satisfy x0 <= x1 and t0 <= t1");
}

bool in_box(const SpaceTimeBox& box, double x, double t) {
    return x >= box.x0 && x <= box.x1 && t >= box.t0 && t <= box.t1;
}

namespace {

void drop_edges_1d(PointSet1D& p) {
    auto& c = p.coords;
    c.erase(std::remove_if(c.begin(), c.end(), [&](double v) { return v <= p.window.lo || v >= p.window.hi; }),
            c.end());
}

void drop_edges_2d(PointSet2D& p) {
    const Rect& w = p.window;
    auto& c = p.points;
    c.erase(std::remove_if(c.begin(), c.end(),
                           [&](const Point2& q) { return q.x <= w.x0 || q.x >= w.x1 || q.t <= w.t0 || q.t >= w.t1; }),
            c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
}

}  // namespace

BoxEnvironment sample_box_environment(RandomStream& s, double lambda, const SpaceTimeBox& box) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParameter("sample_box_environment: lambda must be > 0");
    validate_box(box);
    BoxEnvironment env;
    env.lambda = lambda;
    env.box = box;
    RandomStream src = s.child(0), snk = s.child(1), clk = s.child(2);
    env.sources = sample_ppp_1d(src, lambda, {box.x0, box.x1});
    env.sinks = sample_ppp_1d(snk, 1.0 / lambda, {box.t0, box.t1});
    env.clocks = sample_ppp_2d(clk, 1.0, box);
    // Rounding can put a coordinate exactly on an edge; the model needs them open.
    drop_edges_1d(env.sources);
    drop_edges_1d(env.sinks);
    drop_edges_2d(env.clocks);
    return env;
}

BoxEnvironment with_boundary(const BoxEnvironment& env, double lambda, PointSet1D sources, PointSet1D sinks) {
    BoxEnvironment out;
    out.lambda = lambda;
    out.box = env.box;
    out.sources = std::move(sources);
    out.sinks = std::move(sinks);
    out.clocks = env.clocks;
    return out;
}

std::string dump_environment(const BoxEnvironment& env) {
    nlohmann::json j;
    j["lambda"] = env.lambda;
    j["box"] = {{"x0", env.box.x0}, {"x1", env.box.x1}, {"t0", env.box.t0}, {"t1", env.box.t1}};
    j["sources"] = env.sources.coords;
    j["sinks"] = env.sinks.coords;
    nlohmann::json clocks = nlohmann::json::array();
    for (const auto& p : env.clocks.points) clocks.push_back({p.x, p.t});
    j["clocks"] = std::move(clocks);
    return j.dump();
}

BoxEnvironment load_environment(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfiguration(std::string("environment JSON: ") + e.what());
    }
    try {
        BoxEnvironment env;
        env.lambda = j.at("lambda").get<double>();
        const auto& b = j.at("box");
        env.box = {b.at("x0").get<double>(), b.at("x1").get<double>(), b.at("t0").get<double>(),
                   b.at("t1").get<double>()};
        validate_box(env.box);
        if (!(env.lambda > 0.0)) throw InvalidParameter("environment: lambda must be > 0");
        env.sources = {j.at("sources").get<std::vector<double>>(), {env.box.x0, env.box.x1}};
        env.sinks = {j.at("sinks").get<std::vector<double>>(), {env.box.t0, env.box.t1}};
        env.clocks.window = env.box;
        for (const auto& p : j.at("clocks")) {
            if (!p.is_array() || p.size() != 2) throw InvalidConfiguration("environment: clock must be [x, t]");
            env.clocks.points.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        std::sort(env.sources.coords.begin(), env.sources.coords.end());
        std::sort(env.sinks.coords.begin(), env.sinks.coords.end());
        std::sort(env.clocks.points.begin(), env.clocks.points.end(), [](const Point2& p, const Point2& q) {
            return p.x < q.x || (p.x == q.x && p.t < q.t);
        });
        for (double v : env.sources.coords)
            if (!(v > env.box.x0 && v < env.box.x1)) throw InvalidConfiguration("environment: source outside (x0, x1)");
        for (double v : env.sinks.coords)
            if (!(v > env.box.t0 && v < env.box.t1)) throw InvalidConfiguration("environment: sink outside (t0, t1)");
        for (const auto& p : env.clocks.points)
            if (!(p.x > env.box.x0 && p.x < env.box.x1 && p.t > env.box.t0 && p.t < env.box.t1))
                throw InvalidConfiguration("environment: clock outside the open box");
        return env;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfiguration(std::string("environment JSON: ") + e.what());
    }
}

std::size_t lis_count(const PointSet2D& points, const SpaceTimeBox& rect) {
    std::vector<Point2> pts;
    for (const auto& p : points.points)
        if (p.x > rect.x0 && p.x <= rect.x1 && p.t > rect.t0 && p.t <= rect.t1) pts.push_back(p);
    // Equal x sorted by decreasing t so that they cannot chain.
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x < b.x || (a.x == b.x && a.t > b.t);
    });
    std::vector<double> tails;
    for (const auto& p : pts) {
        auto it = std::lower_bound(tails.begin(), tails.end(), p.t);
        if (it == tails.end())
            tails.push_back(p.t);
        else
            *it = p.t;
    }
    return tails.size();
}

// The marks are laid out in one sequence so that admissible paths are exactly
// the subsequences whose (key_major, key_minor) strictly increase:
//   sinks first (x = x0), keys (tau, rank)
//   then by x; at equal x, clocks by decreasing t before sources
//   clocks keyed (t, 0), sources keyed (t0, rank).
LppField::LppField(BoxEnvironment env, bool use_sinks) : env_(std::move(env)), use_sinks_(use_sinks) {
    validate_box(env_.box);
    const auto& box = env_.box;
    if (use_sinks_) {
        const auto& s = env_.sinks.coords;
        for (std::size_t i = 0; i < s.size(); ++i) order_.push_back({box.x0, s[i], static_cast<double>(i)});
    }
    struct Item {
        double x, t;
        int kind;  // 0 clock, 1 source
        double minor;
    };
    std::vector<Item> items;
    for (const auto& p : env_.clocks.points) items.push_back({p.x, p.t, 0, 0.0});
    const auto& src = env_.sources.coords;
    for (std::size_t i = 0; i < src.size(); ++i) items.push_back({src[i], box.t0, 1, static_cast<double>(i)});
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.x != b.x) return a.x < b.x;
        if (a.kind != b.kind) return a.kind < b.kind;
        if (a.kind == 0) return a.t > b.t;
        return a.minor < b.minor;
    });
    for (const auto& it : items) order_.push_back({it.x, it.t, it.minor});
}

namespace {

using Key = std::pair<double, double>;

}  // namespace

std::int64_t LppField::value(double x, double t) const {
    if (!in_box(env_.box, x, t)) throw OutOfDomain("LppField::value: query outside the box");
    std::vector<Key> tails;
    for (const auto& m : order_) {
        if (m.x > x) break;
        if (m.key_major > t) continue;
        Key k{m.key_major, m.key_minor};
        auto it = std::lower_bound(tails.begin(), tails.end(), k);
        if (it == tails.end())
            tails.push_back(k);
        else
            *it = k;
    }
    return static_cast<std::int64_t>(tails.size());
}

std::int64_t LppField::base(double t) const {
    if (t < env_.box.t0 || t > env_.box.t1) throw OutOfDomain("LppField::base: time outside the box");
    if (!use_sinks_) return 0;
    const auto& s = env_.sinks.coords;
    return static_cast<std::int64_t>(std::upper_bound(s.begin(), s.end(), t) - s.begin());
}

std::vector<double> LppField::profile(double t) const {
    if (t < env_.box.t0 || t > env_.box.t1) throw OutOfDomain("LppField::profile: time outside the box");
    std::vector<Key> tails;
    std::vector<double> jumps;
    std::size_t i = 0;
    const double x0 = env_.box.x0;
    std::size_t before = 0;
    while (i < order_.size()) {
        double gx = order_[i].x;
        std::size_t j = i;
        while (j < order_.size() && order_[j].x == gx) {
            const auto& m = order_[j++];
            if (m.key_major > t) continue;
            Key k{m.key_major, m.key_minor};
            auto it = std::lower_bound(tails.begin(), tails.end(), k);
            if (it == tails.end())
                tails.push_back(k);
            else
                *it = k;
        }
        if (gx > x0)
            for (std::size_t c = before; c < tails.size(); ++c) jumps.push_back(gx);
        before = tails.size();
        i = j;
    }
    return jumps;
}

LppField lpp_field(const BoxEnvironment& env, bool use_sinks) {
    return LppField(env, use_sinks);
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::BulkJump: return "bulk-jump";
        case EventKind::RightEntry: return "right-entry";
        case EventKind::LeftExit: return "left-exit";
        case EventKind::UnusedSink: return "unused-sink";
    }
    return "?";
}

void apply_event(std::deque<double>& config, const ParticleEvent& e) {
    switch (e.kind) {
        case EventKind::BulkJump: config[static_cast<std::size_t>(e.index)] = e.to; break;
        case EventKind::RightEntry: config.push_back(e.to); break;
        case EventKind::LeftExit: config.pop_front(); break;
        case EventKind::UnusedSink: break;
    }
}

ParticleHistory evolve_particles(const BoxEnvironment& env) {
    validate_box(env.box);
    ParticleHistory h;
    h.box = env.box;
    h.initial = env.sources.coords;
    std::deque<double> config(h.initial.begin(), h.initial.end());

    // Simultaneous clocks are handled right to left so that they cannot chain.
    std::vector<Point2> clocks = env.clocks.points;
    std::sort(clocks.begin(), clocks.end(), [](const Point2& a, const Point2& b) {
        return a.t < b.t || (a.t == b.t && a.x > b.x);
    });
    const auto& sinks = env.sinks.coords;
    h.events.reserve(clocks.size() + sinks.size());
    std::size_t ic = 0, is = 0;
    while (ic < clocks.size() || is < sinks.size()) {
        bool take_clock = is >= sinks.size() || (ic < clocks.size() && clocks[ic].t <= sinks[is]);
        ParticleEvent e;
        if (take_clock) {
            const Point2& c = clocks[ic++];
            e.time = c.t;
            e.to = c.x;
            auto it = std::lower_bound(config.begin(), config.end(), c.x);
            if (it == config.end()) {
                e.kind = EventKind::RightEntry;
                e.index = static_cast<std::int64_t>(config.size());
                e.from = env.box.x1;
            } else {
                e.kind = EventKind::BulkJump;
                e.index = it - config.begin();
                e.from = *it;
            }
        } else {
            e.time = sinks[is++];
            e.to = env.box.x0;
            if (config.empty()) {
                e.kind = EventKind::UnusedSink;
                e.from = env.box.x0;
            } else {
                e.kind = EventKind::LeftExit;
                e.index = 0;
                e.from = config.front();
            }
        }
        apply_event(config, e);
        h.events.push_back(e);
    }
    return h;
}

std::vector<double> ParticleHistory::configuration_at(double t) const {
    if (t < box.t0 || t > box.t1) throw OutOfDomain("ParticleHistory: time outside the box");
    std::deque<double> config(initial.begin(), initial.end());
    for (const auto& e : events) {
        if (e.time > t) break;
        apply_event(config, e);
    }
    return {config.begin(), config.end()};
}

std::size_t ParticleHistory::count(double a, double b, double t) const {
    if (a > b || a < box.x0 || b > box.x1) throw OutOfDomain("ParticleHistory::count: interval outside the box");
    auto c = configuration_at(t);
    return static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), b) - std::upper_bound(c.begin(), c.end(), a));
}

HistoryCursor::HistoryCursor(const ParticleHistory& h)
    : h_(&h), pos_(h.initial.begin(), h.initial.end()), time_(h.box.t0) {}

void HistoryCursor::advance_to(double t) {
    if (t < time_) throw InvalidParameter("HistoryCursor: time went backwards");
    while (next_ < h_->events.size() && h_->events[next_].time <= t) apply_event(pos_, h_->events[next_++]);
    time_ = t;
}

std::int64_t measure_query(const LppField& f, double a, double b, double t) {
    const auto& box = f.environment().box;
    if (a > b || a < box.x0 || b > box.x1 || t < box.t0 || t > box.t1)
        throw OutOfDomain("measure_query: query outside the box");
    return f.value(b, t) - f.value(a, t);
}

std::int64_t measure_query(const ParticleHistory& h, double a, double b, double t) {
    if (t < h.box.t0 || t > h.box.t1) throw OutOfDomain("measure_query: time outside the box");
    return static_cast<std::int64_t>(h.count(a, b, t));
}

ExitPointRecord exit_point(const BoxEnvironment& env, double x, double t, bool use_sinks) {
    validate_box(env.box);
    if (!in_box(env.box, x, t)) throw OutOfDomain("exit_point: query outside the box");
    const auto& box = env.box;

    // Clocks in the query rectangle, in the chain order: x ascending,
    // equal x by decreasing t.
    std::vector<Point2> q;
    for (const auto& p : env.clocks.points)
        if (p.x <= x && p.t <= t) q.push_back(p);
    std::sort(q.begin(), q.end(), [](const Point2& a, const Point2& b) {
        return a.x < b.x || (a.x == b.x && a.t > b.t);
    });
    // up[i]: longest chain in the rectangle starting at q[i].
    std::vector<std::int64_t> up(q.size());
    {
        std::vector<double> tails;  // patience piles on -t, scanning backwards
        for (std::size_t r = q.size(); r-- > 0;) {
            double k = -q[r].t;
            auto it = std::lower_bound(tails.begin(), tails.end(), k);
            up[r] = (it - tails.begin()) + 1;
            if (it == tails.end())
                tails.push_back(k);
            else
                *it = k;
        }
    }

    std::int64_t best_src = -1;
    double z_src = 0.0;
    if (x > box.x0) {
        // suffix max of up over q sorted by x
        std::vector<std::int64_t> suf(q.size() + 1, 0);
        for (std::size_t r = q.size(); r-- > 0;) suf[r] = std::max(suf[r + 1], up[r]);
        std::vector<double> brk;
        for (double s : env.sources.coords)
            if (s > box.x0 && s <= x) brk.push_back(s);
        std::vector<double> src_pos = brk;
        for (const auto& p : q) brk.push_back(p.x);
        std::sort(brk.begin(), brk.end());
        brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
        auto value_at = [&](double left) {
            std::int64_t cnt = std::upper_bound(src_pos.begin(), src_pos.end(), left) - src_pos.begin();
            // first clock with p.x > left
            auto it = std::upper_bound(q.begin(), q.end(), left, [](double v, const Point2& p) { return v < p.x; });
            return cnt + suf[static_cast<std::size_t>(it - q.begin())];
        };
        // intervals: (x0, brk[0]), [brk[k], brk[k+1]), [brk.back(), x]
        std::vector<double> lefts;
        std::vector<double> rights;
        if (brk.empty() || brk.front() > box.x0) {
            lefts.push_back(box.x0);
            rights.push_back(brk.empty() ? x : brk.front());
        }
        for (std::size_t k = 0; k < brk.size(); ++k) {
            lefts.push_back(brk[k]);
            rights.push_back(k + 1 < brk.size() ? brk[k + 1] : x);
        }
        for (std::size_t k = 0; k < lefts.size(); ++k) {
            std::int64_t v = value_at(lefts[k]);
            if (v >= best_src) {
                best_src = v;
                z_src = rights[k] - box.x0;
            }
        }
    }

    std::int64_t best_snk = -1;
    double z_snk = 0.0;
    {
        std::vector<double> ts;
        for (const auto& p : q) ts.push_back(p.t);
        std::sort(ts.begin(), ts.end());
        // suffix max of up over clocks sorted by t
        std::vector<std::size_t> idx(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return q[a].t < q[b].t; });
        std::vector<std::int64_t> suf(q.size() + 1, 0);
        for (std::size_t r = idx.size(); r-- > 0;) suf[r] = std::max(suf[r + 1], up[idx[r]]);
        std::vector<double> snk;
        if (use_sinks)
            for (double s : env.sinks.coords)
                if (s > box.t0 && s <= t) snk.push_back(s);
        std::vector<double> brk = snk;
        brk.insert(brk.end(), ts.begin(), ts.end());
        brk.push_back(box.t0);
        std::sort(brk.begin(), brk.end());
        brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
        for (double left : brk) {
            std::int64_t cnt = std::upper_bound(snk.begin(), snk.end(), left) - snk.begin();
            std::size_t first = std::upper_bound(ts.begin(), ts.end(), left) - ts.begin();
            std::int64_t v = cnt + suf[first];
            if (v > best_snk) {
                best_snk = v;
                z_snk = box.t0 - left;
            }
        }
    }

    ExitPointRecord rec;
    if (best_src >= 0 && best_src >= best_snk) {
        rec.z = z_src;
        rec.value = best_src;
    } else {
        rec.z = z_snk == 0.0 ? 0.0 : z_snk;
        rec.value = best_snk;
    }
    return rec;
}

std::size_t flux_count(const ParticleHistory& h, double a, double t1, double t2) {
    if (a < h.box.x0 || a > h.box.x1 || t1 > t2 || t1 < h.box.t0 || t2 > h.box.t1)
        throw OutOfDomain("flux_count: segment outside the box");
    std::size_t n = 0;
    for (const auto& e : h.events) {
        if (e.time <= t1 || e.time > t2) continue;
        if ((e.kind == EventKind::BulkJump || e.kind == EventKind::RightEntry) && e.to <= a && e.from > a) ++n;
        if (e.kind == EventKind::LeftExit && a == h.box.x0) ++n;
    }
    return n;
}

ExitSample sample_exit_positions(double lambda, const SpaceTimeBox& box, double x, double t, std::size_t reps,
                                 const RunOptions& opt) {
    auto zs = run_replicates<double>(reps, opt.workers, [&](std::size_t rep) {
        auto s = replicate_stream(opt, rep);
        return exit_point(sample_box_environment(s, lambda, box), x, t).z;
    });
    ExitSample out;
    for (double z : zs) {
        if (z > 0.0)
            out.positions.push_back(box.x0 + z);
        else
            ++out.sink_exits;
    }
    return out;
}

const char* to_string(CheckVerdict v) {
    switch (v) {
        case CheckVerdict::HypothesisNotMet: return "hypothesis-not-met";
        case CheckVerdict::Verified: return "verified";
        case CheckVerdict::Violation: return "VIOLATION";
    }
    return "?";
}

CheckVerdict check_no_sinks_restriction(const BoxEnvironment& env, double xc, double tc,
                                        std::span<const Point2> queries) {
    if (exit_point(env, xc, tc, true).z < 0.0) return CheckVerdict::HypothesisNotMet;
    LppField with(env, true), without(env, false);
    for (const auto& p : queries) {
        if (p.x < xc || p.t > tc) continue;
        if (with.value(p.x, p.t) != without.value(p.x, p.t)) return CheckVerdict::Violation;
    }
    return CheckVerdict::Verified;
}

}  // namespace hpsim
