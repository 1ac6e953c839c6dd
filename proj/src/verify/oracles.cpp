#include "hpsim/verify/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include "hpsim/error.hpp"

namespace hpsim::oracle {

namespace {

bool is_chain(const std::vector<Point2>& sel) {
    for (std::size_t i = 0; i < sel.size(); ++i)
        for (std::size_t j = 0; j < sel.size(); ++j) {
            if (i == j) continue;
            const auto& a = sel[i];
            const auto& b = sel[j];
            bool ab = a.x < b.x && a.t < b.t;
            bool ba = b.x < a.x && b.t < a.t;
            if (!ab && !ba) return false;
        }
    return true;
}

std::vector<std::vector<Point2>> all_chains(const std::vector<Point2>& pts) {
    if (pts.size() > 20) throw InvalidParameter("oracle: too many points for subset enumeration");
    std::vector<std::vector<Point2>> out;
    const std::uint32_t n = static_cast<std::uint32_t>(pts.size());
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<Point2> sel;
        for (std::uint32_t i = 0; i < n; ++i)
            if (mask & (1u << i)) sel.push_back(pts[i]);
        if (is_chain(sel)) out.push_back(std::move(sel));
    }
    return out;
}

std::size_t longest_in(const std::vector<Point2>& pts, double xlo, double tlo, double x, double t) {
    std::vector<Point2> in;
    for (const auto& p : pts)
        if (p.x > xlo && p.x <= x && p.t > tlo && p.t <= t) in.push_back(p);
    return lis_subsets(in);
}

}  // namespace

std::size_t lis_subsets(const std::vector<Point2>& pts) {
    std::size_t best = 0;
    for (const auto& c : all_chains(pts)) best = std::max(best, c.size());
    return best;
}

std::int64_t lpp_value(const BoxEnvironment& env, double x, double t, bool use_sinks) {
    std::vector<Point2> in;
    for (const auto& p : env.clocks.points)
        if (p.x <= x && p.t <= t) in.push_back(p);
    std::int64_t best = 0;
    for (const auto& chain : all_chains(in)) {
        double fx = x, ft = t;
        bool strict = false;
        if (!chain.empty()) {
            auto first = *std::min_element(chain.begin(), chain.end(),
                                           [](const Point2& a, const Point2& b) { return a.x < b.x; });
            fx = first.x;
            ft = first.t;
            strict = true;
        }
        std::int64_t src = 0, snk = 0;
        for (double s : env.sources.coords)
            if (strict ? s < fx : s <= fx) ++src;
        if (use_sinks)
            for (double s : env.sinks.coords)
                if (strict ? s < ft : s <= ft) ++snk;
        best = std::max<std::int64_t>(best, static_cast<std::int64_t>(chain.size()) + std::max(src, snk));
    }
    return best;
}

ExitPointRecord exit_point(const BoxEnvironment& env, double x, double t, bool use_sinks) {
    const auto& box = env.box;
    const auto& clocks = env.clocks.points;
    // Source side: z in (0, x - x0], evaluated in absolute coordinates.
    std::vector<double> cand_src;
    std::vector<bool> cand_mid;
    if (x > box.x0) {
        std::vector<double> brk;
        for (double s : env.sources.coords)
            if (s <= x) brk.push_back(s);
        for (const auto& p : clocks)
            if (p.x <= x && p.t <= t) brk.push_back(p.x);
        brk.push_back(x);
        std::sort(brk.begin(), brk.end());
        brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
        double prev = box.x0;
        for (double b : brk) {
            if (b > prev) {
                cand_src.push_back(0.5 * (prev + b));
                cand_mid.push_back(true);
            }
            cand_src.push_back(b);
            cand_mid.push_back(false);
            prev = b;
        }
    }
    auto src_value = [&](double zabs) {
        std::int64_t cnt = 0;
        for (double s : env.sources.coords)
            if (s > box.x0 && s <= zabs) ++cnt;
        return cnt + static_cast<std::int64_t>(longest_in(clocks, zabs, box.t0, x, t));
    };
    std::int64_t best_src = -1;
    std::size_t arg_src = 0;
    for (std::size_t i = 0; i < cand_src.size(); ++i) {
        auto v = src_value(cand_src[i]);
        if (v >= best_src) {
            best_src = v;
            arg_src = i;
        }
    }

    // Sink side: u in [0, t - t0].
    std::vector<double> cand_snk{box.t0};
    {
        std::vector<double> brk;
        if (use_sinks)
            for (double s : env.sinks.coords)
                if (s <= t) brk.push_back(s);
        for (const auto& p : clocks)
            if (p.x <= x && p.t <= t) brk.push_back(p.t);
        brk.push_back(t);
        std::sort(brk.begin(), brk.end());
        brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
        double prev = box.t0;
        for (double b : brk) {
            if (b > prev) {
                cand_snk.push_back(0.5 * (prev + b));
                cand_snk.push_back(b);
            }
            prev = b;
        }
    }
    auto snk_value = [&](double uabs) {
        std::int64_t cnt = 0;
        if (use_sinks)
            for (double s : env.sinks.coords)
                if (s > box.t0 && s <= uabs) ++cnt;
        return cnt + static_cast<std::int64_t>(longest_in(clocks, box.x0, uabs, x, t));
    };
    std::int64_t best_snk = -1;
    double u_best = box.t0;
    for (double u : cand_snk) {
        auto v = snk_value(u);
        if (v > best_snk) {
            best_snk = v;
            u_best = u;
        }
    }

    ExitPointRecord rec;
    if (best_src >= 0 && best_src >= best_snk) {
        rec.value = best_src;
        // A maximizing gap midpoint means the supremum is the next breakpoint.
        double zabs = cand_mid[arg_src] ? cand_src[arg_src + 1] : cand_src[arg_src];
        rec.z = zabs - box.x0;
    } else {
        rec.value = best_snk;
        rec.z = box.t0 - u_best;
        if (rec.z == 0.0) rec.z = 0.0;
    }
    return rec;
}

std::vector<double> particles_at(const BoxEnvironment& env, double t) {
    std::vector<double> parts = env.sources.coords;
    struct Mark {
        double t, x;
        bool sink;
    };
    std::vector<Mark> marks;
    for (const auto& p : env.clocks.points)
        if (p.t <= t) marks.push_back({p.t, p.x, false});
    for (double s : env.sinks.coords)
        if (s <= t) marks.push_back({s, env.box.x0, true});
    std::sort(marks.begin(), marks.end(), [](const Mark& a, const Mark& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.sink != b.sink) return !a.sink;
        return a.x > b.x;
    });
    for (const auto& m : marks) {
        if (m.sink) {
            if (parts.empty()) continue;
            auto it = std::min_element(parts.begin(), parts.end());
            parts.erase(it);
            continue;
        }
        // nearest particle at or to the right of the clock
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = parts.size();
        for (std::size_t i = 0; i < parts.size(); ++i)
            if (parts[i] >= m.x && parts[i] < best) {
                best = parts[i];
                arg = i;
            }
        if (arg == parts.size())
            parts.push_back(m.x);
        else
            parts[arg] = m.x;
    }
    std::sort(parts.begin(), parts.end());
    return parts;
}

double chernoff_h_quadrature(double x) {
    auto f = [x](double s) { return 2.0 * (1.0 - s) / (1.0 + s * x); };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-15, &err);
}

double poisson_tail_highprec(double lambda, double x, TailSide side) {
    using boost::multiprecision::cpp_dec_float_50;
    const cpp_dec_float_50 lam(lambda);
    // pmf(k) built up from pmf(0) = e^-lambda by exact recurrence.
    cpp_dec_float_50 term = exp(-lam);
    cpp_dec_float_50 total = 0;
    if (side == TailSide::Upper) {
        const double thr = std::ceil(lambda + x);
        // P[N >= thr] = 1 - P[N <= thr - 1]
        cpp_dec_float_50 below = 0;
        for (std::int64_t k = 0; static_cast<double>(k) < thr; ++k) {
            below += term;
            term *= lam / (k + 1);
        }
        total = 1 - below;
    } else {
        const double thr = std::floor(lambda - x);
        if (thr < 0) return 0.0;
        for (std::int64_t k = 0; static_cast<double>(k) <= thr; ++k) {
            total += term;
            term *= lam / (k + 1);
        }
    }
    return total.convert_to<double>();
}

namespace {

// Calls visit(path) for every up-right path from (0,0) to (i,j); a path is
// encoded as a bit string of length i + j, bit set = step in i.
template <class F>
void for_each_path(int i, int j, F&& visit) {
    const int len = i + j;
    if (len > 24) throw InvalidParameter("oracle: grid too large for path enumeration");
    std::vector<std::pair<int, int>> path;
    for (std::uint32_t mask = 0; mask < (1u << len); ++mask) {
        if (__builtin_popcount(mask) != i) continue;
        path.assign(1, {0, 0});
        int a = 0, b = 0;
        for (int s = 0; s < len; ++s) {
            if (mask & (1u << s))
                ++a;
            else
                ++b;
            path.emplace_back(a, b);
        }
        visit(path);
    }
}

}  // namespace

double exp_passage_time(const ExpLppGrid& grid, int i, int j) {
    double best = -std::numeric_limits<double>::infinity();
    for_each_path(i, j, [&](const std::vector<std::pair<int, int>>& path) {
        double s = 0.0;
        for (auto [a, b] : path) s += grid.weight(a, b);
        best = std::max(best, s);
    });
    return best;
}

ExpExitRecord exp_exit_point(const ExpLppGrid& grid, int k, int n) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> arg;
    for_each_path(k, n, [&](const std::vector<std::pair<int, int>>& path) {
        double s = 0.0;
        for (auto [a, b] : path) s += grid.weight(a, b);
        if (s > best) {
            best = s;
            arg = path;
        }
    });
    std::pair<int, int> last{0, 0};
    for (auto p : arg)
        if (p.first == 0 || p.second == 0) last = p;
    ExpExitRecord r;
    if (last.second == 0) {
        r.axis = Axis::I;
        r.index = last.first;
        r.signed_value = last.first;
    } else {
        r.axis = Axis::J;
        r.index = last.second;
        r.signed_value = -last.second;
    }
    return r;
}

}  // namespace hpsim::oracle

namespace hpsim::oracle {

SiteGrid openness_grid(const BoxEnvironment& env, double r, const SiteWindow& w, double delta_s, double delta_t) {
    SiteGrid g = SiteGrid::all_open(w.x_lo, w.x_hi, w.n_lo, w.n_hi);
    g.r = r;
    g.lambda = env.lambda;
    g.delta_s = delta_s;
    g.delta_t = delta_t;
    std::vector<double> mark_times;
    for (const auto& c : env.clocks.points) mark_times.push_back(c.t);
    for (double s : env.sinks.coords) mark_times.push_back(s);
    for (int n = w.n_lo; n <= w.n_hi; ++n) {
        double ta = n * delta_t, tb = (n + 1) * delta_t;
        std::vector<double> instants{ta};
        for (double t : mark_times)
            if (t > ta && t < tb) instants.push_back(t);
        for (double t : instants) {
            auto parts = particles_at(env, t);
            for (int x = w.x_lo; x <= w.x_hi; ++x)
                for (double p : parts)
                    if (std::abs(x * delta_s - p) < r) g.set_open(x, n, false);
        }
    }
    return g;
}

namespace {

void walk_paths(const SiteGrid& g, int N, int x, int depth, std::vector<std::vector<char>>& seen) {
    seen[depth][x - g.x_lo] = 1;
    if (g.n_lo + depth == g.n_hi) return;
    for (int y = x - N; y <= x + N; ++y)
        if (g.contains(y, g.n_lo + depth + 1) && g.is_open(y, g.n_lo + depth + 1))
            walk_paths(g, N, y, depth + 1, seen);
}

}  // namespace

ReachEvolution reach_sets(const SiteGrid& g, int N) {
    std::vector<std::vector<char>> seen(g.height(), std::vector<char>(g.width(), 0));
    if (g.is_open(0, g.n_lo)) walk_paths(g, N, 0, 0, seen);
    ReachEvolution out;
    for (int d = 0; d < g.height(); ++d) {
        std::vector<int> row;
        for (int i = 0; i < g.width(); ++i)
            if (seen[d][i]) row.push_back(g.x_lo + i);
        out.sets.push_back(row);
        if (row.empty()) {
            out.detected_at = d;
            break;
        }
    }
    return out;
}

namespace {

struct Frac {
    long num, den;  // den > 0
};

bool operator<(Frac a, Frac b) { return a.num * b.den < b.num * a.den; }
bool operator<=(Frac a, Frac b) { return !(b < a); }
bool operator==(Frac a, Frac b) { return a.num * b.den == b.num * a.den; }

struct Span {
    Frac lo, hi;
    bool empty() const { return hi < lo; }
};

// Parameters s in [0, 1] with (x + r s, n + s) inside [X0, X1] x [T0, T1].
Span segment_in_rect(long x, long n, long r, long X0, long X1, long T0, long T1) {
    Frac lo{0, 1}, hi{1, 1};
    auto tighten_lo = [&](Frac f) { if (lo < f) lo = f; };
    auto tighten_hi = [&](Frac f) { if (f < hi) hi = f; };
    tighten_lo(Frac{T0 - n, 1});
    tighten_hi(Frac{T1 - n, 1});
    if (r > 0) {
        tighten_lo(Frac{X0 - x, r});
        tighten_hi(Frac{X1 - x, r});
    } else if (r < 0) {
        tighten_lo(Frac{x - X1, -r});
        tighten_hi(Frac{x - X0, -r});
    } else if (x < X0 || x > X1) {
        return Span{Frac{1, 1}, Frac{0, 1}};
    }
    return Span{lo, hi};
}

struct CrossingSearch {
    const SiteGrid& g;
    long R, l, L, E;
    std::vector<char> dead;

    bool on_edge(Frac xs, Frac ts) const {
        return xs == Frac{E, 1} && Frac{L, 1} <= ts && ts <= Frac{E, 1};
    }

    bool from(long x, long n) {
        std::size_t key = static_cast<std::size_t>(n) * (E + 1) + x;
        if (dead[key]) return false;
        if (x == E && n >= L && n <= E) return true;
        for (long r = -R; r <= R; ++r) {
            Span a = segment_in_rect(x, n, r, 0, l, 0, L);
            Span b = segment_in_rect(x, n, r, l, E, L, E);
            // Longest prefix [0, c] of the step covered by the union.
            Frac c{-1, 1};
            for (bool grew = true; grew;) {
                grew = false;
                for (const Span* s : {&a, &b}) {
                    if (s->empty()) continue;
                    bool touches = (c.num < 0) ? (s->lo == Frac{0, 1}) : (s->lo <= c);
                    if (touches && c < s->hi) {
                        c = s->hi;
                        grew = true;
                    }
                }
            }
            if (c.num < 0) continue;
            if (r != 0) {
                Frac st{(E - x) * (r > 0 ? 1 : -1), r > 0 ? r : -r};
                if (Frac{0, 1} < st && st <= c && st <= Frac{1, 1}) {
                    Frac ts{n * st.den + st.num, st.den};
                    if (on_edge(Frac{E, 1}, ts)) {
                        bool lands = st == Frac{1, 1};
                        if (!lands || g.is_open(static_cast<int>(x + r), static_cast<int>(n + 1))) return true;
                    }
                }
            }
            if (c == Frac{1, 1} && g.is_open(static_cast<int>(x + r), static_cast<int>(n + 1)) && from(x + r, n + 1))
                return true;
        }
        dead[key] = 1;
        return false;
    }
};

}  // namespace

bool crossing_exists(const SiteGrid& g, int R, int l, int L) {
    const long E = static_cast<long>(l) + L;
    if (!g.contains(0, 0) || !g.contains(static_cast<int>(E), static_cast<int>(E)))
        throw OutOfDomain("oracle::crossing_exists: grid does not cover the crossing set");
    CrossingSearch cs{g, R, l, L, E, std::vector<char>(static_cast<std::size_t>((E + 1) * (E + 1)), 0)};
    for (long x = 0; x <= l; ++x)
        if (g.is_open(static_cast<int>(x), 0) && cs.from(x, 0)) return true;
    return false;
}

}  // namespace hpsim::oracle
