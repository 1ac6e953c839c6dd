#include "hpsim/exp_lpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "hpsim/error.hpp"
#include "hpsim/harness.hpp"

namespace hpsim {

namespace {

void check_alpha(double alpha, const char* who) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter(std::string(who) + ": alpha must be in (0, 1)");
}

}  // namespace

ExpLppGrid sample_grid(RandomStream& s, double alpha, int i_max, int j_max) {
    check_alpha(alpha, "sample_grid");
    if (i_max < 0 || j_max < 0) throw InvalidParameter("sample_grid: extents must be >= 0");
    ExpLppGrid grid;
    grid.alpha = alpha;
    grid.i_max = i_max;
    grid.j_max = j_max;
    grid.w.assign(static_cast<std::size_t>(i_max + 1) * static_cast<std::size_t>(j_max + 1), 0.0);
    for (int j = 0; j <= j_max; ++j)
        for (int i = 0; i <= i_max; ++i) {
            double e = -std::log(s.uniform_open());
            double rate = 1.0;
            if (i == 0 && j == 0) {
                e = 0.0;
            } else if (j == 0) {
                rate = 1.0 - alpha;
            } else if (i == 0) {
                rate = alpha;
            }
            grid.weight(i, j) = e / rate;
        }
    return grid;
}

std::string dump_grid(const ExpLppGrid& g) {
    nlohmann::json j;
    j["alpha"] = g.alpha;
    j["i_max"] = g.i_max;
    j["j_max"] = g.j_max;
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r <= g.j_max; ++r) {
        std::vector<double> row;
        for (int i = 0; i <= g.i_max; ++i) row.push_back(g.weight(i, r));
        rows.push_back(row);
    }
    j["weights"] = std::move(rows);
    return j.dump();
}

ExpLppGrid load_grid(const std::string& json_text) {
    try {
        auto j = nlohmann::json::parse(json_text);
        ExpLppGrid g;
        g.alpha = j.at("alpha").get<double>();
        check_alpha(g.alpha, "load_grid");
        g.i_max = j.at("i_max").get<int>();
        g.j_max = j.at("j_max").get<int>();
        if (g.i_max < 0 || g.j_max < 0) throw InvalidConfiguration("grid: negative extent");
        const auto& rows = j.at("weights");
        if (!rows.is_array() || rows.size() != static_cast<std::size_t>(g.j_max + 1))
            throw InvalidConfiguration("grid: wrong number of rows");
        g.w.assign(static_cast<std::size_t>(g.i_max + 1) * static_cast<std::size_t>(g.j_max + 1), 0.0);
        for (int r = 0; r <= g.j_max; ++r) {
            auto row = rows[static_cast<std::size_t>(r)].get<std::vector<double>>();
            if (row.size() != static_cast<std::size_t>(g.i_max + 1)) throw InvalidConfiguration("grid: wrong row length");
            for (int i = 0; i <= g.i_max; ++i) {
                if (!(row[static_cast<std::size_t>(i)] >= 0.0)) throw InvalidConfiguration("grid: negative weight");
                g.weight(i, r) = row[static_cast<std::size_t>(i)];
            }
        }
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfiguration(std::string("grid JSON: ") + e.what());
    }
}

double GField::at(int i, int j) const {
    if (i < 0 || j < 0 || i > i_max || j > j_max) throw OutOfDomain("GField: index outside the grid");
    return g[static_cast<std::size_t>(j) * static_cast<std::size_t>(i_max + 1) + static_cast<std::size_t>(i)];
}

GField lpp_times(const ExpLppGrid& grid) {
    GField f;
    f.i_max = grid.i_max;
    f.j_max = grid.j_max;
    const std::size_t w = static_cast<std::size_t>(grid.i_max + 1);
    f.g.assign(grid.w.size(), 0.0);
    for (int j = 0; j <= grid.j_max; ++j)
        for (int i = 0; i <= grid.i_max; ++i) {
            std::size_t c = static_cast<std::size_t>(j) * w + static_cast<std::size_t>(i);
            double best;
            if (i == 0 && j == 0)
                best = 0.0;
            else if (i == 0)
                best = f.g[c - w];
            else if (j == 0)
                best = f.g[c - 1];
            else
                best = std::max(f.g[c - 1], f.g[c - w]);
            f.g[c] = best + grid.w[c];
        }
    return f;
}

std::vector<double> lpp_top_row(const ExpLppGrid& grid) {
    const int w = grid.i_max + 1;
    std::vector<double> prev(static_cast<std::size_t>(w)), cur(static_cast<std::size_t>(w));
    for (int j = 0; j <= grid.j_max; ++j) {
        for (int i = 0; i < w; ++i) {
            double best;
            if (i == 0 && j == 0)
                best = 0.0;
            else if (i == 0)
                best = prev[0];
            else if (j == 0)
                best = cur[static_cast<std::size_t>(i - 1)];
            else
                best = std::max(cur[static_cast<std::size_t>(i - 1)], prev[static_cast<std::size_t>(i)]);
            cur[static_cast<std::size_t>(i)] = best + grid.weight(i, j);
        }
        std::swap(prev, cur);
    }
    return prev;
}

double increments(const GField& g, int n, int k, int l) {
    if (k > l) throw OutOfDomain("increments: need k <= l");
    return g.at(l, n) - g.at(k, n);
}

ExpExitRecord exp_exit_point(const ExpLppGrid& grid, int k, int n) {
    return exp_exit_point(grid, lpp_times(grid), k, n);
}

ExpExitRecord exp_exit_point(const ExpLppGrid& grid, const GField& g, int k, int n) {
    if (k < 0 || n < 0 || k > grid.i_max || n > grid.j_max) throw OutOfDomain("exp_exit_point: outside the grid");
    int i = k, j = n;
    while (i > 0 && j > 0) {
        // ties go toward the i-axis
        if (g.at(i, j - 1) >= g.at(i - 1, j))
            --j;
        else
            --i;
    }
    ExpExitRecord r;
    if (j == 0) {
        r.axis = Axis::I;
        r.index = i;
        r.signed_value = i;
    } else {
        r.axis = Axis::J;
        r.index = j;
        r.signed_value = -j;
    }
    return r;
}

double derivative_field(const GField& g, int x, int n) {
    if (((n + x) % 2 + 2) % 2 != 0) throw InvalidParameter("derivative_field: n + x must be even");
    const int i1 = (n + x) / 2, j1 = (n - x) / 2 + 1;
    const int i2 = (n + x) / 2 + 1, j2 = (n - x) / 2;
    return g.at(i1, j1) - g.at(i2, j2);
}

double characteristic_beta(double alpha) {
    check_alpha(alpha, "characteristic_beta");
    return (1.0 - alpha) * (1.0 - alpha) / (alpha * alpha);
}

double evaluate_increment_function(const MonotoneFunctionSpec& f, const GField& g) {
    const int k = static_cast<int>(f.lo), l = static_cast<int>(f.hi);
    const int n0 = static_cast<int>(f.t_lo), n1 = static_cast<int>(f.t_hi);
    double mx = -std::numeric_limits<double>::infinity();
    bool any_ge = false, all_le = true;
    for (int n = n0; n <= n1; ++n) {
        double v = increments(g, n, k, l);
        mx = std::max(mx, v);
        any_ge = any_ge || v >= f.threshold;
        all_le = all_le && v <= f.threshold;
    }
    switch (f.kind) {
        case FunctionKind::AtLeast: return any_ge ? 1.0 : 0.0;
        case FunctionKind::AtMost: return all_le ? 1.0 : 0.0;
        case FunctionKind::MaxOverWindow: return std::min(1.0, mx / f.threshold);
    }
    return 0.0;
}

namespace {

void check_lattice_function(const MonotoneFunctionSpec& f, const SpaceTimeBox& b) {
    validate_function(f, b);
    for (double v : {f.lo, f.hi, f.t_lo, f.t_hi, b.x0, b.x1, b.t0, b.t1})
        if (v != std::floor(v) || v < 0.0) throw InvalidConfiguration("lattice function and box need non-negative integer coordinates");
}

}  // namespace

DecouplingReport decoupling_check_exp(const MonotoneFunctionSpec& f1, const MonotoneFunctionSpec& f2,
                                      const SpaceTimeBox& b1, const SpaceTimeBox& b2, double alpha,
                                      double alpha_prime, std::size_t reps, const RunOptions& opt) {
    check_alpha(alpha, "decoupling_check_exp");
    check_alpha(alpha_prime, "decoupling_check_exp");
    if (reps < 2) throw InvalidParameter("decoupling_check_exp: reps must be >= 2");
    check_lattice_function(f1, b1);
    check_lattice_function(f2, b2);
    if (f1.direction != f2.direction) throw InvalidConfiguration("decoupling_check_exp: functions have different directions");
    // Increments grow with alpha, so the order runs the same way as in the
    // particle version with alpha in place of lambda.
    if (f1.direction == Direction::NonDecreasing && !(alpha < alpha_prime))
        throw InvalidConfiguration("decoupling_check_exp: non-decreasing functions need alpha < alpha_prime");
    if (f1.direction == Direction::NonIncreasing && !(alpha_prime < alpha))
        throw InvalidConfiguration("decoupling_check_exp: non-increasing functions need alpha_prime < alpha");

    auto extent = [](const SpaceTimeBox& b) { return std::pair<int, int>{static_cast<int>(b.x1), static_cast<int>(b.t1)}; };
    auto e1 = extent(b1), e2 = extent(b2);
    const int ji = std::max(e1.first, e2.first), jj = std::max(e1.second, e2.second);
    struct Rep {
        double joint = 0, g1 = 0, g2 = 0;
    };
    auto out = run_replicates<Rep>(reps, opt.workers, [&](std::size_t r) {
        RandomStream rs = replicate_stream(opt, r);
        RandomStream s_joint = rs.child(0), s1 = rs.child(1), s2 = rs.child(2);
        Rep o;
        auto gj = lpp_times(sample_grid(s_joint, alpha, ji, jj));
        o.joint = evaluate_increment_function(f1, gj) * evaluate_increment_function(f2, gj);
        o.g1 = evaluate_increment_function(f1, lpp_times(sample_grid(s1, alpha, e1.first, e1.second)));
        o.g2 = evaluate_increment_function(f2, lpp_times(sample_grid(s2, alpha_prime, e2.first, e2.second)));
        return o;
    });
    std::vector<double> j(reps), g1(reps), g2(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        j[i] = out[i].joint;
        g1[i] = out[i].g1;
        g2[i] = out[i].g2;
    }
    auto rep = make_decoupling_report(j, g1, g2);
    rep.epsilon = std::fabs(alpha - alpha_prime);
    rep.distance = box_distance(b1, b2);
    rep.perimeter1 = box_perimeter(b1);
    rep.perimeter2 = box_perimeter(b2);
    return rep;
}

}  // namespace hpsim
