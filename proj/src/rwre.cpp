#include "hpsim/rwre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hpsim/error.hpp"
#include "hpsim/format.hpp"

namespace hpsim {

using boost::multiprecision::cpp_int;

UniformField::UniformField(std::uint64_t key, LatticeRegion region) : key_(key), region_(region) {
    if (region.x_lo > region.x_hi || region.n_lo > region.n_hi) throw InvalidParameter("UniformField: empty region");
}

double UniformField::at(int x, int n) const {
    if (!on_lattice(Vertex{x, n})) throw InvalidParameter("UniformField: vertex not on the lattice");
    if (!region_.contains(x, n)) throw OutOfDomain("UniformField: vertex outside the region");
    std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(n), 0x75u, 0u};
    std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)};
    auto out = philox4x32_10(ctr, key);
    std::uint64_t bits = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

UniformField sample_uniform_field(RandomStream& s, const LatticeRegion& region) {
    return UniformField(s.next_u64(), region);
}

const char* to_string(EnvironmentMode m) {
    switch (m) {
        case EnvironmentMode::Hammersley: return "hammersley";
        case EnvironmentMode::ForcedDense: return "forced-dense";
        case EnvironmentMode::ForcedEmpty: return "forced-empty";
    }
    return "?";
}

EnvironmentMode environment_mode_from_string(const std::string& s) {
    if (s == "hammersley") return EnvironmentMode::Hammersley;
    if (s == "forced-dense") return EnvironmentMode::ForcedDense;
    if (s == "forced-empty") return EnvironmentMode::ForcedEmpty;
    throw InvalidParameter("unknown environment mode: " + s);
}

Occupancy Occupancy::from_history(const ParticleHistory& h) {
    validate_box(h.box);
    Occupancy o;
    o.region_.x_lo = static_cast<int>(std::ceil(h.box.x0 + 0.5));
    o.region_.x_hi = static_cast<int>(std::floor(h.box.x1 - 0.5));
    o.region_.n_lo = static_cast<int>(std::ceil(h.box.t0));
    o.region_.n_hi = static_cast<int>(std::floor(h.box.t1));
    if (o.region_.x_lo > o.region_.x_hi || o.region_.n_lo > o.region_.n_hi)
        throw InvalidParameter("Occupancy: box holds no lattice site");
    const auto& R = o.region_;
    const std::size_t W = static_cast<std::size_t>(R.x_hi - R.x_lo + 1);
    o.bits_.assign(W * static_cast<std::size_t>(R.n_hi - R.n_lo + 1), 0);
    HistoryCursor cur(h);
    for (int n = R.n_lo; n <= R.n_hi; ++n) {
        cur.advance_to(n);
        for (double p : cur.positions()) {
            double x = std::floor(p + 0.5);
            if (!(std::abs(x - p) < 0.5) || x < R.x_lo || x > R.x_hi) continue;
            o.bits_[static_cast<std::size_t>(n - R.n_lo) * W + static_cast<std::size_t>(x - R.x_lo)] = 1;
        }
    }
    return o;
}

Occupancy Occupancy::forced(bool dense, const LatticeRegion& region) {
    Occupancy o;
    o.region_ = region;
    o.forced_ = dense ? 1 : 0;
    return o;
}

bool Occupancy::occupied(int x, int n) const {
    if (!region_.contains(x, n)) throw OutOfDomain("Occupancy: site outside the environment");
    if (forced_ >= 0) return forced_ == 1;
    const std::size_t W = static_cast<std::size_t>(region_.x_hi - region_.x_lo + 1);
    return bits_[static_cast<std::size_t>(n - region_.n_lo) * W + static_cast<std::size_t>(x - region_.x_lo)] != 0;
}

void WalkConfig::validate() const {
    if (!(p_bullet >= 0.0 && p_bullet <= 1.0) || !(p_circ >= 0.0 && p_circ <= 1.0))
        throw InvalidParameter("WalkConfig: step probabilities must lie in [0, 1]");
}

int walk_step(const Occupancy& occ, const UniformField& u, int x, int n, const WalkConfig& cfg) {
    double p = occ.occupied(x, n) ? cfg.p_bullet : cfg.p_circ;
    return u.at(x, n) <= p ? x + 1 : x - 1;
}

namespace {

void check_cone(const LatticeRegion& r, Vertex w, int H, const char* what) {
    int reach = std::max(H - 1, 0);
    int n_top = w.n + std::max(H - 1, 0);
    if (!r.contains(w.x - reach, w.n) || !r.contains(w.x + reach, n_top))
        throw OutOfDomain(std::string("run_walk: walk cone exceeds the ") + what);
}

}  // namespace

std::vector<int> run_walk(const Occupancy& occ, const UniformField& u, Vertex w, int H, const WalkConfig& cfg) {
    cfg.validate();
    if (H < 0) throw InvalidParameter("run_walk: H must be >= 0");
    if (!on_lattice(w)) throw InvalidParameter("run_walk: start not on the lattice");
    check_cone(occ.region(), w, H, "environment");
    check_cone(u.region(), w, H, "uniform field");
    std::vector<int> xs{w.x};
    xs.reserve(static_cast<std::size_t>(H) + 1);
    for (int m = 0; m < H; ++m) xs.push_back(walk_step(occ, u, xs.back(), w.n + m, cfg));
    return xs;
}

std::vector<int> run_walk(const ParticleHistory& h, const UniformField& u, Vertex w, int H, const WalkConfig& cfg) {
    return run_walk(Occupancy::from_history(h), u, w, H, cfg);
}

const char* to_string(EventSide s) { return s == EventSide::Upper ? "upper" : "lower"; }

std::vector<Offset> diamond_offsets(int res) {
    if (res < 1) throw InvalidParameter("diamond_offsets: resolution must be >= 1");
    std::vector<Offset> out;
    bool has_origin = false;
    if (res >= 2) {
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < res; ++j) {
                double a = -1.0 + 2.0 * i / (res - 1), b = -1.0 + 2.0 * j / (res - 1);
                if (std::abs(a) + std::abs(b) > 1.0 + 1e-12) continue;
                if (std::abs(a) < 1e-12) a = 0.0;
                if (std::abs(b) < 1e-12) b = 0.0;
                has_origin = has_origin || (a == 0.0 && b == 0.0);
                out.push_back({a, b});
            }
    }
    if (!has_origin) out.insert(out.begin(), Offset{0.0, 0.0});
    return out;
}

namespace {

void validate_experiment(const WalkExperiment& e) {
    e.cfg.validate();
    if (!(e.rho > 0.0) || !std::isfinite(e.rho)) throw InvalidParameter("walk experiment: rho must be positive");
    if (e.H < 1) throw InvalidParameter("walk experiment: H must be >= 1");
    if (e.reps < 2) throw InvalidParameter("walk experiment: need at least 2 replicates");
}

// All walks from one row, run together; walks that meet are merged.
void extremes_for_offset(const Occupancy& occ, const UniformField& u, const WalkConfig& cfg, const Offset& off,
                         int H, int& max_disp, int& min_disp) {
    const int n0 = static_cast<int>(std::ceil(off.t));
    const int x_first = static_cast<int>(std::ceil(off.x));
    const int x_end = static_cast<int>(std::ceil(off.x + H));  // exclusive
    std::vector<int> starts;
    for (int x = x_first; x < x_end; ++x)
        if (on_lattice(Vertex{x, n0})) starts.push_back(x);
    std::vector<int> pos = starts;
    std::vector<int> link(starts.size());
    std::iota(link.begin(), link.end(), 0);
    std::vector<int> alive(starts.size());
    std::iota(alive.begin(), alive.end(), 0);
    for (int m = 0; m < H; ++m) {
        std::vector<int> next_alive;
        for (int g : alive) {
            pos[g] = walk_step(occ, u, pos[g], n0 + m, cfg);
            if (!next_alive.empty() && pos[next_alive.back()] == pos[g])
                link[g] = next_alive.back();
            else
                next_alive.push_back(g);
        }
        alive = std::move(next_alive);
    }
    max_disp = std::numeric_limits<int>::min();
    min_disp = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < starts.size(); ++i) {
        int g = static_cast<int>(i);
        while (link[g] != g) g = link[g];
        int d = pos[g] - starts[i];
        max_disp = std::max(max_disp, d);
        min_disp = std::min(min_disp, d);
    }
}

}  // namespace

DisplacementTable displacement_table(const WalkExperiment& e, const RunOptions& opt) {
    validate_experiment(e);
    DisplacementTable t;
    t.offsets = diamond_offsets(e.offset_grid);
    t.H = e.H;
    const int H = e.H;
    LatticeRegion region{-H - 2, 2 * H + 2, -1, H};
    SpaceTimeBox box{-H - 2.5, 2 * H + 2.5, -1.0, H + 0.5};
    const double lambda = 1.0 / std::sqrt(e.rho);
    struct Rep {
        std::vector<int> mx, mn;
    };
    auto reps = run_replicates<Rep>(e.reps, opt.workers, [&](std::size_t rep) {
        auto s = replicate_stream(opt, rep);
        Occupancy occ = Occupancy::forced(e.mode == EnvironmentMode::ForcedDense, region);
        if (e.mode == EnvironmentMode::Hammersley) {
            auto es = s.child(0);
            occ = Occupancy::from_history(evolve_particles(sample_box_environment(es, lambda, box)));
        }
        auto us = s.child(1);
        UniformField u = sample_uniform_field(us, region);
        Rep r;
        for (const auto& off : t.offsets) {
            int a, b;
            extremes_for_offset(occ, u, e.cfg, off, H, a, b);
            r.mx.push_back(a);
            r.mn.push_back(b);
        }
        return r;
    });
    for (auto& r : reps) {
        t.max_disp.push_back(std::move(r.mx));
        t.min_disp.push_back(std::move(r.mn));
    }
    return t;
}

namespace {

// Largest event frequency over offsets, and its index.
std::pair<double, std::size_t> best_frequency(const DisplacementTable& t, EventSide side, double v) {
    const double thr = v * t.H;
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t o = 0; o < t.offsets.size(); ++o) {
        std::size_t hits = 0;
        for (std::size_t r = 0; r < t.max_disp.size(); ++r)
            hits += side == EventSide::Upper ? (t.max_disp[r][o] >= thr) : (t.min_disp[r][o] <= thr);
        double f = static_cast<double>(hits) / static_cast<double>(t.max_disp.size());
        if (f > best) {
            best = f;
            arg = o;
        }
    }
    return {best, arg};
}

}  // namespace

McEstimate estimate_pH(const DisplacementTable& t, EventSide side, double v) {
    if (!(v >= -1.0 && v <= 1.0)) throw InvalidParameter("estimate_pH: v must lie in [-1, 1]");
    if (t.max_disp.size() < 2 || t.offsets.empty()) throw InvalidParameter("estimate_pH: empty table");
    auto [f, o] = best_frequency(t, side, v);
    (void)f;
    const double thr = v * t.H;
    std::vector<double> ind;
    for (std::size_t r = 0; r < t.max_disp.size(); ++r)
        ind.push_back((side == EventSide::Upper ? t.max_disp[r][o] >= thr : t.min_disp[r][o] <= thr) ? 1.0 : 0.0);
    McEstimate est = mc_estimate(ind);
    est.add_flag("offset=" + fmt_double(t.offsets[o].x) + "," + fmt_double(t.offsets[o].t));
    return est;
}

McEstimate estimate_pH(EventSide side, double v, const WalkExperiment& e, const RunOptions& opt) {
    if (!(v >= -1.0 && v <= 1.0)) throw InvalidParameter("estimate_pH: v must lie in [-1, 1]");
    return estimate_pH(displacement_table(e, opt), side, v);
}

SpeedBracket speed_bracket(const DisplacementTable& t, double tol) {
    if (!(tol > 0.0)) throw InvalidParameter("speed_bracket: tol must be positive");
    if (t.max_disp.size() < 2) throw InvalidParameter("speed_bracket: empty table");
    SpeedBracket b;
    b.H = t.H;
    // Upper frequency is non-increasing in v: find its first drop below 1/2.
    double lo = -1.0, hi = 1.0 + tol;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (best_frequency(t, EventSide::Upper, mid).first < 0.5)
            hi = mid;
        else
            lo = mid;
    }
    b.v_plus = hi;
    lo = -1.0 - tol;
    hi = 1.0;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (best_frequency(t, EventSide::Lower, mid).first < 0.5)
            lo = mid;
        else
            hi = mid;
    }
    b.v_minus = lo;
    return b;
}

SpeedBracket speed_bracket(const WalkExperiment& e, double tol, const RunOptions& opt) {
    if (!(tol > 0.0)) throw InvalidParameter("speed_bracket: tol must be positive");
    return speed_bracket(displacement_table(e, opt), tol);
}

std::vector<SweepRow> ph_sweep(const DisplacementTable& t, const std::vector<double>& vs) {
    std::vector<SweepRow> rows;
    for (EventSide side : {EventSide::Upper, EventSide::Lower})
        for (double v : vs) rows.push_back(SweepRow{v, side, estimate_pH(t, side, v)});
    return rows;
}

std::string sweep_csv(double rho, int H, const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "rho,H,v,direction,estimate,stderr\n";
    for (const auto& r : rows)
        os << fmt_double(rho) << ',' << H << ',' << fmt_double(r.v) << ',' << to_string(r.side) << ','
           << fmt_double(r.estimate.mean) << ',' << fmt_double(r.estimate.std_error) << '\n';
    return os.str();
}

double big_log(const cpp_int& v) {
    if (v <= 0) throw InvalidParameter("big_log: argument must be positive");
    std::size_t bits = boost::multiprecision::msb(v);
    if (bits < 900) return std::log(v.convert_to<double>());
    std::size_t shift = bits - 60;
    cpp_int top = v >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

ScheduleTable rwre_schedule(const ScheduleParams& p) {
    if (p.L0 < 16) throw InvalidParameter("rwre_schedule: L0 must be >= 16");
    if (!(p.delta > 0.0) || !(p.C1 > 0.0) || !(p.rho > 0.0))
        throw InvalidParameter("rwre_schedule: rho, delta and C1 must be positive");
    if (!(p.rho < p.rho_c_minus - 2.0 * p.delta))
        throw InvalidParameter("rwre_schedule: need rho < rho_c_minus - 2 delta");
    if (!(p.v_target > p.rho)) throw InvalidParameter("rwre_schedule: need v_target > rho");
    if (p.k_max < 0) throw InvalidParameter("rwre_schedule: k_max must be >= 0");

    // Rows past k_max are kept only to sum the tails; terms below 1e-300
    // no longer change a double.
    std::vector<cpp_int> Ls, ls;
    std::vector<double> eps, vstep;
    cpp_int L = p.L0;
    for (int k = 0;; ++k) {
        cpp_int l = boost::multiprecision::sqrt(boost::multiprecision::sqrt(L));
        double logL = big_log(L);
        double e = std::exp(-logL / 16.0);
        double vs = 2.0 * p.C1 * std::exp(logL / 16.0 - big_log(l));
        Ls.push_back(L);
        ls.push_back(l);
        eps.push_back(e);
        vstep.push_back(vs);
        if (k >= p.k_max && e < 1e-300 && vs < 1e-300) break;
        L = l * L;
    }
    const std::size_t K = eps.size();
    std::vector<double> eps_tail(K + 1, 0.0), v_tail(K + 1, 0.0);
    for (std::size_t k = K; k-- > 0;) {
        eps_tail[k] = eps_tail[k + 1] + eps[k];
        v_tail[k] = v_tail[k + 1] + vstep[k];
    }
    ScheduleTable t;
    std::size_t k6 = 0;
    while (eps_tail[k6] > p.delta / 4.0) ++k6;
    std::size_t k7 = k6;
    const double gap = p.v_target - p.rho;
    while (!(v_tail[k7] < gap / 4.0)) ++k7;
    t.k6 = static_cast<int>(k6);
    t.k7 = static_cast<int>(k7);
    t.eps_tail_k6 = eps_tail[k6];
    t.v_tail_k7 = v_tail[k7];

    const double nan = std::numeric_limits<double>::quiet_NaN();
    double rho_k = p.rho_c_minus - 1.25 * p.delta;
    double v_k = p.v_target - gap / 8.0;
    const std::size_t rows = std::min(K, static_cast<std::size_t>(p.k_max) + 1);
    for (std::size_t k = 0; k < rows; ++k) {
        ScheduleRow row;
        row.k = static_cast<int>(k);
        row.L = Ls[k];
        row.l = ls[k];
        row.eps = eps[k];
        row.rho = k >= k6 ? rho_k : nan;
        row.v_tilde = k >= k7 ? v_k : nan;
        if (k >= k6) rho_k -= eps[k];
        if (k >= k7) v_k -= vstep[k];
        t.rows.push_back(row);
    }
    return t;
}

std::string schedule_csv(const ScheduleTable& t) {
    std::ostringstream os;
    os << "k,L,l,eps,rho,v_tilde\n";
    for (const auto& r : t.rows)
        os << r.k << ',' << r.L.str() << ',' << r.l.str() << ',' << fmt_double(r.eps) << ','
           << fmt_double(r.rho) << ',' << fmt_double(r.v_tilde) << '\n';
    return os.str();
}

}  // namespace hpsim
