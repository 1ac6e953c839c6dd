#include <CLI11.hpp>
#include <json.hpp>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hpsim/acceptance.hpp"
#include "hpsim/coupling.hpp"
#include "hpsim/detection.hpp"
#include "hpsim/error.hpp"
#include "hpsim/exp_lpp.hpp"
#include "hpsim/format.hpp"
#include "hpsim/hammersley.hpp"
#include "hpsim/rwre.hpp"
#include "hpsim/stats.hpp"

#ifndef HPSIM_VERSION
#define HPSIM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace hpsim;

namespace {

constexpr std::uint64_t kMaxReps = 10'000'000;
constexpr double kMaxBoxArea = 1.0e6;
constexpr double kMaxCells = 1.0e7;

enum ExitCode { kPass = 0, kError = 1, kStatFail = 2 };

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

// Reads fields of one JSON object and rejects anything left unread.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) fail("expected an object");
    }

    bool has(const std::string& k) {
        seen_.insert(k);
        return j_.contains(k);
    }

    double number(const std::string& k, double def) {
        if (!has(k)) return def;
        const auto& v = j_.at(k);
        if (!v.is_number()) fail(k + " must be a number");
        double x = v.get<double>();
        if (!std::isfinite(x)) fail(k + " must be finite");
        return x;
    }

    std::int64_t integer(const std::string& k, std::int64_t def) {
        if (!has(k)) return def;
        const auto& v = j_.at(k);
        if (v.is_number_integer()) return v.get<std::int64_t>();
        if (v.is_number_float()) {
            double x = v.get<double>();
            if (std::isfinite(x) && x == std::floor(x) && std::fabs(x) < 9.0e15) return static_cast<std::int64_t>(x);
        }
        fail(k + " must be an integer");
    }

    std::string text(const std::string& k, const std::string& def) {
        if (!has(k)) return def;
        if (!j_.at(k).is_string()) fail(k + " must be a string");
        return j_.at(k).get<std::string>();
    }

    std::vector<double> numbers(const std::string& k, std::vector<double> def) {
        if (!has(k)) return def;
        const auto& v = j_.at(k);
        if (!v.is_array()) fail(k + " must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) fail(k + " must be an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<int> integers(const std::string& k, std::vector<int> def) {
        std::vector<int> out;
        for (double x : numbers(k, std::vector<double>(def.begin(), def.end()))) {
            if (x != std::floor(x) || std::fabs(x) > 1e9) fail(k + " must be an array of integers");
            out.push_back(static_cast<int>(x));
        }
        return out;
    }

    SpaceTimeBox box(const std::string& k, SpaceTimeBox def) {
        if (!has(k)) return def;
        auto v = numbers(k, {});
        if (v.size() != 4) fail(k + " must be [x0, x1, t0, t1]");
        SpaceTimeBox b{v[0], v[1], v[2], v[3]};
        if (!(b.x1 > b.x0 && b.t1 > b.t0)) fail(k + " must have x1 > x0 and t1 > t0");
        return b;
    }

    const json& object(const std::string& k) {
        seen_.insert(k);
        return j_.at(k);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail("unknown field '" + it.key() + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw InvalidConfiguration(where_ + ": " + msg); }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidConfiguration(msg);
}

void check_reps(std::uint64_t reps) {
    require(reps >= 1, "reps must be at least 1");
    require(reps <= kMaxReps, "reps exceeds the limit of " + std::to_string(kMaxReps));
}

void check_area(const SpaceTimeBox& b, const std::string& what) {
    double area = (b.x1 - b.x0) * (b.t1 - b.t0);
    require(area <= kMaxBoxArea, what + " area " + fmt_double(area) + " exceeds the limit of " + fmt_double(kMaxBoxArea));
}

void check_positive(double v, const std::string& what) { require(v > 0, what + " must be positive"); }

// Parses a non-negative integer given as a JSON integer or as a string of
// digits, optionally in the form "<digits>e<digits>".
BigInt big_integer(Fields& f, const std::string& k, const BigInt& def) {
    if (!f.has(k)) return def;
    const auto& v = f.object(k);
    if (v.is_number_integer() || v.is_number_float()) {
        std::int64_t x = f.integer(k, 0);
        require(x > 0, k + " must be positive");
        return BigInt(x);
    }
    require(v.is_string(), k + " must be an integer or a string of digits");
    std::string s = v.get<std::string>();
    auto e = s.find_first_of("eE");
    std::string mant = s.substr(0, e);
    std::string expo = e == std::string::npos ? "" : s.substr(e + 1);
    auto digits = [](const std::string& d) {
        return !d.empty() && d.size() < 400 && d.find_first_not_of("0123456789") == std::string::npos;
    };
    require(digits(mant) && (e == std::string::npos || (digits(expo) && expo.size() <= 3)),
            k + " must be an integer or a string of digits");
    BigInt out(mant);
    if (e != std::string::npos) out *= boost::multiprecision::pow(BigInt(10), std::stoi(expo));
    require(out > 0, k + " must be positive");
    return out;
}

struct Common {
    std::string kind;
    std::uint64_t seed = 1;
    std::uint64_t reps = 0;
    unsigned workers = 1;
};

struct Outputs {
    std::map<std::string, std::string> files;
    ordered_json streams = ordered_json::array();
    ordered_json extra = ordered_json::object();
    bool pass = true;

    void stream(std::uint64_t experiment, std::uint64_t reps, const std::string& purpose) {
        streams.push_back({{"experiment", experiment},
                           {"replicates", reps},
                           {"stream_id", "derive_stream_id(experiment, replicate)"},
                           {"purpose", purpose}});
    }
};

RunOptions run_options(const Common& c, std::uint64_t experiment) { return RunOptions{c.seed, experiment, c.workers}; }

// Every kind validates its whole configuration in parse() and samples only
// in run(), so a rejected config never produces files.
struct Experiment {
    virtual ~Experiment() = default;
    virtual std::uint64_t default_reps() const = 0;
    virtual void parse(Fields& f) = 0;
    virtual void validate(const Common& c) const = 0;
    virtual Outputs run(const Common& c) const = 0;
};

MonotoneFunctionSpec parse_function(const json& j, const std::string& where) {
    Fields f(j, where);
    MonotoneFunctionSpec s;
    std::string kind = f.text("kind", "at-least");
    if (kind == "at-least")
        s.kind = FunctionKind::AtLeast;
    else if (kind == "at-most")
        s.kind = FunctionKind::AtMost;
    else if (kind == "max-over-window")
        s.kind = FunctionKind::MaxOverWindow;
    else
        f.fail("unknown function kind '" + kind + "'");
    s.direction = natural_direction(s.kind);
    std::string dir = f.text("direction", to_string(s.direction));
    if (dir == "non-decreasing")
        s.direction = Direction::NonDecreasing;
    else if (dir == "non-increasing")
        s.direction = Direction::NonIncreasing;
    else
        f.fail("unknown direction '" + dir + "'");
    s.lo = f.number("lo", 0.0);
    s.hi = f.number("hi", 1.0);
    s.t_lo = f.number("t_lo", 0.0);
    s.t_hi = f.number("t_hi", 1.0);
    s.threshold = f.number("threshold", 1.0);
    f.finish();
    return s;
}

// --- simulate ---------------------------------------------------------------

struct Simulate : Experiment {
    double lambda = 1.0;
    SpaceTimeBox box{0, 30, 0, 20};
    std::vector<double> window{10, 20};
    std::vector<double> times{5, 10, 15};
    double flux_at = 15;

    std::uint64_t default_reps() const override { return 1000; }
    void parse(Fields& f) override {
        lambda = f.number("lambda", lambda);
        box = f.box("box", box);
        window = f.numbers("window", window);
        times = f.numbers("times", times);
        flux_at = f.number("flux_at", flux_at);
    }
    void validate(const Common& c) const override {
        check_reps(c.reps);
        check_positive(lambda, "lambda");
        check_area(box, "box");
        require(box.width() * box.height() * (1 + lambda) + box.width() * lambda <= kMaxBoxArea * 2,
                "expected number of marks is too large");
        require(window.size() == 2 && box.x0 <= window[0] && window[0] < window[1] && window[1] <= box.x1,
                "window must be [a, b] inside the box");
        require(!times.empty(), "times must not be empty");
        for (double t : times) require(t > box.t0 && t <= box.t1, "times must lie in (t0, t1]");
        require(flux_at > box.x0 && flux_at < box.x1, "flux_at must lie strictly inside the box");
    }
    Outputs run(const Common& c) const override {
        Outputs o;
        const std::uint64_t E = 1;
        o.stream(E, c.reps, "box environments");
        struct Rec {
            std::vector<std::uint64_t> counts;
            std::uint64_t flux = 0;
        };
        auto recs = run_replicates<Rec>(c.reps, c.workers, [&](std::size_t r) {
            auto s = replicate_stream(run_options(c, E), r);
            auto h = evolve_particles(sample_box_environment(s, lambda, box));
            Rec rec;
            for (double t : times) rec.counts.push_back(h.count(window[0], window[1], t));
            rec.flux = flux_count(h, flux_at, box.t0, box.t1);
            return rec;
        });
        std::ostringstream per, sum;
        per << "replicate,stream_id,t,count\n";
        sum << "quantity,t,mean,stderr,expected,chi2_p\n";
        for (std::size_t r = 0; r < recs.size(); ++r) {
            std::uint64_t sid = derive_stream_id(E, r);
            for (std::size_t i = 0; i < times.size(); ++i)
                per << r << ',' << sid << ',' << fmt_double(times[i]) << ',' << recs[r].counts[i] << '\n';
            per << r << ',' << sid << ",flux," << recs[r].flux << '\n';
        }
        auto summarize = [&](const std::string& what, const std::string& t, const std::vector<std::uint64_t>& v,
                             double expected) {
            std::vector<double> d(v.begin(), v.end());
            auto e = mc_estimate(d);
            double p = chi_square_poisson(v, expected).p_value;
            o.pass = o.pass && p >= 1e-3;
            sum << what << ',' << t << ',' << fmt_double(e.mean) << ',' << fmt_double(e.std_error) << ','
                << fmt_double(expected) << ',' << fmt_double(p) << '\n';
        };
        for (std::size_t i = 0; i < times.size(); ++i) {
            std::vector<std::uint64_t> v;
            for (const auto& r : recs) v.push_back(r.counts[i]);
            summarize("count", fmt_double(times[i]), v, lambda * (window[1] - window[0]));
        }
        std::vector<std::uint64_t> fl;
        for (const auto& r : recs) fl.push_back(r.flux);
        summarize("flux", fmt_double(box.height()), fl, box.height() / lambda);
        o.files["simulate_replicates.csv"] = per.str();
        o.files["simulate_summary.csv"] = sum.str();
        return o;
    }
};

// --- decouple / decouple-exp --------------------------------------------------

struct Decouple : Experiment {
    bool lattice = false;
    double dens = 1.0, dens_prime = 1.1;
    SpaceTimeBox b1{0, 3, 0, 3}, b2{13, 16, 0, 3};
    MonotoneFunctionSpec f1{FunctionKind::AtLeast, 0.5, 2.5, 1, 3, 2, Direction::NonDecreasing};
    MonotoneFunctionSpec f2{FunctionKind::AtLeast, 13.5, 15.5, 1, 3, 2, Direction::NonDecreasing};

    explicit Decouple(bool lat) : lattice(lat) {
        if (lattice) {
            dens = 0.5;
            dens_prime = 0.45;
            b1 = {0, 4, 0, 4};
            b2 = {14, 18, 0, 4};
            f1 = {FunctionKind::AtMost, 1, 3, 2, 4, 4, Direction::NonIncreasing};
            f2 = {FunctionKind::AtMost, 15, 17, 2, 4, 4, Direction::NonIncreasing};
        }
    }
    std::uint64_t default_reps() const override { return 10000; }
    void parse(Fields& f) override {
        const char* a = lattice ? "alpha" : "lambda";
        const char* b = lattice ? "alpha_prime" : "lambda_prime";
        dens = f.number(a, dens);
        dens_prime = f.number(b, dens_prime);
        b1 = f.box("b1", b1);
        b2 = f.box("b2", b2);
        if (f.has("f1")) f1 = parse_function(f.object("f1"), "f1");
        if (f.has("f2")) f2 = parse_function(f.object("f2"), "f2");
    }
    void validate(const Common& c) const override {
        check_reps(c.reps);
        check_positive(dens, "density");
        check_positive(dens_prime, "density");
        if (lattice) require(dens < 1 && dens_prime < 1, "alpha and alpha_prime must lie in (0, 1)");
        SpaceTimeBox hull{std::min(b1.x0, b2.x0), std::max(b1.x1, b2.x1), std::min(b1.t0, b2.t0),
                          std::max(b1.t1, b2.t1)};
        check_area(hull, "bounding box");
        validate_function(f1, b1);
        validate_function(f2, b2);
    }
    Outputs run(const Common& c) const override {
        Outputs o;
        const std::uint64_t E = lattice ? 3 : 2;
        o.stream(E, c.reps, "joint and marginal samples");
        auto r = lattice ? decoupling_check_exp(f1, f2, b1, b2, dens, dens_prime, c.reps, run_options(c, E))
                         : decoupling_check(f1, f2, b1, b2, dens, dens_prime, c.reps, run_options(c, E));
        o.pass = r.pass;
        o.files[lattice ? "decouple_exp.json" : "decouple.json"] = report_json(r) + "\n";
        return o;
    }
};

// --- exitpoint ------------------------------------------------------------------

struct ExitPoint : Experiment {
    double lambda = 1.0;
    SpaceTimeBox box{-200, 0, 0, 50};
    double x = 0, t = 50;

    std::uint64_t default_reps() const override { return 1000; }
    void parse(Fields& f) override {
        lambda = f.number("lambda", lambda);
        box = f.box("box", box);
        x = f.number("x", x);
        t = f.number("t", t);
    }
    void validate(const Common& c) const override {
        check_reps(c.reps);
        check_positive(lambda, "lambda");
        check_area(box, "box");
        require(in_box(box, x, t), "query point must lie in the box");
    }
    Outputs run(const Common& c) const override {
        Outputs o;
        const std::uint64_t E = 4;
        o.stream(E, c.reps, "box environments");
        auto recs = run_replicates<ExitPointRecord>(c.reps, c.workers, [&](std::size_t r) {
            auto s = replicate_stream(run_options(c, E), r);
            return exit_point(sample_box_environment(s, lambda, box), x, t);
        });
        std::ostringstream os;
        os << "replicate,stream_id,z,value\n";
        std::vector<double> src;
        std::size_t sinks = 0;
        for (std::size_t r = 0; r < recs.size(); ++r) {
            os << r << ',' << derive_stream_id(E, r) << ',' << fmt_double(recs[r].z) << ',' << recs[r].value << '\n';
            if (recs[r].z > 0)
                src.push_back(box.x0 + recs[r].z);
            else
                ++sinks;
        }
        ordered_json j;
        j["lambda"] = lambda;
        j["x"] = x;
        j["t"] = t;
        j["characteristic"] = x - t / (lambda * lambda);
        j["source_exits"] = src.size();
        j["sink_exits"] = sinks;
        if (!src.empty()) {
            auto e = mc_estimate(src);
            j["mean_source_exit"] = e.mean;
            j["mean_source_exit_stderr"] = e.std_error;
        }
        o.files["exitpoint.csv"] = os.str();
        o.files["exitpoint.json"] = j.dump(2) + "\n";
        return o;
    }
};

// --- detect ---------------------------------------------------------------------

struct Detect : Experiment {
    SurvivalParams p;
    std::vector<int> Ns{0, 1, 2, 3, 4};
    std::optional<std::pair<int, int>> trigger;

    std::uint64_t default_reps() const override { return 1000; }
    void parse(Fields& f) override {
        p.lambda = f.number("lambda", p.lambda);
        p.r = f.number("r", p.r);
        p.horizon = static_cast<int>(f.integer("horizon", p.horizon));
        p.half_width = static_cast<int>(f.integer("half_width", p.half_width));
        p.delta_s = f.number("delta_s", p.delta_s);
        p.delta_t = f.number("delta_t", p.delta_t);
        Ns = f.integers("N", Ns);
        if (f.has("trigger")) {
            Fields t(f.object("trigger"), "trigger");
            int l0 = static_cast<int>(t.integer("l0", 4));
            int k = static_cast<int>(t.integer("k", 0));
            t.finish();
            trigger = std::make_pair(l0, k);
        }
    }
    void validate(const Common& c) const override {
        check_reps(c.reps);
        check_positive(p.lambda, "lambda");
        require(p.r >= 0, "r must be non-negative");
        check_positive(p.delta_s, "delta_s");
        check_positive(p.delta_t, "delta_t");
        require(p.horizon >= 0 && p.half_width >= 0, "horizon and half_width must be non-negative");
        require(!Ns.empty(), "N must not be empty");
        for (int n : Ns) require(n >= 0, "N values must be non-negative");
        check_area(survival_box(p), "survival box");
        if (trigger) {
            require(trigger->first >= 2 && trigger->first <= 64, "trigger.l0 must lie in [2, 64]");
            require(trigger->second >= 0 && trigger->second <= 2, "trigger.k must lie in [0, 2]");
            auto rows = detection_schedule(trigger->first, trigger->second);
            const auto& row = rows[trigger->second];
            BigInt side = row.l + row.L + 1;
            require(side * side <= BigInt(static_cast<long long>(kMaxBoxArea)), "trigger geometry is too large");
        }
    }
    Outputs run(const Common& c) const override {
        Outputs o;
        o.stream(5, c.reps, "survival grids");
        auto rows = survival_curve(p, Ns, run_options(c, 5));
        o.files["detect.csv"] = survival_csv(rows);
        if (trigger) {
            o.stream(6, c.reps, "trigger environments");
            auto t = trigger_check(p.lambda, p.r, trigger->first, trigger->second, c.reps, run_options(c, 6));
            ordered_json j;
            j["k"] = t.k;
            j["l"] = t.l;
            j["L"] = t.L;
            j["N"] = t.N;
            j["p_hat"] = t.p_hat.mean;
            j["p_hat_stderr"] = t.p_hat.std_error;
            j["target"] = t.target;
            j["bound"] = t.bound;
            j["flags"] = t.p_hat.flags;
            o.files["trigger.json"] = j.dump(2) + "\n";
        }
        return o;
    }
};

// --- rwre-speed -----------------------------------------------------------------

struct RwreSpeed : Experiment {
    WalkExperiment e;
    double tol = 0.01;
    std::vector<double> vs;

    RwreSpeed() {
        e.H = 100;
        e.cfg = {0.8, 0.3};
        for (int i = 0; i <= 40; ++i) vs.push_back(-1.0 + i * 0.05);
    }
    std::uint64_t default_reps() const override { return 100; }
    void parse(Fields& f) override {
        e.rho = f.number("rho", e.rho);
        e.H = static_cast<int>(f.integer("H", e.H));
        e.cfg.p_bullet = f.number("p_bullet", e.cfg.p_bullet);
        e.cfg.p_circ = f.number("p_circ", e.cfg.p_circ);
        e.offset_grid = static_cast<int>(f.integer("offset_grid", e.offset_grid));
        std::string mode = f.text("mode", to_string(e.mode));
        try {
            e.mode = environment_mode_from_string(mode);
        } catch (const std::exception&) {
            f.fail("unknown mode '" + mode + "'");
        }
        tol = f.number("tol", tol);
        vs = f.numbers("v", vs);
    }
    void validate(const Common& c) const override {
        check_reps(c.reps);
        check_positive(e.rho, "rho");
        require(e.H >= 1 && e.H <= 100000, "H must lie in [1, 100000]");
        require(e.offset_grid >= 1 && e.offset_grid <= 21, "offset_grid must lie in [1, 21]");
        e.cfg.validate();
        check_positive(tol, "tol");
        for (double v : vs) require(v >= -1 && v <= 1, "v values must lie in [-1, 1]");
        double H = e.H;
        if (e.mode == EnvironmentMode::Hammersley) check_area({-H - 2.5, 2 * H + 2.5, -1, H + 0.5}, "environment box");
        double work = static_cast<double>(c.reps) * static_cast<double>(diamond_offsets(e.offset_grid).size()) * H * H;
        require(work <= 1e12, "walk workload exceeds the limit");
    }
    Outputs run(const Common& c) const override {
        Outputs o;
        o.stream(7, c.reps, "environments and walk fields");
        auto table = displacement_table(WalkExperiment{e.rho, e.H, c.reps, e.cfg, e.mode, e.offset_grid},
                                        run_options(c, 7));
        o.files["rwre_sweep.csv"] = sweep_csv(e.rho, e.H, ph_sweep(table, vs));
        auto b = speed_bracket(table, tol);
        ordered_json j;
        j["rho"] = e.rho;
        j["H"] = b.H;
        j["mode"] = to_string(e.mode);
        j["p_bullet"] = e.cfg.p_bullet;
        j["p_circ"] = e.cfg.p_circ;
        j["offsets"] = table.offsets.size();
        j["v_minus"] = b.v_minus;
        j["v_plus"] = b.v_plus;
        o.files["rwre_speed.json"] = j.dump(2) + "\n";
        return o;
    }
};

// --- explpp-checks --------------------------------------------------------------

struct ExpChecks : Experiment {
    double alpha = 0.5;
    int n = 100;
    std::vector<int> increment{8, 6, 6, 4, 5};  // i_max, j_max, row, k, l

    std::uint64_t default_reps() const override { return 400; }
    void parse(Fields& f) override {
        alpha = f.number("alpha", alpha);
        n = static_cast<int>(f.integer("n", n));
        increment = f.integers("increment", increment);
    }
    void validate(const Common& c) const override {
        check_reps(c.reps);
        require(alpha > 0 && alpha < 1, "alpha must lie in (0, 1)");
        require(n >= 1 && double(n + 1) * (n + 1) <= kMaxCells, "n out of range");
        require(increment.size() == 5, "increment must be [i_max, j_max, row, k, l]");
        const auto& v = increment;
        require(v[0] >= 1 && v[1] >= 1 && double(v[0] + 1) * (v[1] + 1) <= kMaxCells, "increment grid out of range");
        require(v[2] >= 0 && v[2] <= v[1] && 0 <= v[3] && v[3] < v[4] && v[4] <= v[0], "increment window out of range");
        require(static_cast<double>(c.reps) * (double(n + 1) * (n + 1) + double(v[0] + 1) * (v[1] + 1)) <= 1e11,
                "workload exceeds the limit");
    }
    Outputs run(const Common& c) const override {
        Outputs o;
        o.stream(8, c.reps, "corner values");
        o.stream(9, c.reps, "row increments");
        auto corner = run_replicates<double>(c.reps, c.workers, [&](std::size_t r) {
            auto s = replicate_stream(run_options(c, 8), r);
            return lpp_top_row(sample_grid(s, alpha, n, n)).back();
        });
        auto inc = run_replicates<double>(c.reps, c.workers, [&](std::size_t r) {
            auto s = replicate_stream(run_options(c, 9), r);
            const auto& v = increment;
            return increments(lpp_times(sample_grid(s, alpha, v[0], v[1])), v[2], v[3], v[4]);
        });
        auto e = mc_estimate(corner);
        double target = n / alpha + n / (1 - alpha);
        bool mean_ok = std::fabs(e.mean - target) <= 3 * e.std_error;
        double rate = 1 - alpha;
        int width = increment[4] - increment[3];
        TestResult ks;
        if (width == 1)
            ks = ks_test(inc, [rate](double x) { return x <= 0 ? 0.0 : -std::expm1(-rate * x); });
        else
            ks = ks_test(inc, [rate, width](double x) { return x <= 0 ? 0.0 : boost::math::gamma_p(width, rate * x); });
        o.pass = mean_ok && ks.p_value >= 1e-3;
        ordered_json j;
        j["alpha"] = alpha;
        j["n"] = n;
        j["corner_mean"] = e.mean;
        j["corner_stderr"] = e.std_error;
        j["corner_target"] = target;
        j["corner_within_3_stderr"] = mean_ok;
        j["increment_width"] = width;
        j["increment_ks_statistic"] = ks.statistic;
        j["increment_ks_p"] = ks.p_value;
        j["verdict"] = o.pass ? "pass" : "fail";
        o.files["explpp_checks.json"] = j.dump(2) + "\n";
        return o;
    }
};

// --- poisson-bound --------------------------------------------------------------

struct PoissonBound : Experiment {
    std::vector<double> lambdas{0.5, 1, 2, 5, 10, 50};
    int points = 20;

    std::uint64_t default_reps() const override { return 1; }
    void parse(Fields& f) override {
        lambdas = f.numbers("lambdas", lambdas);
        points = static_cast<int>(f.integer("points", points));
    }
    void validate(const Common&) const override {
        require(!lambdas.empty(), "lambdas must not be empty");
        for (double l : lambdas) require(l > 0 && l <= 1e6, "lambdas must lie in (0, 1e6]");
        require(points >= 2 && points <= 10000, "points must lie in [2, 10000]");
    }
    Outputs run(const Common&) const override {
        Outputs o;
        std::ostringstream os;
        os << "lambda,x,side,exact,bound,holds\n";
        for (double lambda : lambdas) {
            double top = 5 * lambda, bottom = top * 1e-3;
            for (int i = 0; i < points; ++i) {
                double x = bottom * std::pow(top / bottom, i / double(points - 1));
                double bound = poisson_tail_bound(lambda, x);
                for (TailSide side : {TailSide::Upper, TailSide::Lower}) {
                    double exact = poisson_tail_exact(lambda, x, side);
                    bool holds = exact <= bound * (1 + 1e-12);
                    o.pass = o.pass && holds;
                    os << fmt_double(lambda) << ',' << fmt_double(x) << ','
                       << (side == TailSide::Upper ? "upper" : "lower") << ',' << fmt_double(exact) << ','
                       << fmt_double(bound) << ',' << (holds ? 1 : 0) << '\n';
                }
            }
        }
        o.files["poisson_bound.csv"] = os.str();
        return o;
    }
};

// --- schedule -------------------------------------------------------------------

struct Schedule : Experiment {
    std::string family = "rwre";
    ScheduleParams rp;
    BigInt l0 = boost::multiprecision::pow(BigInt(10), 100);
    int k_max = 10;

    std::uint64_t default_reps() const override { return 1; }
    void parse(Fields& f) override {
        family = f.text("family", family);
        if (family == "rwre") {
            rp.L0 = big_integer(f, "L0", rp.L0);
            rp.rho = f.number("rho", rp.rho);
            rp.delta = f.number("delta", rp.delta);
            rp.C1 = f.number("C1", rp.C1);
            rp.rho_c_minus = f.number("rho_c_minus", rp.rho_c_minus);
            rp.v_target = f.number("v_target", rp.v_target);
        } else if (family == "detection") {
            l0 = big_integer(f, "l0", l0);
        } else {
            f.fail("family must be 'rwre' or 'detection'");
        }
        k_max = static_cast<int>(f.integer("k_max", k_max));
        rp.k_max = k_max;
    }
    void validate(const Common&) const override {
        require(k_max >= 0 && k_max <= 12, "k_max must lie in [0, 12]");
        if (family == "detection") {
            require(l0 >= 2, "l0 must be at least 2");
            require(boost::multiprecision::msb(l0) < 4096, "l0 is too large");
        } else {
            require(rp.L0 >= 16, "L0 must be at least 16");
            require(boost::multiprecision::msb(rp.L0) < 4096, "L0 is too large");
            check_positive(rp.delta, "delta");
            check_positive(rp.C1, "C1");
        }
    }
    Outputs run(const Common&) const override {
        Outputs o;
        if (family == "rwre") {
            auto t = rwre_schedule(rp);
            o.files["schedule.csv"] = schedule_csv(t);
            o.extra = {{"k6", t.k6}, {"k7", t.k7}, {"eps_tail_k6", t.eps_tail_k6}, {"v_tail_k7", t.v_tail_k7}};
        } else {
            std::ostringstream os;
            os << "k,l,L\n";
            for (const auto& r : detection_schedule(l0, k_max)) os << r.k << ',' << r.l.str() << ',' << r.L.str() << '\n';
            o.files["schedule.csv"] = os.str();
        }
        return o;
    }
};

// --- selftest -------------------------------------------------------------------

struct SelfTest : Experiment {
    std::vector<int> only;
    std::vector<double> seconds;

    std::uint64_t default_reps() const override { return 1; }
    void parse(Fields& f) override { only = f.integers("criteria", {}); }
    void validate(const Common&) const override {
        for (int id : only) require(id >= 1 && id <= 11, "criteria must lie in [1, 11]");
    }
    Outputs run(const Common& c) const override {
        Outputs o;
        auto r = run_acceptance(AcceptanceOptions{c.seed, c.workers, only});
        o.files["selftest_report.json"] = acceptance_report(r);
        ordered_json t = ordered_json::array();
        for (std::size_t i = 0; i < r.results.size(); ++i) {
            t.push_back({{"id", r.results[i].id}, {"pass", r.results[i].pass}, {"seconds", r.seconds[i]}});
            o.pass = o.pass && r.results[i].pass;
        }
        o.extra = {{"criteria", t}};
        o.streams.push_back({{"experiment", "1000 + 64 * criterion + part"},
                             {"stream_id", "derive_stream_id(experiment, replicate)"},
                             {"purpose", "acceptance suite"}});
        return o;
    }
};

std::unique_ptr<Experiment> make_experiment(const std::string& kind) {
    if (kind == "simulate") return std::make_unique<Simulate>();
    if (kind == "decouple") return std::make_unique<Decouple>(false);
    if (kind == "decouple-exp") return std::make_unique<Decouple>(true);
    if (kind == "exitpoint") return std::make_unique<ExitPoint>();
    if (kind == "detect") return std::make_unique<Detect>();
    if (kind == "rwre-speed") return std::make_unique<RwreSpeed>();
    if (kind == "explpp-checks") return std::make_unique<ExpChecks>();
    if (kind == "poisson-bound") return std::make_unique<PoissonBound>();
    if (kind == "schedule") return std::make_unique<Schedule>();
    if (kind == "selftest") return std::make_unique<SelfTest>();
    throw InvalidConfiguration("unknown experiment kind '" + kind + "'");
}

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> reps;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidConfiguration("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

int run_command(const std::string& kind, const Flags& fl) {
    auto start = std::chrono::steady_clock::now();
    auto exp = make_experiment(kind);

    json cfg = json::object();
    if (!fl.config.empty()) {
        try {
            cfg = json::parse(read_file(fl.config));
        } catch (const json::parse_error& e) {
            throw InvalidConfiguration(std::string("config is not valid JSON: ") + e.what());
        }
    }
    Fields f(cfg, "config");
    std::string declared = f.text("kind", kind);
    require(declared == kind, "config kind '" + declared + "' does not match subcommand '" + kind + "'");
    Common c;
    c.kind = kind;
    std::int64_t seed = f.integer("seed", 1);
    std::int64_t reps = f.integer("reps", static_cast<std::int64_t>(exp->default_reps()));
    std::int64_t workers = f.integer("workers", static_cast<std::int64_t>(default_workers()));
    std::string out = f.text("out", ".");
    require(seed >= 0, "seed must be non-negative");
    require(reps >= 1, "reps must be at least 1");
    require(workers >= 1 && workers <= 1024, "workers must lie in [1, 1024]");
    c.seed = fl.seed.value_or(static_cast<std::uint64_t>(seed));
    c.reps = fl.reps.value_or(static_cast<std::uint64_t>(reps));
    c.workers = fl.workers.value_or(static_cast<unsigned>(workers));
    if (fl.out) out = *fl.out;
    require(c.workers >= 1, "workers must be at least 1");
    exp->parse(f);
    f.finish();
    exp->validate(c);

    // Effective configuration, with flag overrides applied; workers is left
    // out because results do not depend on it.
    json effective = cfg;
    effective["kind"] = kind;
    effective["seed"] = c.seed;
    effective["reps"] = c.reps;
    effective.erase("workers");
    effective.erase("out");
    std::string canonical = effective.dump();

    Outputs o = exp->run(c);

    fs::path dir(out);
    fs::create_directories(dir);
    for (const auto& [name, text] : o.files) write_file(dir / name, text);

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ordered_json m;
    m["kind"] = kind;
    m["config"] = json::parse(canonical);
    m["config_hash"] = "fnv1a64:" + hex64(fnv1a(canonical));
    m["seed"] = c.seed;
    m["reps"] = c.reps;
    m["workers"] = c.workers;
    m["streams"] = o.streams;
    m["outputs"] = ordered_json::array();
    for (const auto& kv : o.files) m["outputs"].push_back(kv.first);
    m["versions"] = {{"hpsim", HPSIM_VERSION},
                     {"compiler", __VERSION__},
                     {"cxx_standard", __cplusplus},
                     {"boost", BOOST_LIB_VERSION}};
    m["wall_seconds"] = wall;
    m["verdict"] = o.pass ? "pass" : "fail";
    if (!o.extra.empty()) m["details"] = o.extra;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
    std::cout << kind << ": " << (o.pass ? "pass" : "fail") << " (" << dir.string() << ")\n";
    return o.pass ? kPass : kStatFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification tools for Hammersley's process and related models"};
    app.require_subcommand(1);
    Flags fl;
    std::uint64_t seed = 0, reps = 0;
    std::string out;
    unsigned workers = 0;
    const std::vector<std::pair<std::string, std::string>> kinds{
        {"simulate", "stationary counts and flux"},
        {"decouple", "decoupling inequality for the particle process"},
        {"decouple-exp", "decoupling inequality for exponential LPP"},
        {"exitpoint", "exit-point samples"},
        {"detect", "target survival in the detection model"},
        {"rwre-speed", "random walk speed bracket"},
        {"explpp-checks", "exponential LPP law checks"},
        {"poisson-bound", "Poisson tail bound table"},
        {"schedule", "scale schedule tables"},
        {"selftest", "full acceptance suite"}};
    std::vector<CLI::App*> subs;
    std::vector<CLI::Option*> seed_opts, reps_opts, workers_opts, out_opts;
    for (const auto& [name, desc] : kinds) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", fl.config, "JSON config file")->check(CLI::ExistingFile);
        seed_opts.push_back(sub->add_option("--seed", seed, "base seed"));
        reps_opts.push_back(sub->add_option("--reps", reps, "number of replicates"));
        workers_opts.push_back(sub->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u)));
        out_opts.push_back(sub->add_option("--out", out, "output directory"));
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kError;
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        if (seed_opts[i]->count()) fl.seed = seed;
        if (reps_opts[i]->count()) fl.reps = reps;
        if (workers_opts[i]->count()) fl.workers = workers;
        if (out_opts[i]->count()) fl.out = out;
        try {
            return run_command(subs[i]->get_name(), fl);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kError;
        }
    }
    return kError;
}
