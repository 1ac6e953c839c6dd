#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hpsim/hammersley.hpp"
#include "hpsim/harness.hpp"
#include "hpsim/stats.hpp"

namespace hpsim {

struct Vertex {
    int x = 0;
    int n = 0;
    friend bool operator==(const Vertex&, const Vertex&) = default;
};

// (2Z)^2 U ((1,1) + (2Z)^2)
inline bool on_lattice(const Vertex& v) { return ((v.x + v.n) & 1) == 0; }

struct LatticeRegion {
    int x_lo = 0, x_hi = 0;
    int n_lo = 0, n_hi = 0;
    bool contains(int x, int n) const { return x >= x_lo && x <= x_hi && n >= n_lo && n <= n_hi; }
};

// One uniform in (0, 1) per lattice vertex, computed from the vertex
// coordinates, so the value at a vertex does not depend on the region.
class UniformField {
public:
    UniformField(std::uint64_t key, LatticeRegion region);
    double at(int x, int n) const;
    std::uint64_t key() const { return key_; }
    const LatticeRegion& region() const { return region_; }

private:
    std::uint64_t key_;
    LatticeRegion region_;
};

UniformField sample_uniform_field(RandomStream& s, const LatticeRegion& region);

enum class EnvironmentMode { Hammersley, ForcedDense, ForcedEmpty };

const char* to_string(EnvironmentMode m);
EnvironmentMode environment_mode_from_string(const std::string& s);

// eta_n(I_x) > 0 for integer (x, n), I_x = (x - 1/2, x + 1/2).
class Occupancy {
public:
    static Occupancy from_history(const ParticleHistory& h);
    static Occupancy forced(bool dense, const LatticeRegion& region);

    const LatticeRegion& region() const { return region_; }
    bool occupied(int x, int n) const;

private:
    LatticeRegion region_;
    std::vector<std::uint8_t> bits_;
    int forced_ = -1;  // -1: table, 0: empty, 1: dense
};

struct WalkConfig {
    double p_bullet = 0.5;  // right-step probability next to a particle
    double p_circ = 0.5;    // right-step probability otherwise
    void validate() const;
};

// Next position from vertex (x, n).
int walk_step(const Occupancy& occ, const UniformField& u, int x, int n, const WalkConfig& cfg);

// Positions X_0 .. X_H of the walk started at w.
std::vector<int> run_walk(const Occupancy& occ, const UniformField& u, Vertex w, int H, const WalkConfig& cfg);
std::vector<int> run_walk(const ParticleHistory& h, const UniformField& u, Vertex w, int H, const WalkConfig& cfg);

enum class EventSide { Upper, Lower };

const char* to_string(EventSide s);

struct Offset {
    double x = 0.0;
    double t = 0.0;
};

// Offsets on a res x res grid over [-1,1]^2 restricted to |x| + |t| <= 1,
// plus the origin.
std::vector<Offset> diamond_offsets(int res);

struct WalkExperiment {
    double rho = 1.0;  // lambda = rho^{-1/2}
    int H = 100;
    std::size_t reps = 100;
    WalkConfig cfg;
    EnvironmentMode mode = EnvironmentMode::Hammersley;
    int offset_grid = 5;
};

// Per replicate and offset: max and min over lattice starts y of X_H^y - pi_1(y).
struct DisplacementTable {
    std::vector<Offset> offsets;
    std::vector<std::vector<int>> max_disp;  // [rep][offset]
    std::vector<std::vector<int>> min_disp;
    int H = 0;
};

DisplacementTable displacement_table(const WalkExperiment& e, const RunOptions& opt);

// Estimate for the offset with the largest event frequency; that offset is
// recorded as a flag.
McEstimate estimate_pH(const DisplacementTable& t, EventSide side, double v);
McEstimate estimate_pH(EventSide side, double v, const WalkExperiment& e, const RunOptions& opt);

struct SpeedBracket {
    double v_minus = 0.0;
    double v_plus = 0.0;
    int H = 0;
};

SpeedBracket speed_bracket(const DisplacementTable& t, double tol);
SpeedBracket speed_bracket(const WalkExperiment& e, double tol, const RunOptions& opt);

struct SweepRow {
    double v = 0.0;
    EventSide side = EventSide::Upper;
    McEstimate estimate;
};

std::vector<SweepRow> ph_sweep(const DisplacementTable& t, const std::vector<double>& vs);
std::string sweep_csv(double rho, int H, const std::vector<SweepRow>& rows);

struct ScheduleRow {
    int k = 0;
    boost::multiprecision::cpp_int L;
    boost::multiprecision::cpp_int l;
    double eps = 0.0;
    double rho = 0.0;      // NaN before k6
    double v_tilde = 0.0;  // NaN before k7
};

struct ScheduleTable {
    std::vector<ScheduleRow> rows;
    int k6 = 0;
    int k7 = 0;
    double eps_tail_k6 = 0.0;
    double v_tail_k7 = 0.0;
};

struct ScheduleParams {
    boost::multiprecision::cpp_int L0 = boost::multiprecision::cpp_int(10000000000ULL);
    double rho = 0.1;
    double delta = 0.05;
    double C1 = 1.0;
    double rho_c_minus = 0.5;
    double v_target = 0.6;  // v_-(rho_c- - delta)
    int k_max = 10;
};

ScheduleTable rwre_schedule(const ScheduleParams& p);
std::string schedule_csv(const ScheduleTable& t);

// Natural log of a positive big integer.
double big_log(const boost::multiprecision::cpp_int& v);

}  // namespace hpsim
