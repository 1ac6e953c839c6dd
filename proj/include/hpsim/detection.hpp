#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hpsim/hammersley.hpp"
#include "hpsim/harness.hpp"
#include "hpsim/stats.hpp"

namespace hpsim {

using BigInt = boost::multiprecision::cpp_int;

// Integer sites (x, n) with x in [x_lo, x_hi], n in [n_lo, n_hi]. Site (x, n)
// sits at space x * delta_s and covers the time slab [n, n + 1) * delta_t.
struct SiteGrid {
    int x_lo = 0, x_hi = 0;
    int n_lo = 0, n_hi = 0;
    double r = 0.0;
    double lambda = 0.0;
    double delta_s = 1.0, delta_t = 1.0;
    std::vector<std::uint8_t> open;

    static SiteGrid all_open(int x_lo, int x_hi, int n_lo, int n_hi);
    int width() const { return x_hi - x_lo + 1; }
    int height() const { return n_hi - n_lo + 1; }
    bool contains(int x, int n) const { return x >= x_lo && x <= x_hi && n >= n_lo && n <= n_hi; }
    bool is_open(int x, int n) const;
    void set_open(int x, int n, bool v);
};

struct SiteWindow {
    int x_lo = 0, x_hi = 0;
    int n_lo = 0, n_hi = 0;
};

// A site is closed iff some particle comes within distance < r of it while
// the slab lasts.
SiteGrid openness_grid(const ParticleHistory& h, double r, const SiteWindow& w, double delta_s = 1.0,
                       double delta_t = 1.0);

struct ReachEvolution {
    std::vector<std::vector<int>> sets;  // sets[i] = reachable x at row n_lo + i
    int detected_at = -1;                 // first row index with empty set, -1 if it survived
    bool censored = false;                // some jump would have left the window

    bool survived() const { return detected_at < 0; }
};

// The target starts at x = 0 on the first row and jumps by at most N sites
// per row, landing only on open sites.
ReachEvolution reach_dp(const SiteGrid& g, int N);

struct SurvivalParams {
    double lambda = 1.0;
    double r = 0.5;
    int N = 1;
    int horizon = 10;
    int half_width = 10;
    double delta_s = 1.0, delta_t = 1.0;
    std::size_t reps = 1000;
};

SpaceTimeBox survival_box(const SurvivalParams& p);
SiteGrid survival_grid(RandomStream& s, const SurvivalParams& p);
// Flag "censored" is set when any replicate pruned a jump at the window edge.
McEstimate estimate_survival(const SurvivalParams& p, const RunOptions& opt);

struct SurvivalRow {
    int N = 0;
    McEstimate estimate;
    double censored_fraction = 0.0;
};

// One grid per replicate, shared by every N in the list.
std::vector<SurvivalRow> survival_curve(const SurvivalParams& p, const std::vector<int>& Ns, const RunOptions& opt);
std::string survival_csv(const std::vector<SurvivalRow>& rows);

struct ScaleRow {
    int k = 0;
    BigInt l;
    BigInt L;
};

// l_{k+1} = isqrt(l_k) * l_k, L_k = floor((3/2 + 1/k) l_k), L_0 = floor(3 l_0 / 2).
std::vector<ScaleRow> detection_schedule(const BigInt& l0, int k_max);

// Open path from [0, l] x {0} that stays in [0,l]x[0,L] U [l,l+L]x[L,l+L]
// (interpolated) and reaches the right edge of the upper part, where
// l = l_k, L = L_k from the schedule started at l0. The sets are anchored at
// site (0, 0) of the grid.
bool crossing_exists(const SiteGrid& g, int R, int k, int l0);
// Same test with the rectangle sizes given directly.
bool crosses_l_shape(const SiteGrid& g, int R, int l, int L);

// Open path crossing [0, l] x [0, L] from bottom row to top row.
bool vertical_crossing_exists(const SiteGrid& g, int R, int l, int L);

double j_event_probability(double lambda, double r);
// Fraction of replicates in which the slab [1, 2) at x = 0 sees a particle
// within distance r at time 1 or a clock within distance r during the slab.
McEstimate j_event_monte_carlo(double lambda, double r, std::size_t reps, const RunOptions& opt);

struct TriggerReport {
    int k = 0;
    int l = 0, L = 0, N = 0;
    McEstimate p_hat;      // P[no open vertical crossing]
    double target = 0.0;   // l^-4
    double bound = 0.0;    // (2l + 1)(1 - e^{-2r(lambda+1)})^floor(l / 2r)
};

TriggerReport trigger_check(double lambda, double r, int l0, int k, std::size_t reps, const RunOptions& opt);

}  // namespace hpsim
