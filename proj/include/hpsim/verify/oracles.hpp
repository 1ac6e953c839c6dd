#pragma once

// Slow, independent reference implementations used by the tests and the
// acceptance suite. None of these share code paths with the fast versions.

#include <cstdint>
#include <vector>

#include "hpsim/detection.hpp"
#include "hpsim/exp_lpp.hpp"
#include "hpsim/hammersley.hpp"
#include "hpsim/stats.hpp"

namespace hpsim::oracle {

// Longest chain by checking every subset (n <= 20).
std::size_t lis_subsets(const std::vector<Point2>& pts);

// L(x, t) by enumerating every chain of clocks and attaching the best
// boundary prefix in front of it.
std::int64_t lpp_value(const BoxEnvironment& env, double x, double t, bool use_sinks = true);

// Rightmost exit point by evaluating the boundary objective on every
// breakpoint and every gap midpoint, each evaluated by subset enumeration.
ExitPointRecord exit_point(const BoxEnvironment& env, double x, double t, bool use_sinks = true);

// Particle positions at time t by simulating the jump rule literally,
// one mark at a time, without the sorted-container shortcuts.
std::vector<double> particles_at(const BoxEnvironment& env, double t);

// h(x) from its integral form, adaptive Gauss-Kronrod.
double chernoff_h_quadrature(double x);

// Poisson tail summed in 50-digit decimal arithmetic.
double poisson_tail_highprec(double lambda, double x, TailSide side);

// Best path weight to (i, j) by listing every up-right path.
double exp_passage_time(const ExpLppGrid& grid, int i, int j);
// Exit of the best path found by the same enumeration.
ExpExitRecord exp_exit_point(const ExpLppGrid& grid, int k, int n);

// Site openness by scanning every site against the particle configuration
// at the start of its slab and after every mark inside the slab.
SiteGrid openness_grid(const BoxEnvironment& env, double r, const SiteWindow& w, double delta_s = 1.0,
                       double delta_t = 1.0);

// Reachable sets by walking every target path from the origin.
ReachEvolution reach_sets(const SiteGrid& g, int N);

// Crossing of [0,l]x[0,L] U [l,l+L]x[L,l+L] by depth-first search over
// S_R paths, testing each interpolated step against both rectangles with
// exact rational arithmetic.
bool crossing_exists(const SiteGrid& g, int R, int l, int L);

}  // namespace hpsim::oracle
