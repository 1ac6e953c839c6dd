#pragma once

#include <cstdint>
#include <string>

#include "hpsim/hammersley.hpp"
#include "hpsim/harness.hpp"
#include "hpsim/stats.hpp"

namespace hpsim {

// Two densities driven by one clock set.
struct CoupledEnvironments {
    SpaceTimeBox box;
    PointSet2D clocks;
    double lambda_lo = 1.0, lambda_hi = 1.0;
    PointSet1D sources_lo, sinks_lo;
    PointSet1D sources_hi, sinks_hi;

    BoxEnvironment lo() const;
    BoxEnvironment hi() const;
};

// Shared clocks, independent boundary data at each density.
CoupledEnvironments basic_couple(RandomStream& s, double lambda_lo, double lambda_hi, const SpaceTimeBox& box);

// Shared clocks, ordered boundary data: the low-density sources are a
// thinning of the high-density sources and the high-density sinks are a
// thinning of the low-density sinks. The particle configurations then stay
// ordered (low subset of high) for all times.
CoupledEnvironments ordered_couple(RandomStream& s, double lambda_lo, double lambda_hi, const SpaceTimeBox& box);

// True iff the multiset `lo` is contained in `hi` (both sorted).
bool sorted_multiset_subset(std::span<const double> lo, std::span<const double> hi);

// True iff every (x, y] inside (a, b] holds at least as many `hi` points as `lo`.
bool dominates_on(std::span<const double> lo, std::span<const double> hi, double a, double b);

// Pathwise comparison check. Returns HypothesisNotMet when the exit point
// of the low field at b lies to the right of the high field's at a.
CheckVerdict check_comparison_lemma(const CoupledEnvironments& c, double a, double b, double t);

struct DominationParams {
    double lambda = 0.8;
    double lambda_prime = 1.0;
    double a = 0.0, b = 1.0;
    double t = 10.0;
    double s_len = 1.0;
    std::size_t reps = 1000;
};

// Probability that the low-density configuration is dominated by the
// high-density one on every subinterval of (a, b] for all times in
// [t, t + s_len]. Range problems are reported as flags.
McEstimate estimate_domination_event(const DominationParams& p, const RunOptions& opt);
double domination_time_threshold(const DominationParams& p);

enum class FunctionKind { AtLeast, AtMost, MaxOverWindow };
enum class Direction { NonDecreasing, NonIncreasing };

const char* to_string(FunctionKind k);
const char* to_string(Direction d);

// f depends on the count in the interval (lo, hi] over the time window
// [t_lo, t_hi]:
//   AtLeast       1 if the count reaches `threshold` at some time
//   AtMost        1 if the count stays <= `threshold` at all times
//   MaxOverWindow min(1, max count / threshold)
struct MonotoneFunctionSpec {
    FunctionKind kind = FunctionKind::AtLeast;
    double lo = 0.0, hi = 1.0;
    double t_lo = 0.0, t_hi = 1.0;
    double threshold = 1.0;
    Direction direction = Direction::NonDecreasing;
};

Direction natural_direction(FunctionKind k);
void validate_function(const MonotoneFunctionSpec& f, const SpaceTimeBox& support_box);
double evaluate_function(const MonotoneFunctionSpec& f, const ParticleHistory& h);

double box_distance(const SpaceTimeBox& a, const SpaceTimeBox& b);
double box_perimeter(const SpaceTimeBox& b);

struct DecouplingReport {
    double lhs = 0.0, lhs_se = 0.0;
    double f1_mean = 0.0, f1_se = 0.0;
    double f2_mean = 0.0, f2_se = 0.0;
    double rhs = 0.0;
    double combined_se = 0.0;
    double slack = 0.0;
    double epsilon = 0.0;
    double distance = 0.0;
    double perimeter1 = 0.0, perimeter2 = 0.0;
    std::size_t reps = 0;
    bool pass = false;
};

// Combines the three Monte-Carlo pieces into the report (shared with the
// lattice version).
DecouplingReport make_decoupling_report(std::span<const double> joint, std::span<const double> f1,
                                        std::span<const double> f2);

DecouplingReport decoupling_check(const MonotoneFunctionSpec& f1, const MonotoneFunctionSpec& f2,
                                  const SpaceTimeBox& b1, const SpaceTimeBox& b2, double lambda,
                                  double lambda_prime, std::size_t reps, const RunOptions& opt);

std::string report_json(const DecouplingReport& r);

}  // namespace hpsim
