#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "hpsim/harness.hpp"
#include "hpsim/rng.hpp"

namespace hpsim {

using SpaceTimeBox = Rect;

void validate_box(const SpaceTimeBox& box);
bool in_box(const SpaceTimeBox& box, double x, double t);

// One stationary realization on a box: sources on the bottom edge (rate
// lambda), sinks on the left edge (rate 1/lambda), clocks inside (rate 1).
struct BoxEnvironment {
    double lambda = 1.0;
    SpaceTimeBox box;
    PointSet1D sources;
    PointSet1D sinks;
    PointSet2D clocks;
};

BoxEnvironment sample_box_environment(RandomStream& s, double lambda, const SpaceTimeBox& box);
// Same clocks, boundary data replaced.
BoxEnvironment with_boundary(const BoxEnvironment& env, double lambda, PointSet1D sources, PointSet1D sinks);

std::string dump_environment(const BoxEnvironment& env);
BoxEnvironment load_environment(const std::string& json_text);

// Longest chain strictly increasing in both coordinates among points in
// (x0, x1] x (t0, t1].
std::size_t lis_count(const PointSet2D& points, const SpaceTimeBox& rect);

// Last-passage values L(x, t) evaluated on demand.
class LppField {
public:
    LppField(BoxEnvironment env, bool use_sinks);

    const BoxEnvironment& environment() const { return env_; }
    bool use_sinks() const { return use_sinks_; }

    std::int64_t value(double x, double t) const;
    // L(x0, t): sinks up to time t (zero without sinks).
    std::int64_t base(double t) const;
    // Jump locations of x -> L(x, t), repeated by jump size, ascending.
    std::vector<double> profile(double t) const;

private:
    struct Mark {
        double x;
        double key_major;
        double key_minor;
    };
    BoxEnvironment env_;
    bool use_sinks_;
    std::vector<Mark> order_;
};

LppField lpp_field(const BoxEnvironment& env, bool use_sinks = true);

enum class EventKind { BulkJump, RightEntry, LeftExit, UnusedSink };

const char* to_string(EventKind k);

struct ParticleEvent {
    double time = 0.0;
    EventKind kind = EventKind::BulkJump;
    std::int64_t index = -1;  // rank of the moving particle before the event
    double from = 0.0;
    double to = 0.0;
};

struct ParticleHistory {
    SpaceTimeBox box;
    std::vector<double> initial;
    std::vector<ParticleEvent> events;

    std::vector<double> configuration_at(double t) const;
    std::size_t count(double a, double b, double t) const;
};

ParticleHistory evolve_particles(const BoxEnvironment& env);

// Walks forward through a history; advance_to must be called with
// non-decreasing times.
class HistoryCursor {
public:
    explicit HistoryCursor(const ParticleHistory& h);
    void advance_to(double t);
    const std::deque<double>& positions() const { return pos_; }
    std::size_t next_event() const { return next_; }
    double time() const { return time_; }

private:
    const ParticleHistory* h_;
    std::deque<double> pos_;
    std::size_t next_ = 0;
    double time_;
};

void apply_event(std::deque<double>& config, const ParticleEvent& e);

std::int64_t measure_query(const LppField& f, double a, double b, double t);
std::int64_t measure_query(const ParticleHistory& h, double a, double b, double t);

struct ExitPointRecord {
    double z = 0.0;          // box-relative; > 0 along sources, <= 0 along sinks
    std::int64_t value = 0;  // L(x, t)
};

ExitPointRecord exit_point(const BoxEnvironment& env, double x, double t, bool use_sinks = true);

// Number of particles crossing the vertical line at a, right to left,
// during (t1, t2]. At the left edge this counts left exits.
std::size_t flux_count(const ParticleHistory& h, double a, double t1, double t2);

struct ExitSample {
    std::vector<double> positions;  // box.x0 + z for exits along the sources
    std::size_t sink_exits = 0;     // exits along the left edge, not in positions
};

// Exit points at (x, t) from independent environments on `box`.
ExitSample sample_exit_positions(double lambda, const SpaceTimeBox& box, double x, double t, std::size_t reps,
                                 const RunOptions& opt);

enum class CheckVerdict { HypothesisNotMet, Verified, Violation };

const char* to_string(CheckVerdict v);

// If the exit point at (xc, tc) is >= 0, the fields with and without sinks
// must agree at every query point with x >= xc and t <= tc.
CheckVerdict check_no_sinks_restriction(const BoxEnvironment& env, double xc, double tc,
                                        std::span<const Point2> queries);

}  // namespace hpsim
