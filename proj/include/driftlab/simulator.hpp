#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "driftlab/fields.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

struct Event {
  double tau;
  double signed_jump;  // > 0: up-process fired, < 0: down-process fired
  double z_after;
  bool operator==(const Event&) const = default;
};

/// One realized path of Z = Lambda - M on [0, horizon].
struct Trajectory {
  std::uint64_t seed = 0;
  double z0 = 0.0;
  double horizon = 0.0;
  std::vector<Event> events;

  double final_position() const { return events.empty() ? z0 : events.back().z_after; }
  /// Z(tau), right-continuous.
  double position_at(double tau) const;

  bool operator==(const Trajectory&) const = default;
};

/// Throws std::invalid_argument if the signed drift exceeds 1/2 in magnitude
/// anywhere on the scan grid x in [-100, 100], t in [0, 1e4]. Only the signed
/// family is checked; the others are clipped into range by construction.
void check_simulable(const DriftField& field);

/// Streams the events of one path to `on_event`, which returns false to stop
/// early. The total jump rate lambda + mu is identically 1, so thinning against
/// the majorant 2 accepts every candidate with probability 1/2; the two steps
/// are folded into one exponential(1) clock followed by an up/down split with
/// probability lambda at the pre-jump state.
template <class OnEvent>
void for_each_event(const RateField& rf, const JumpLaw& up, const JumpLaw& down, double horizon,
                    Rng& rng, double z0, OnEvent&& on_event) {
  double tau = 0.0;
  double z = z0;
  for (;;) {
    tau += exponential(rng, 1.0);
    if (!(tau <= horizon)) return;
    const double lambda = rf.at(z, tau).lambda;
    const double jump = uniform_open(rng) < lambda ? up.sample(rng) : -down.sample(rng);
    z += jump;
    if (!on_event(Event{tau, jump, z})) return;
  }
}

/// Exact event-driven path. Deterministic in (inputs, seed); the path stream
/// is Rng{seed}.
Trajectory simulate_walk(const RateField& rf, const JumpLaw& up, const JumpLaw& down,
                         double horizon, std::uint64_t seed, double z0 = 0.0);

/// CSV with header `tau,signed_jump,z_after`, round-trip precision.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// ---------------------------------------------------------------------------
// Compensators

enum class Side { Up, Down };

/// Jump epochs and marks of one compound Poisson component, times strictly
/// increasing. Events past the evaluation time are allowed; the first of them
/// supplies the mark of the final partial interval.
struct MarkedEvents {
  std::vector<double> times;
  std::vector<double> marks;
};

/// Intensity along a path as a function of time, with the times at which it
/// may jump (state changes). Integration splits at the breakpoints.
class RatePath {
 public:
  explicit RatePath(std::function<double(double)> rate, std::vector<double> breakpoints = {});

  double operator()(double s) const { return rate_(s); }
  std::span<const double> breakpoints() const { return breakpoints_; }

 private:
  std::function<double(double)> rate_;
  std::vector<double> breakpoints_;
};

RatePath constant_rate(double rate);

/// Rate of one side of the walk along a realized trajectory:
/// s -> lambda_{Z(s-), s} (Up) or mu_{Z(s-), s} (Down).
RatePath rate_path_along(const Trajectory& traj, const RateField& rf, Side side);

/// Epochs and absolute jump sizes of the up- or down-process of a trajectory.
MarkedEvents component_events(const Trajectory& traj, Side side);

/// Sum of the marks with epoch <= tau.
double component_value(const MarkedEvents& events, double tau);

/// Compound Poisson process with intensity `rate` bounded by `majorant`,
/// sampled by thinning on [0, horizon]. With `lookahead`, sampling continues
/// past the horizon until one more event is produced.
MarkedEvents simulate_compound_poisson(const std::function<double(double)>& rate, double majorant,
                                       const JumpLaw& law, double horizon, std::uint64_t seed,
                                       bool lookahead = true);

enum class TailMark { NextMark, MeanMark };

struct LiteralCompensator {
  double value;
  TailMark tail;  // which mark weighted [tau_k, tau]
};

/// sum_i X_i * integral of rate over (tau ^ tau_{i-1}, tau ^ tau_i]. The last
/// partial interval uses the next realized mark when one is present, else the
/// mean mark 1. Throws std::invalid_argument on unordered or mismatched events.
/// Quadrature: 3-point Gauss-Legendre on substeps <= 0.01 between
/// breakpoints, so the rate is never sampled at a jump epoch.
LiteralCompensator compensator_literal(const MarkedEvents& events, const RatePath& rate,
                                       double tau);

/// integral_0^tau rate(s) ds (mean mark 1), adaptive Gauss-Kronrod to 1e-9.
double compensator_ensemble(const RatePath& rate, double tau);

struct CompensatorReport {
  double tau;
  double raw_value;
  double literal_value;
  TailMark literal_tail;
  double ensemble_value;
  double residual_literal;
  double residual_ensemble;
};

CompensatorReport compensator_report(const MarkedEvents& events, const RatePath& rate, double tau);

// ---------------------------------------------------------------------------

struct WaldCheck {
  double empirical_second_moment;
  double bound;  // sigma * (2 + Var X + Var Y)
  bool pass;     // empirical <= 1.05 * bound
};

/// Mean of (Z(sigma) - z0)^2 over fresh paths of length sigma. Path i uses
/// stream_seed(seed, i). Requires sigma >= 0 and n_paths >= 100.
WaldCheck wald_second_moment_check(const RateField& rf, const JumpLaw& up, const JumpLaw& down,
                                   double sigma, std::size_t n_paths, std::uint64_t seed,
                                   unsigned workers = 1);

}  // namespace driftlab
