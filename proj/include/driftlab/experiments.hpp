#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftlab/classifier.hpp"
#include "driftlab/fields.hpp"

namespace driftlab {

struct WalkConfig {
  RateField rates;
  JumpLaw up;
  JumpLaw down;
};

/// Empirical recurrence proxy: after the first time |Z| >= L, does the path
/// re-enter the band [-a, a] before the horizon?
struct RecurrenceExperiment {
  WalkConfig walk;
  std::size_t n_paths = 400;
  double horizon = 2e4;
  double excursion_level = 50.0;  // L
  double return_band = 1.0;       // a
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument unless L > a > 0, n_paths >= 1, horizon >= 0.
  void validate() const;
};

struct PathOutcome {
  std::size_t path;
  std::uint64_t seed;  // stream seed; simulate_walk(..., seed) replays the path
  bool reached_level;
  double first_hit_time;  // NaN when the level was never reached
  bool returned;
  double final_z;
};

struct Interval {
  double lo;
  double hi;
};

/// Wilson score interval; NaN bounds when n == 0.
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

struct ExperimentReport {
  std::size_t n_paths = 0;
  std::size_t n_reached = 0;
  std::size_t n_returned = 0;
  double reached_L_fraction = 0.0;
  /// Over paths that reached L; NaN when none did.
  double returned_fraction = 0.0;
  Interval returned_ci{0.0, 0.0};
  double mean_final_position = 0.0;
  double runtime_seconds = 0.0;
  std::vector<std::string> warnings;
  std::vector<PathOutcome> paths;
};

/// Path i runs on stream_seed(exp.seed, i); results are reduced in path order,
/// so every field except runtime_seconds is independent of `workers`.
ExperimentReport run_recurrence_experiment(const RecurrenceExperiment& exp, unsigned workers = 1);

/// CSV with header `path,seed,reached_L,first_hit_time,returned,final_z`.
void write_paths_csv(std::ostream& os, const ExperimentReport& report);

/// Time-average occupation of the unit cells n in [n_min, n_max]; cell n
/// holds positions z with n - 1 < z <= n.
struct OccupancyEstimate {
  long n_min = 0;
  long n_max = 0;
  std::vector<double> p_star;
  double total_time = 0.0;

  double at(long n) const { return p_star.at(static_cast<std::size_t>(n - n_min)); }
};

/// One path of length total_time on stream_seed(seed, 0). Only the signed
/// (mean-reverting) family has a stationary occupancy; any other drift is
/// rejected with std::invalid_argument.
OccupancyEstimate estimate_occupancy(const WalkConfig& walk, double total_time, long n_min,
                                     long n_max, std::uint64_t seed);

void write_occupancy_csv(std::ostream& os, const OccupancyEstimate& occ);

struct BalanceResidual {
  long n_min = 0;  // first cell with a residual
  long n_max = 0;
  std::vector<double> residual;
  double l1 = 0.0;
};

/// residual_n = P*_{n+1} mu*_{n+1} + P*_{n-1} lambda*_{n-1} - P*_n (lambda*_n + mu*_n)
/// for the interior cells of the occupancy window (both neighbours observed).
/// The chain must cover the occupancy window.
BalanceResidual balance_residual(const OccupancyEstimate& occ, const BDChain& chain);

}  // namespace driftlab
