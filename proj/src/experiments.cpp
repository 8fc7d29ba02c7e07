#include "driftlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "driftlab/parallel.hpp"
#include "driftlab/simulator.hpp"

namespace driftlab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

PathOutcome run_path(const RecurrenceExperiment& exp, std::size_t index) {
  const std::uint64_t seed = stream_seed(exp.seed, index);
  Rng rng{seed};
  PathOutcome out{index, seed, false, kNaN, false, 0.0};
  const double level = exp.excursion_level;
  const double band = exp.return_band;
  double z = 0.0;
  for_each_event(exp.walk.rates, exp.walk.up, exp.walk.down, exp.horizon, rng, 0.0,
                 [&](const Event& e) {
                   z = e.z_after;
                   if (!out.reached_level) {
                     if (std::abs(z) >= level) {
                       out.reached_level = true;
                       out.first_hit_time = e.tau;
                     }
                   } else if (!out.returned && std::abs(z) <= band) {
                     out.returned = true;
                   }
                   return true;
                 });
  out.final_z = z;
  return out;
}

}  // namespace

void RecurrenceExperiment::validate() const {
  if (n_paths < 1) throw std::invalid_argument("experiment: n_paths must be >= 1");
  if (!(return_band > 0.0)) throw std::invalid_argument("experiment: return band a must be > 0");
  if (!(excursion_level > return_band)) {
    throw std::invalid_argument("experiment: excursion level L must exceed the return band a");
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("experiment: horizon must be finite and >= 0");
  }
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {kNaN, kNaN};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  // Clamped so the interval brackets p.
  return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

ExperimentReport run_recurrence_experiment(const RecurrenceExperiment& exp, unsigned workers) {
  exp.validate();
  check_simulable(exp.walk.rates.drift());
  const auto start = std::chrono::steady_clock::now();

  ExperimentReport report;
  report.n_paths = exp.n_paths;
  report.paths.resize(exp.n_paths);
  parallel_for(exp.n_paths, workers, [&](std::size_t i) { report.paths[i] = run_path(exp, i); });

  double final_sum = 0.0;
  for (const auto& p : report.paths) {
    report.n_reached += p.reached_level;
    report.n_returned += p.returned;
    final_sum += p.final_z;
  }
  const double n = static_cast<double>(exp.n_paths);
  report.reached_L_fraction = static_cast<double>(report.n_reached) / n;
  report.returned_fraction = report.n_reached == 0
                                 ? kNaN
                                 : static_cast<double>(report.n_returned) /
                                       static_cast<double>(report.n_reached);
  report.returned_ci = wilson_interval(report.n_returned, report.n_reached);
  report.mean_final_position = final_sum / n;

  const double level = exp.excursion_level;
  if (exp.horizon < 4.0 * level * level) {
    std::ostringstream os;
    os << "horizon " << exp.horizon << " is below 4 L^2 = " << 4.0 * level * level
       << "; typical paths may not reach L";
    report.warnings.push_back(os.str());
  }
  if (report.reached_L_fraction < 0.5) {
    report.warnings.push_back("fewer than half of the paths reached L");
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void write_paths_csv(std::ostream& os, const ExperimentReport& report) {
  const auto old_precision = os.precision(17);
  os << "path,seed,reached_L,first_hit_time,returned,final_z\n";
  for (const auto& p : report.paths) {
    os << p.path << ',' << p.seed << ',' << int{p.reached_level} << ',';
    if (p.reached_level) {
      os << p.first_hit_time;
    } else {
      os << "nan";
    }
    os << ',' << int{p.returned} << ',' << p.final_z << '\n';
  }
  os.precision(old_precision);
}

OccupancyEstimate estimate_occupancy(const WalkConfig& walk, double total_time, long n_min,
                                     long n_max, std::uint64_t seed) {
  if (walk.rates.drift().in_scope()) {
    throw std::invalid_argument(
        "estimate_occupancy: needs a mean-reverting drift; nonnegative drifts have no stationary "
        "occupancy");
  }
  if (!(total_time >= 0.0) || !std::isfinite(total_time)) {
    throw std::invalid_argument("estimate_occupancy: total_time must be finite and >= 0");
  }
  if (!(n_min <= n_max)) throw std::invalid_argument("estimate_occupancy: empty window");
  check_simulable(walk.rates.drift());

  OccupancyEstimate occ;
  occ.n_min = n_min;
  occ.n_max = n_max;
  occ.total_time = total_time;
  occ.p_star.assign(static_cast<std::size_t>(n_max - n_min + 1), 0.0);
  if (total_time == 0.0) return occ;

  auto credit = [&](double z, double dt) {
    const double cell = std::ceil(z);
    if (cell >= static_cast<double>(n_min) && cell <= static_cast<double>(n_max)) {
      occ.p_star[static_cast<std::size_t>(static_cast<long>(cell) - n_min)] += dt;
    }
  };
  Rng rng{stream_seed(seed, 0)};
  double z = 0.0;
  double last = 0.0;
  for_each_event(walk.rates, walk.up, walk.down, total_time, rng, 0.0, [&](const Event& e) {
    credit(z, e.tau - last);
    last = e.tau;
    z = e.z_after;
    return true;
  });
  credit(z, total_time - last);
  for (double& p : occ.p_star) p /= total_time;
  return occ;
}

void write_occupancy_csv(std::ostream& os, const OccupancyEstimate& occ) {
  const auto old_precision = os.precision(17);
  os << "n,p_star\n";
  for (long n = occ.n_min; n <= occ.n_max; ++n) os << n << ',' << occ.at(n) << '\n';
  os.precision(old_precision);
}

BalanceResidual balance_residual(const OccupancyEstimate& occ, const BDChain& chain) {
  if (occ.p_star.size() != static_cast<std::size_t>(occ.n_max - occ.n_min + 1)) {
    throw std::invalid_argument("balance_residual: occupancy array does not match its window");
  }
  if (!chain.contains(occ.n_min) || !chain.contains(occ.n_max)) {
    throw std::invalid_argument("balance_residual: chain window does not cover the occupancy window");
  }
  BalanceResidual out;
  out.n_min = occ.n_min + 1;
  out.n_max = occ.n_max - 1;
  for (long n = out.n_min; n <= out.n_max; ++n) {
    const Rates here = chain.at(n);
    const double r = occ.at(n + 1) * chain.at(n + 1).mu + occ.at(n - 1) * chain.at(n - 1).lambda -
                     occ.at(n) * (here.lambda + here.mu);
    out.residual.push_back(r);
    out.l1 += std::abs(r);
  }
  return out;
}

}  // namespace driftlab
