#include "driftlab/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <ostream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "driftlab/parallel.hpp"

namespace driftlab {
namespace {

constexpr double kSubstep = 0.01;

// Splits [a, b] at the breakpoints strictly inside it.
std::vector<double> segment_ends(std::span<const double> breakpoints, double a, double b) {
  std::vector<double> ends{a};
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), a);
  for (; it != breakpoints.end() && *it < b; ++it) ends.push_back(*it);
  ends.push_back(b);
  return ends;
}

double gauss_legendre3(const RatePath& rate, double a, double b) {
  static constexpr std::array<double, 3> nodes{-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t k = 0; k < 3; ++k) sum += weights[k] * rate(mid + half * nodes[k]);
  return half * sum;
}

double integrate_substepped(const RatePath& rate, double a, double b) {
  if (!(b > a)) return 0.0;
  const auto ends = segment_ends(rate.breakpoints(), a, b);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < ends.size(); ++s) {
    const double lo = ends[s];
    const double len = ends[s + 1] - lo;
    if (!(len > 0.0)) continue;
    const auto steps = static_cast<std::size_t>(std::ceil(len / kSubstep));
    const double h = len / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      const double x0 = lo + h * static_cast<double>(k);
      const double x1 = k + 1 == steps ? ends[s + 1] : x0 + h;
      total += gauss_legendre3(rate, x0, x1);
    }
  }
  return total;
}

void check_events(const MarkedEvents& events) {
  if (events.times.size() != events.marks.size()) {
    throw std::invalid_argument("compensator: times and marks differ in length");
  }
  double prev = 0.0;
  for (std::size_t i = 0; i < events.times.size(); ++i) {
    const double t = events.times[i];
    if (!(t > prev)) {
      throw std::invalid_argument("compensator: event times must be positive and strictly increasing");
    }
    if (!std::isfinite(events.marks[i])) throw std::invalid_argument("compensator: non-finite mark");
    prev = t;
  }
}

}  // namespace

double Trajectory::position_at(double tau) const {
  const auto it = std::upper_bound(events.begin(), events.end(), tau,
                                   [](double t, const Event& e) { return t < e.tau; });
  return it == events.begin() ? z0 : std::prev(it)->z_after;
}

void check_simulable(const DriftField& field) {
  if (field.in_scope()) return;
  constexpr int kSteps = 100;
  for (int i = 0; i <= kSteps; ++i) {
    const double x = -100.0 + 200.0 * i / kSteps;
    for (int j = 0; j <= kSteps; ++j) {
      const double t = 1e4 * j / kSteps;
      if (std::abs(field.raw(x, t)) > 0.5) {
        throw std::invalid_argument("signed drift exceeds 1/2 in magnitude on the scan grid");
      }
    }
  }
}

Trajectory simulate_walk(const RateField& rf, const JumpLaw& up, const JumpLaw& down,
                         double horizon, std::uint64_t seed, double z0) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("simulate_walk: horizon must be finite and >= 0");
  }
  check_simulable(rf.drift());
  Trajectory traj{seed, z0, horizon, {}};
  traj.events.reserve(static_cast<std::size_t>(horizon * 1.1) + 16);
  Rng rng{seed};
  for_each_event(rf, up, down, horizon, rng, z0, [&](const Event& e) {
    traj.events.push_back(e);
    return true;
  });
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const auto old_precision = os.precision(17);
  os << "tau,signed_jump,z_after\n";
  for (const auto& e : traj.events) os << e.tau << ',' << e.signed_jump << ',' << e.z_after << '\n';
  os.precision(old_precision);
}

RatePath::RatePath(std::function<double(double)> rate, std::vector<double> breakpoints)
    : rate_(std::move(rate)), breakpoints_(std::move(breakpoints)) {
  std::sort(breakpoints_.begin(), breakpoints_.end());
}

RatePath constant_rate(double rate) {
  return RatePath{[rate](double) { return rate; }};
}

RatePath rate_path_along(const Trajectory& traj, const RateField& rf, Side side) {
  auto times = std::make_shared<std::vector<double>>();
  auto states = std::make_shared<std::vector<double>>();
  times->reserve(traj.events.size());
  states->reserve(traj.events.size() + 1);
  states->push_back(traj.z0);
  for (const auto& e : traj.events) {
    times->push_back(e.tau);
    states->push_back(e.z_after);
  }
  auto rate = [times, states, rf, side](double s) {
    // Z(s-): state after the last event strictly before s.
    const auto k = static_cast<std::size_t>(std::lower_bound(times->begin(), times->end(), s) -
                                            times->begin());
    const Rates r = rf.at((*states)[k], s);
    return side == Side::Up ? r.lambda : r.mu;
  };
  return RatePath{std::move(rate), *times};
}

MarkedEvents component_events(const Trajectory& traj, Side side) {
  MarkedEvents out;
  for (const auto& e : traj.events) {
    if ((side == Side::Up) == (e.signed_jump > 0.0)) {
      out.times.push_back(e.tau);
      out.marks.push_back(std::abs(e.signed_jump));
    }
  }
  return out;
}

double component_value(const MarkedEvents& events, double tau) {
  double sum = 0.0;
  for (std::size_t i = 0; i < events.times.size() && events.times[i] <= tau; ++i) {
    sum += events.marks[i];
  }
  return sum;
}

MarkedEvents simulate_compound_poisson(const std::function<double(double)>& rate, double majorant,
                                       const JumpLaw& law, double horizon, std::uint64_t seed,
                                       bool lookahead) {
  if (!(majorant > 0.0) || !std::isfinite(majorant)) {
    throw std::invalid_argument("thinning majorant must be positive and finite");
  }
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
  const double give_up = horizon + 1e6 / majorant;
  MarkedEvents out;
  Rng rng{seed};
  double t = 0.0;
  for (;;) {
    t += exponential(rng, majorant);
    if (t > horizon && (!lookahead || t > give_up)) break;
    const double r = rate(t);
    if (r > majorant * (1.0 + 1e-12)) throw std::invalid_argument("rate exceeds thinning majorant");
    if (uniform_open(rng) * majorant < r) {
      out.times.push_back(t);
      out.marks.push_back(law.sample(rng));
      if (t > horizon) break;
    }
  }
  return out;
}

LiteralCompensator compensator_literal(const MarkedEvents& events, const RatePath& rate,
                                       double tau) {
  check_events(events);
  if (!(tau >= 0.0)) throw std::invalid_argument("compensator: tau must be >= 0");
  double value = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < events.times.size(); ++i) {
    const double t = events.times[i];
    if (t > tau) {
      value += events.marks[i] * integrate_substepped(rate, prev, tau);
      return {value, TailMark::NextMark};
    }
    value += events.marks[i] * integrate_substepped(rate, prev, t);
    prev = t;
  }
  value += JumpLaw::mean() * integrate_substepped(rate, prev, tau);
  return {value, TailMark::MeanMark};
}

double compensator_ensemble(const RatePath& rate, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("compensator: tau must be >= 0");
  if (tau == 0.0) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  const auto ends = segment_ends(rate.breakpoints(), 0.0, tau);
  auto f = [&rate](double s) { return rate(s); };
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < ends.size(); ++s) {
    if (!(ends[s + 1] > ends[s])) continue;
    total += gauss_kronrod<double, 15>::integrate(f, ends[s], ends[s + 1], 15, 1e-12);
  }
  return total * JumpLaw::mean();
}

CompensatorReport compensator_report(const MarkedEvents& events, const RatePath& rate, double tau) {
  const auto literal = compensator_literal(events, rate, tau);
  const double ensemble = compensator_ensemble(rate, tau);
  const double raw = component_value(events, tau);
  return {tau, raw, literal.value, literal.tail, ensemble, raw - literal.value, raw - ensemble};
}

WaldCheck wald_second_moment_check(const RateField& rf, const JumpLaw& up, const JumpLaw& down,
                                   double sigma, std::size_t n_paths, std::uint64_t seed,
                                   unsigned workers) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("wald check: sigma must be finite and >= 0");
  }
  if (n_paths < 100) throw std::invalid_argument("wald check: n_paths must be >= 100");
  check_simulable(rf.drift());
  std::vector<double> squares(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t i) {
    Rng rng{stream_seed(seed, i)};
    double z = 0.0;
    for_each_event(rf, up, down, sigma, rng, 0.0, [&](const Event& e) {
      z = e.z_after;
      return true;
    });
    squares[i] = z * z;
  });
  double sum = 0.0;
  for (double s : squares) sum += s;
  const double empirical = sum / static_cast<double>(n_paths);
  const double bound = sigma * (2.0 + up.variance() + down.variance());
  return {empirical, bound, empirical <= bound * 1.05};
}

}  // namespace driftlab
