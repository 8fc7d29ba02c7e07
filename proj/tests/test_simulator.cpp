#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "driftlab/simulator.hpp"

using namespace driftlab;

namespace {

const RateField kZero{DriftField::zero()};
const JumpLaw kUnit = JumpLaw::constant();

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

TEST_CASE("empty horizon gives an empty trajectory") {
  const Trajectory t = simulate_walk(kZero, kUnit, kUnit, 0.0, 5, 3.5);
  CHECK(t.events.empty());
  CHECK(t.final_position() == 3.5);
  CHECK(t.position_at(0.0) == 3.5);
}

TEST_CASE("identical inputs and seed give a bit-identical trajectory") {
  const RateField rf{DriftField::critical_lamperti(0.5)};
  const Trajectory a = simulate_walk(rf, JumpLaw::gamma(2.0), JumpLaw::uniform(0.3), 500.0, 42);
  const Trajectory b = simulate_walk(rf, JumpLaw::gamma(2.0), JumpLaw::uniform(0.3), 500.0, 42);
  CHECK(a == b);
  const Trajectory c = simulate_walk(rf, JumpLaw::gamma(2.0), JumpLaw::uniform(0.3), 500.0, 43);
  CHECK_FALSE(a == c);
}

TEST_CASE("trajectory invariants and exact reconstruction") {
  const RateField rf{DriftField::critical_lamperti(2.0)};
  const JumpLaw up = JumpLaw::exponential();
  const JumpLaw down = JumpLaw::gamma(3.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Trajectory t = simulate_walk(rf, up, down, 200.0, seed, -1.25);
    double z = t.z0;
    double prev = 0.0;
    for (const auto& e : t.events) {
      REQUIRE(e.tau > prev);
      REQUIRE(e.tau <= t.horizon);
      REQUIRE(e.signed_jump != 0.0);
      z += e.signed_jump;
      REQUIRE(z == e.z_after);
      prev = e.tau;
    }
  }
}

TEST_CASE("zero field: mean and variance of Z(T) over many paths") {
  const double horizon = 1e3;
  const std::size_t n = 10000;
  std::vector<double> finals(n);
  for (std::size_t i = 0; i < n; ++i) {
    finals[i] = simulate_walk(kZero, kUnit, kUnit, horizon, stream_seed(2024, i)).final_position();
  }
  double sum = 0.0;
  for (double z : finals) sum += z;
  const double mean = sum / n;
  double ss = 0.0;
  for (double z : finals) ss += (z - mean) * (z - mean);
  const double var = ss / (n - 1);
  CHECK(std::abs(mean) <= 3.0 * std::sqrt(horizon / n));
  CHECK(var >= 0.9 * horizon);
  CHECK(var <= 1.1 * horizon);
}

TEST_CASE("up-event counts are Poisson(T/2): chi-square goodness of fit") {
  const double horizon = 20.0;
  const std::size_t n = 10000;
  const boost::math::poisson_distribution<> law(horizon / 2.0);
  // Pool the tails so every bin expects at least 5 counts.
  const int lo = 3;
  const int hi = 18;
  std::vector<double> observed(hi - lo + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Trajectory t = simulate_walk(kZero, kUnit, kUnit, horizon, stream_seed(99, i));
    const int k = static_cast<int>(component_events(t, Side::Up).times.size());
    observed[std::clamp(k, lo, hi) - lo] += 1.0;
  }
  double chi2 = 0.0;
  for (int k = lo; k <= hi; ++k) {
    double p = boost::math::pdf(law, k);
    if (k == lo) p = boost::math::cdf(law, lo);
    if (k == hi) p = boost::math::cdf(boost::math::complement(law, hi - 1));
    const double expected = p * n;
    REQUIRE(expected >= 5.0);
    const double d = observed[k - lo] - expected;
    chi2 += d * d / expected;
  }
  const boost::math::chi_squared_distribution<> ref(hi - lo);
  const double p_value = boost::math::cdf(boost::math::complement(ref, chi2));
  CAPTURE(chi2);
  CHECK(p_value > 0.001);
}

TEST_CASE("drift biases the walk upward at the expected rate") {
  // Far from the origin c/(4x) is nearly flat, so E[dZ/dt] is close to 2 phi.
  const RateField rf{DriftField::critical_lamperti(1.0)};
  const std::size_t n = 4000;
  const double z0 = 1000.0;
  const double horizon = 100.0;
  std::vector<double> inc(n);
  for (std::size_t i = 0; i < n; ++i) {
    inc[i] = simulate_walk(rf, kUnit, kUnit, horizon, stream_seed(5, i), z0).final_position() - z0;
  }
  const MeanSe m = mean_se(inc);
  const double expected = 2.0 * (1.0 / (4.0 * z0)) * horizon;
  CHECK(std::abs(m.mean - expected) <= 4.0 * m.se);
}

TEST_CASE("simulate_walk rejects invalid input") {
  CHECK_THROWS_AS(simulate_walk(kZero, kUnit, kUnit, -1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_walk(kZero, kUnit, kUnit, std::nan(""), 1), std::invalid_argument);
  CHECK_NOTHROW(check_simulable(DriftField::mean_reverting(1.0)));
  CHECK_THROWS_AS(check_simulable(DriftField::mean_reverting(3.0)), std::invalid_argument);
}

TEST_CASE("trajectory CSV has the fixed header and one row per event") {
  const Trajectory t = simulate_walk(kZero, JumpLaw::exponential(), kUnit, 5.0, 3);
  std::ostringstream os;
  write_trajectory_csv(os, t);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "tau,signed_jump,z_after");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == t.events.size());
}

TEST_CASE("simulation cost is linear in the horizon") {
  using clock = std::chrono::steady_clock;
  auto cost_per_event = [](double horizon) {
    const auto start = clock::now();
    std::size_t events = 0;
    for (std::uint64_t s = 0; s < 4; ++s) {
      events += simulate_walk(kZero, kUnit, kUnit, horizon, s).events.size();
    }
    const std::chrono::duration<double> dt = clock::now() - start;
    return dt.count() / static_cast<double>(events);
  };
  cost_per_event(1e4);
  const double small = cost_per_event(5e4);
  const double large = cost_per_event(8e5);
  CHECK(large < 3.0 * small);
}

TEST_CASE("rate along a trajectory uses the pre-jump state") {
  Trajectory t{1, 0.0, 10.0, {{1.0, 1.0, 1.0}, {2.0, 1.0, 2.0}, {3.0, -1.0, 1.0}}};
  const RateField rf{DriftField::critical_lamperti(1.0)};
  const RatePath up = rate_path_along(t, rf, Side::Up);
  const RatePath down = rate_path_along(t, rf, Side::Down);
  CHECK(up(0.5) == doctest::Approx(0.75));
  CHECK(up(1.0) == doctest::Approx(0.75));
  CHECK(up(1.5) == doctest::Approx(0.75));
  CHECK(up(2.5) == doctest::Approx(0.5 + 1.0 / 8.0));
  CHECK(down(2.5) == doctest::Approx(0.5 - 1.0 / 8.0));
  const auto marks = component_events(t, Side::Down);
  REQUIRE(marks.times.size() == 1);
  CHECK(marks.marks[0] == 1.0);
  CHECK(component_value(component_events(t, Side::Up), 2.0) == 2.0);
  CHECK(component_value(component_events(t, Side::Up), 1.5) == 1.0);
}

TEST_CASE("compensator_literal examples") {
  MarkedEvents unit{{0.1, 0.25, 0.7, 1.3}, {1.0, 1.0, 1.0, 1.0}};
  CHECK(compensator_literal(unit, constant_rate(2.0), 1.0).value == doctest::Approx(2.0).epsilon(1e-12));

  const MarkedEvents ev{{0.3, 0.8, 1.4}, {2.0, 0.5, 1.5}};
  const LiteralCompensator c = compensator_literal(ev, constant_rate(1.0), 1.0);
  CHECK(c.value == doctest::Approx(2.0 * 0.3 + 0.5 * 0.5 + 1.5 * 0.2).epsilon(1e-12));
  CHECK(c.value == doctest::Approx(1.15).epsilon(1e-12));
  CHECK(c.tail == TailMark::NextMark);

  CHECK(compensator_literal(ev, constant_rate(1.0), 0.0).value == 0.0);

  const MarkedEvents short_ev{{0.3, 0.8}, {2.0, 0.5}};
  const LiteralCompensator m = compensator_literal(short_ev, constant_rate(1.0), 1.0);
  CHECK(m.tail == TailMark::MeanMark);
  CHECK(m.value == doctest::Approx(0.6 + 0.25 + 0.2).epsilon(1e-12));
}

TEST_CASE("compensator_literal with unit marks integrates a varying rate") {
  const RatePath rate([](double s) { return 1.0 / (1.0 + s); });
  const MarkedEvents ev{{0.2, 0.55, 2.0}, {1.0, 1.0, 1.0}};
  CHECK(std::abs(compensator_literal(ev, rate, 1.0).value - std::log(2.0)) < 1e-9);
}

TEST_CASE("compensator_literal rejects malformed events") {
  CHECK_THROWS_AS(compensator_literal({{0.5, 0.3}, {1.0, 1.0}}, constant_rate(1.0), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(compensator_literal({{0.5, 0.5}, {1.0, 1.0}}, constant_rate(1.0), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(compensator_literal({{0.5}, {1.0, 1.0}}, constant_rate(1.0), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(compensator_literal({{0.5}, {1.0}}, constant_rate(1.0), -1.0), std::invalid_argument);
}

TEST_CASE("compensator_ensemble examples") {
  CHECK(compensator_ensemble(constant_rate(1.0), 10.0) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(compensator_ensemble(constant_rate(2.0), 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  const RatePath rate([](double s) { return 1.0 / (1.0 + s); });
  CHECK(std::abs(compensator_ensemble(rate, 1.0) - std::log(2.0)) < 1e-9);
  CHECK(compensator_ensemble(constant_rate(3.0), 0.0) == 0.0);
}

TEST_CASE("martingale residuals of constant-rate fixtures are centred") {
  const std::size_t n = 10000;
  const double tau = 5.0;
  struct Fixture {
    double rate;
    JumpLaw law;
    bool lookahead;
  };
  const std::vector<Fixture> fixtures = {{2.0, JumpLaw::exponential(), true},
                                         {0.7, JumpLaw::gamma(2.0), true},
                                         {1.0, JumpLaw::uniform(0.5), false}};
  std::uint64_t master = 300;
  for (const auto& f : fixtures) {
    CAPTURE(f.rate);
    CAPTURE(f.lookahead);
    std::vector<double> lit(n);
    std::vector<double> ens(n);
    for (std::size_t i = 0; i < n; ++i) {
      const MarkedEvents ev = simulate_compound_poisson([&](double) { return f.rate; }, f.rate, f.law,
                                                        tau, stream_seed(master, i), f.lookahead);
      const CompensatorReport r = compensator_report(ev, constant_rate(f.rate), tau);
      REQUIRE(r.residual_literal == doctest::Approx(r.raw_value - r.literal_value));
      REQUIRE(r.residual_ensemble == doctest::Approx(r.raw_value - r.ensemble_value));
      lit[i] = r.residual_literal;
      ens[i] = r.residual_ensemble;
    }
    const MeanSe a = mean_se(lit);
    const MeanSe b = mean_se(ens);
    CHECK(std::abs(a.mean) <= 3.0 * a.se);
    CHECK(std::abs(b.mean) <= 3.0 * b.se);
    ++master;
  }
}

TEST_CASE("thinning reproduces a time-varying intensity") {
  // Intensity 2 / (1 + s) on [0, 4]: expected count 2 ln 5.
  const std::size_t n = 10000;
  std::vector<double> counts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const MarkedEvents ev = simulate_compound_poisson([](double s) { return 2.0 / (1.0 + s); }, 2.0,
                                                      JumpLaw::constant(), 4.0, stream_seed(8, i), false);
    counts[i] = static_cast<double>(ev.times.size());
  }
  const MeanSe m = mean_se(counts);
  CHECK(std::abs(m.mean - 2.0 * std::log(5.0)) <= 3.0 * m.se);
}

TEST_CASE("Wald second-moment check examples") {
  const WaldCheck w = wald_second_moment_check(kZero, kUnit, kUnit, 1.0, 10000, 17);
  CHECK(w.bound == 2.0);
  CHECK(w.empirical_second_moment == doctest::Approx(1.0).epsilon(0.05));
  CHECK(w.pass);

  const WaldCheck g =
      wald_second_moment_check(kZero, JumpLaw::gamma(2.0), JumpLaw::gamma(2.0), 1.0, 1000, 17);
  CHECK(g.bound == doctest::Approx(3.0));

  const WaldCheck zero = wald_second_moment_check(kZero, kUnit, kUnit, 0.0, 100, 17);
  CHECK(zero.empirical_second_moment == 0.0);
  CHECK(zero.bound == 0.0);
  CHECK(zero.pass);

  CHECK_THROWS_AS(wald_second_moment_check(kZero, kUnit, kUnit, -1.0, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(wald_second_moment_check(kZero, kUnit, kUnit, 1.0, 10, 1), std::invalid_argument);
}

TEST_CASE("Wald check is independent of the worker count") {
  const RateField rf{DriftField::critical_lamperti(0.5)};
  const WaldCheck a = wald_second_moment_check(rf, kUnit, kUnit, 3.0, 500, 9, 1);
  const WaldCheck b = wald_second_moment_check(rf, kUnit, kUnit, 3.0, 500, 9, 4);
  CHECK(a.empirical_second_moment == b.empirical_second_moment);
}
