#include "driftlab/run.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "driftlab/classifier.hpp"
#include "driftlab/experiments.hpp"
#include "driftlab/parallel.hpp"
#include "driftlab/records.hpp"
#include "driftlab/simulator.hpp"

namespace driftlab {
namespace {

std::string fixed3(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct Outcome {
  nlohmann::json result;
  std::string csv;      // payload for csv format
  std::string summary;  // stdout line
  bool inconclusive = false;
};

nlohmann::json envelope(const RunConfig& effective, const nlohmann::json& result) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [key, value] : effective_entries(effective)) config[key] = value;
  return {{"tool", "driftlab"},
          {"version", std::string(kVersion)},
          {"command", std::string(to_string(effective.command))},
          {"config", config},
          {"result", result}};
}

unsigned worker_count(const RunConfig& c) { return c.workers == 0 ? default_workers() : c.workers; }

WalkConfig walk_of(const RunConfig& c) { return {RateField(c.field, c.limit_time), c.up, c.down}; }

std::string classification_csv(std::initializer_list<Classification> rows) {
  std::ostringstream os;
  os.precision(17);
  os << "verdict,c_estimate,window_lo,window_hi,method\n";
  for (const auto& c : rows) {
    os << to_string(c.verdict) << ',' << c.c_estimate << ',' << c.window_lo << ',' << c.window_hi
       << ',' << c.method << '\n';
  }
  return os.str();
}

Outcome do_classify(const RunConfig& c) {
  Classification cls;
  if (c.method == ClassifyMethod::MvCritical) {
    const auto& pl = std::get<drift::PowerLaw>(c.field.family());
    cls = classify_mv_critical(pl.rho, pl.beta, c.x0, c.x_max, c.grid);
  } else {
    cls = classify_theorem1(c.field, c.x0, c.x_max, c.grid);
  }
  Outcome out;
  out.result = to_record(cls);
  if (c.method == ClassifyMethod::MvCritical) {
    const auto& pl = std::get<drift::PowerLaw>(c.field.family());
    out.result["analytic_verdict"] = std::string(to_string(mv_critical_analytic(pl.rho)));
  }
  out.csv = classification_csv({cls});
  out.summary = "verdict=" + std::string(to_string(cls.verdict)) + " c_estimate=" +
                fixed3(cls.c_estimate) + " method=" + cls.method;
  out.inconclusive = cls.verdict == Verdict::Inconclusive;
  return out;
}

Outcome do_bd_oracle(const RunConfig& c) {
  const BDChain chain = c.chain_c
                            ? ratio_family_chain(*c.chain_c, c.n_min, c.n_max)
                            : discretize_to_bd(RateField(c.field, c.limit_time), c.n_min, c.n_max,
                                               c.quadrature_points);
  const Classification ratio = ratio_test(chain, c.n0);
  const Classification series = bd_series_criterion(chain, c.n0, c.tail_extension);
  Outcome out;
  out.result = {{"verdict", std::string(to_string(series.verdict))},
                {"series", to_record(series)},
                {"ratio", to_record(ratio)},
                {"agree", ratio.verdict == series.verdict}};
  out.csv = classification_csv({series, ratio});
  out.summary = "verdict=" + std::string(to_string(series.verdict)) + " c_estimate=" +
                fixed3(series.c_estimate) + " method=bd_series ratio_verdict=" +
                std::string(to_string(ratio.verdict));
  out.inconclusive = series.verdict == Verdict::Inconclusive || ratio.verdict != series.verdict;
  return out;
}

Outcome do_simulate(const RunConfig& c, std::uint64_t seed) {
  const WalkConfig walk = walk_of(c);
  const Trajectory traj = simulate_walk(walk.rates, walk.up, walk.down, c.horizon, seed);
  Outcome out;
  out.result = to_record(traj);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  out.csv = csv.str();
  out.summary = "events=" + std::to_string(traj.events.size()) +
                " z_final=" + fixed3(traj.final_position()) + " horizon=" + fixed3(c.horizon);
  return out;
}

Outcome do_experiment(const RunConfig& c, std::uint64_t seed, std::ostream& err) {
  Outcome out;
  if (c.kind == ExperimentKind::Occupancy) {
    const WalkConfig walk = walk_of(c);
    const OccupancyEstimate occ = estimate_occupancy(walk, c.total_time, c.occ_min, c.occ_max, seed);
    const BDChain chain = discretize_to_bd(walk.rates, c.occ_min, c.occ_max, c.quadrature_points);
    const BalanceResidual res = balance_residual(occ, chain);
    out.result = {{"occupancy", to_record(occ)}, {"balance", to_record(res)}};
    std::ostringstream csv;
    write_occupancy_csv(csv, occ);
    out.csv = csv.str();
    double mass = 0.0;
    for (double p : occ.p_star) mass += p;
    out.summary = "window_mass=" + fixed3(mass) + " balance_l1=" + fixed3(res.l1) +
                  " total_time=" + fixed3(c.total_time);
    return out;
  }
  RecurrenceExperiment exp{walk_of(c), c.n_paths, c.horizon, c.level, c.band, seed};
  const ExperimentReport report = run_recurrence_experiment(exp, worker_count(c));
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  out.result = to_record(report);
  std::ostringstream csv;
  write_paths_csv(csv, report);
  out.csv = csv.str();
  out.summary = "returned_fraction=" + fixed3(report.returned_fraction) +
                " reached_L_fraction=" + fixed3(report.reached_L_fraction) +
                " n_paths=" + std::to_string(report.n_paths);
  return out;
}

// Martingale residual of the up-process along simulated walks at tau = horizon.
struct ResidualStats {
  double mean_literal = 0.0;
  double se_literal = 0.0;
  double mean_ensemble = 0.0;
  double se_ensemble = 0.0;
};

ResidualStats residual_stats(const RunConfig& c, std::uint64_t seed) {
  const WalkConfig walk = walk_of(c);
  const double tau = c.horizon;
  std::vector<CompensatorReport> reports(c.n_paths);
  parallel_for(c.n_paths, worker_count(c), [&](std::size_t i) {
    Rng rng{stream_seed(seed, i)};
    Trajectory traj{stream_seed(seed, i), 0.0, tau, {}};
    MarkedEvents up_events;
    // Run past tau until the up-process fires once more, to expose its next mark.
    for_each_event(walk.rates, walk.up, walk.down, std::numeric_limits<double>::infinity(), rng, 0.0,
                   [&](const Event& e) {
                     if (e.tau <= tau) traj.events.push_back(e);
                     if (e.signed_jump > 0.0) {
                       up_events.times.push_back(e.tau);
                       up_events.marks.push_back(e.signed_jump);
                     }
                     return !(e.tau > tau && e.signed_jump > 0.0);
                   });
    reports[i] = compensator_report(up_events, rate_path_along(traj, walk.rates, Side::Up), tau);
  });
  auto mean_se = [&](auto member) {
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& r : reports) {
      sum += r.*member;
      sq += r.*member * (r.*member);
    }
    const double n = static_cast<double>(reports.size());
    const double mean = sum / n;
    const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
    return std::pair{mean, std::sqrt(var / n)};
  };
  ResidualStats s;
  std::tie(s.mean_literal, s.se_literal) = mean_se(&CompensatorReport::residual_literal);
  std::tie(s.mean_ensemble, s.se_ensemble) = mean_se(&CompensatorReport::residual_ensemble);
  return s;
}

Outcome do_check(const RunConfig& c, std::uint64_t seed) {
  const WalkConfig walk = walk_of(c);
  const WaldCheck wald = wald_second_moment_check(walk.rates, walk.up, walk.down, c.sigma, c.n_paths,
                                                  seed, worker_count(c));
  const ResidualStats mart = residual_stats(c, mix64(seed));
  const bool literal_ok = std::abs(mart.mean_literal) <= 3.0 * mart.se_literal;
  const bool ensemble_ok = std::abs(mart.mean_ensemble) <= 3.0 * mart.se_ensemble;
  const bool pass = wald.pass && literal_ok && ensemble_ok;

  Outcome out;
  out.result = {{"wald", to_record(wald)},
                {"martingale",
                 {{"tau", c.horizon},
                  {"mean_residual_literal", mart.mean_literal},
                  {"se_literal", mart.se_literal},
                  {"mean_residual_ensemble", mart.mean_ensemble},
                  {"se_ensemble", mart.se_ensemble},
                  {"pass", literal_ok && ensemble_ok}}},
                {"pass", pass}};
  std::ostringstream csv;
  csv.precision(17);
  csv << "check,value,reference,pass\n";
  csv << "wald_second_moment," << wald.empirical_second_moment << ',' << wald.bound << ','
      << int{wald.pass} << '\n';
  csv << "residual_literal," << mart.mean_literal << ',' << 3.0 * mart.se_literal << ','
      << int{literal_ok} << '\n';
  csv << "residual_ensemble," << mart.mean_ensemble << ',' << 3.0 * mart.se_ensemble << ','
      << int{ensemble_ok} << '\n';
  out.csv = csv.str();
  out.summary = "pass=" + std::string(pass ? "true" : "false") +
                " wald=" + fixed3(wald.empirical_second_moment) + "/" + fixed3(wald.bound) +
                " residual_literal=" + fixed3(mart.mean_literal) +
                " residual_ensemble=" + fixed3(mart.mean_ensemble);
  out.inconclusive = !pass;
  return out;
}

}  // namespace

std::uint64_t resolve_seed(const RunConfig& config) {
  if (config.seed) return *config.seed;
  if (const char* env = std::getenv("DRIFTLAB_SEED"); env != nullptr && *env != '\0') {
    const std::string s(env);
    std::uint64_t seed = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ConfigError("DRIFTLAB_SEED: expected an unsigned 64-bit integer, got '" + s + "'");
    }
    return seed;
  }
  return kDefaultSeed;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    RunConfig effective = config;
    effective.seed = resolve_seed(config);
    const std::uint64_t seed = *effective.seed;

    Outcome outcome;
    switch (config.command) {
      case Command::Classify:
        outcome = do_classify(config);
        break;
      case Command::BdOracle:
        outcome = do_bd_oracle(config);
        break;
      case Command::Simulate:
        outcome = do_simulate(config, seed);
        break;
      case Command::Experiment:
        outcome = do_experiment(config, seed, err);
        break;
      case Command::Check:
        outcome = do_check(config, seed);
        break;
    }

    if (!config.output.empty()) {
      const std::string record = envelope(effective, outcome.result).dump(2) + "\n";
      if (config.format == OutputFormat::Csv) {
        write_file_atomic(config.output, outcome.csv);
        write_file_atomic(config.output + ".json", record);
      } else {
        write_file_atomic(config.output, record);
      }
    }
    out << outcome.summary << '\n';
    if (config.strict && outcome.inconclusive) return exit_code::kInconclusiveStrict;
    return exit_code::kOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kUsage;
  }
}

}  // namespace driftlab
