#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "driftlab/fields.hpp"

namespace driftlab {

enum class Command { Simulate, Classify, BdOracle, Experiment, Check };
enum class OutputFormat { Csv, Json };
enum class ExperimentKind { Recurrence, Occupancy };
enum class ClassifyMethod { Theorem1, MvCritical };

/// Usage error with a line/key-precise message. Maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully resolved run description. Every field has a value after parsing;
/// only the seed may be left open (resolved from the environment at run time).
struct RunConfig {
  Command command = Command::Classify;

  DriftField field;
  std::string tabulated_file;  // source of a tabulated field, if any
  double limit_time = kDefaultLimitTime;
  JumpLaw up;
  JumpLaw down;

  // classify
  ClassifyMethod method = ClassifyMethod::Theorem1;
  double x0 = 2.0;
  double x_max = 1e4;
  std::size_t grid = 512;

  // bd-oracle; `chain_c` selects the lambda*/mu* = 1 + c/n family instead of
  // discretizing the field
  std::optional<double> chain_c;
  long n_min = 2;
  long n_max = 10000;
  std::size_t quadrature_points = 8;
  long n0 = 2;
  long tail_extension = 990000;

  // simulate / experiment / check
  ExperimentKind kind = ExperimentKind::Recurrence;
  double horizon = 1000.0;
  std::size_t n_paths = 400;
  double level = 50.0;  // L
  double band = 1.0;    // a
  double sigma = 1.0;
  double total_time = 1e5;
  long occ_min = -10;
  long occ_max = 10;

  std::optional<std::uint64_t> seed;
  unsigned workers = 0;  // 0: available parallelism
  std::string output;    // empty: stdout summary only
  OutputFormat format = OutputFormat::Json;
  bool strict = false;

  bool operator==(const RunConfig&) const = default;
};

using Override = std::pair<std::string, std::string>;

/// Parses `key = value` entries separated by newlines or top-level commas;
/// `#` starts a comment. Family values nest parameters in braces, e.g.
/// `field = critical_lamperti{c=0.5}` or `up = gamma{k=2}`. Overrides are
/// applied on top of the text, key by key. Throws ConfigError.
RunConfig parse_config(std::string_view text, std::span<const Override> overrides = {});

/// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& config);

/// Key/value view of the effective configuration, in canonical order.
std::vector<std::pair<std::string, std::string>> effective_entries(const RunConfig& config);

std::string_view to_string(Command c);

}  // namespace driftlab
