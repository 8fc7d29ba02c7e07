#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftlab/config.hpp"
#include "driftlab/records.hpp"
#include "driftlab/run.hpp"

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-inhomogeneous random walk simulator and recurrence classifier", "driftlab"};
  app.set_version_flag("--version", std::string(driftlab::kVersion));

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<std::string> format;
  std::optional<unsigned> workers;
  bool strict = false;
  std::vector<std::string> sets;

  app.add_option("config", config_path, "Configuration file (key = value entries)")->required();
  app.add_option("--seed", seed, "Master seed; overrides the config and DRIFTLAB_SEED");
  app.add_option("-o,--output", output, "Output file path");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", workers, "Worker threads (0: available parallelism)");
  app.add_flag("--strict", strict, "Exit 1 on Inconclusive verdicts or failed checks");
  app.add_option("--set", sets, "Override a config entry, key=value (repeatable)")
      ->allow_extra_args(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? driftlab::exit_code::kOk : driftlab::exit_code::kUsage;
  }

  std::vector<driftlab::Override> overrides;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --set '" << s << "': expected key=value\n";
      return driftlab::exit_code::kUsage;
    }
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (seed) overrides.emplace_back("seed", std::to_string(*seed));
  if (output) overrides.emplace_back("output", *output);
  if (format) overrides.emplace_back("format", *format);
  if (workers) overrides.emplace_back("workers", std::to_string(*workers));
  if (strict) overrides.emplace_back("strict", "true");

  const auto text = read_file(config_path);
  if (!text) {
    std::cerr << "error: " << config_path << ": cannot read config file\n";
    return driftlab::exit_code::kIo;
  }

  driftlab::RunConfig config;
  try {
    config = driftlab::parse_config(*text, overrides);
  } catch (const driftlab::ConfigError& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << '\n';
    return driftlab::exit_code::kUsage;
  } catch (const driftlab::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return driftlab::exit_code::kIo;
  }
  return driftlab::run(config, std::cout, std::cerr);
}
