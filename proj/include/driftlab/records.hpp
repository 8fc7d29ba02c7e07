#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "driftlab/classifier.hpp"
#include "driftlab/experiments.hpp"
#include "driftlab/simulator.hpp"

namespace driftlab {

inline constexpr std::string_view kVersion = "0.1.0";

// JSON records. Non-finite numbers serialize as null.
nlohmann::json to_record(const Classification& c);
nlohmann::json to_record(const ExperimentReport& r);  // summary only, no per-path rows
nlohmann::json to_record(const OccupancyEstimate& occ);
nlohmann::json to_record(const BalanceResidual& res);
nlohmann::json to_record(const WaldCheck& w);
nlohmann::json to_record(const Trajectory& traj);

class IoError : public std::runtime_error {
 public:
  IoError(std::filesystem::path path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_(std::move(path)) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Writes to a sibling temporary file and renames it over `path`, so the
/// target is either untouched or complete. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace driftlab
