#include "driftlab/records.hpp"

#include <cmath>
#include <fstream>
#include <system_error>

#include <unistd.h>

namespace driftlab {
namespace {

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

nlohmann::json to_record(const Classification& c) {
  return {
      {"verdict", std::string(to_string(c.verdict))},
      {"c_estimate", number(c.c_estimate)},
      {"window", {number(c.window_lo), number(c.window_hi)}},
      {"argext", number(c.argext)},
      {"method", c.method},
  };
}

nlohmann::json to_record(const ExperimentReport& r) {
  return {
      {"n_paths", r.n_paths},
      {"n_reached", r.n_reached},
      {"n_returned", r.n_returned},
      {"reached_L_fraction", number(r.reached_L_fraction)},
      {"returned_fraction", number(r.returned_fraction)},
      {"returned_ci", {number(r.returned_ci.lo), number(r.returned_ci.hi)}},
      {"mean_final_position", number(r.mean_final_position)},
      {"runtime_seconds", number(r.runtime_seconds)},
      {"warnings", r.warnings},
      {"return_proxy", "re-entry into [-a, a] after the first time |Z| >= L"},
  };
}

nlohmann::json to_record(const OccupancyEstimate& occ) {
  nlohmann::json p = nlohmann::json::array();
  for (double v : occ.p_star) p.push_back(number(v));
  return {{"window", {occ.n_min, occ.n_max}}, {"total_time", occ.total_time}, {"p_star", p}};
}

nlohmann::json to_record(const BalanceResidual& res) {
  nlohmann::json r = nlohmann::json::array();
  for (double v : res.residual) r.push_back(number(v));
  return {{"window", {res.n_min, res.n_max}}, {"residual", r}, {"l1", number(res.l1)}};
}

nlohmann::json to_record(const WaldCheck& w) {
  return {{"empirical_second_moment", number(w.empirical_second_moment)},
          {"bound", number(w.bound)},
          {"pass", w.pass}};
}

nlohmann::json to_record(const Trajectory& traj) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : traj.events) events.push_back({e.tau, e.signed_jump, e.z_after});
  return {{"seed", traj.seed},
          {"z0", traj.z0},
          {"horizon", traj.horizon},
          {"columns", {"tau", "signed_jump", "z_after"}},
          {"events", events}};
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path{"."};
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError(path, "parent directory does not exist");
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open temporary file for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError(path, "write failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError(path, "rename failed: " + ec.message());
  }
}

}  // namespace driftlab
