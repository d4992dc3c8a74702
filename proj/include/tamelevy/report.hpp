#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tamelevy/analysis.hpp"
#include "tamelevy/simulator.hpp"
#include "tamelevy/tower.hpp"
#include "tamelevy/verify.hpp"

namespace tamelevy {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
  std::string config_path;
  std::string command;
  std::string format = "csv";
  std::uint64_t seed = 0;
  int level = 0;
  std::string alpha_override;  // empty when the config value is used
  std::uint64_t samples = 0;
  double horizon = 0;
  std::uint64_t lk_cap = 0;
  std::uint64_t dense_cap = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;
};

std::string utc_timestamp();

nlohmann::json tower_json(const TowerSpec& tower);
nlohmann::json manifest_json(const RunManifest& manifest, const TowerSpec& tower);
nlohmann::json checks_json(const std::vector<CheckResult>& results);
nlohmann::json exit_stats_json(const ExitStats& stats);
nlohmann::json dimension_json(const DimensionReport& report);
nlohmann::json path_json(const PathRecord& path, const SupportGroup& group);

// Columns: sample,pi,tau,q_event
void write_exit_csv(const ExitStats& stats, std::ostream& os);
// Columns: n,N,q_exact,q_mc,ci_lo,ci_hi,trials,censored
struct QComparison {
  int n = 0;
  int N = 0;
  double exact = 0;
  QEstimate mc;
};
void write_q_csv(const std::vector<QComparison>& rows, std::ostream& os);

}  // namespace tamelevy
