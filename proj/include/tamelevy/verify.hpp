#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tamelevy/support_group.hpp"
#include "tamelevy/tower.hpp"

namespace tamelevy {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  bool skipped = false;
  double value = 0;      // measured error or statistic
  double tolerance = 0;
  std::string detail;
};

struct VerifyOptions {
  int max_level = 3;
  std::uint64_t mc_samples = 10000;  // 0 skips the Monte Carlo arm
  std::uint64_t seed = 1;
  std::uint64_t lk_cap = std::uint64_t{1} << 28;
  std::uint64_t dense_cap = 8192;    // M(n) limit for O(M^2) suites
  double mass_fault = 1;             // != 1 corrupts every coset mass
};

struct DualityReport {
  std::uint64_t cardinality = 0;
  std::uint64_t expected = 0;
  double orthogonality = 0;  // worst |sum_g chi| / M over nontrivial classes
  bool annihilator_checked = false;
  bool annihilator_members = true;     // Xi_n pairs trivially with S_n
  bool annihilator_violations = true;  // every class just outside is witnessed
};
DualityReport duality_check(const SupportGroup& group, int n);

std::vector<CheckResult> run_verify(const SupportGroup& group, const VerifyOptions& options);
bool all_passed(const std::vector<CheckResult>& results);
// First failing check, formatted for the NumericalFailure message.
std::string first_failure(const std::vector<CheckResult>& results);

void print_table(const std::vector<CheckResult>& results, std::ostream& os);
void write_checks_csv(const std::vector<CheckResult>& results, std::ostream& os);

}  // namespace tamelevy
