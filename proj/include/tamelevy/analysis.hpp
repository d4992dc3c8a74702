#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tamelevy/simulator.hpp"
#include "tamelevy/support_group.hpp"

namespace tamelevy {

// Distinct level-n cosets occupied by the path on [0, t], the start included.
std::uint64_t visited_cosets(const SupportGroup& group, const PathRecord& path, int n, double t);

struct LevelSummary {
  double median = 0;
  double q1 = 0;
  double q3 = 0;
};

// Canonical covers of path images by level-n balls of diameter M(n)^{-1}.
struct DimensionReport {
  double t = 0;
  std::vector<int> levels;
  std::vector<long double> log_scale;             // log M(n)
  std::vector<long double> b;                     // b_n, 0 on the first block
  std::vector<std::vector<std::uint64_t>> count;  // [level][path] N_n
  std::vector<std::vector<double>> box;           // log N_n / log M(n)
  std::vector<std::vector<double>> phi;           // N_n b_n

  std::size_t paths() const { return count.empty() ? 0 : count.front().size(); }
  std::vector<LevelSummary> box_summary() const;
  std::vector<LevelSummary> phi_summary() const;
};

DimensionReport analyze_paths(const SupportGroup& group, const std::vector<PathRecord>& paths,
                              const std::vector<int>& levels, double t);

// Per-level ensemble medians of log N_n / log M(n).
std::vector<double> box_dimension_estimate(const SupportGroup& group, const std::vector<PathRecord>& paths,
                                           const std::vector<int>& levels, double t);
// Per-level, per-path N_n b_n; throws ZeroBn if some requested b_n is 0.
std::vector<std::vector<double>> hausdorff_phi_measure(const SupportGroup& group, const std::vector<PathRecord>& paths,
                                                       const std::vector<int>& levels, double t);

// Tail infima inf_{k >= i} seq[k]: the finite-range stand-in for liminf.
std::vector<double> running_liminf(const std::vector<double>& seq);

// Columns: level,path,visited,log_scale,box_dimension,b_n,phi_sum
void write_dimension_csv(const DimensionReport& report, std::ostream& os);
// Columns: level,box_median,box_q1,box_q3,phi_median,phi_q1,phi_q3
void write_dimension_summary_csv(const DimensionReport& report, std::ostream& os);

}  // namespace tamelevy
