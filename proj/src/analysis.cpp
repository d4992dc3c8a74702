#include "tamelevy/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

#include "tamelevy/error.hpp"
#include "tamelevy/levy_measure.hpp"
#include "tamelevy/stats.hpp"

namespace tamelevy {

std::uint64_t visited_cosets(const SupportGroup& group, const PathRecord& path, int n, double t) {
  if (n < 1 || n > path.level)
    throw Error(ErrorCode::LevelMismatch, "cannot cover a level-" + std::to_string(path.level) + " path at level " +
                                              std::to_string(n));
  std::set<Coords> seen;
  seen.insert(Coords(static_cast<std::size_t>(group.tower().level(n).m), 0));
  for (std::size_t i = 0; i < path.times.size() && path.times[i] <= t; ++i)
    seen.insert(group.project_coords(path.level, n, path.states[i]));
  return seen.size();
}

namespace {

std::vector<LevelSummary> summarize_rows(const std::vector<std::vector<double>>& rows) {
  std::vector<LevelSummary> out;
  for (const auto& r : rows) out.push_back({quantile(r, 0.5), quantile(r, 0.25), quantile(r, 0.75)});
  return out;
}

}  // namespace

std::vector<LevelSummary> DimensionReport::box_summary() const { return summarize_rows(box); }
std::vector<LevelSummary> DimensionReport::phi_summary() const { return summarize_rows(phi); }

DimensionReport analyze_paths(const SupportGroup& group, const std::vector<PathRecord>& paths,
                              const std::vector<int>& levels, double t) {
  const TowerSpec& tower = group.tower();
  const int top = levels.empty() ? 1 : *std::max_element(levels.begin(), levels.end());
  const BnSequence seq = bn_sequence(tower, top);
  DimensionReport r;
  r.t = t;
  r.levels = levels;
  for (int n : levels) {
    const long double log_m = tower.log_group_order(n);
    const long double b = seq.b_at(n);
    r.log_scale.push_back(log_m);
    r.b.push_back(b);
    std::vector<std::uint64_t> counts;
    std::vector<double> box, phi;
    for (const auto& path : paths) {
      const std::uint64_t c = visited_cosets(group, path, n, t);
      counts.push_back(c);
      box.push_back(static_cast<double>(std::log(static_cast<long double>(c)) / log_m));
      phi.push_back(static_cast<double>(static_cast<long double>(c) * b));
    }
    r.count.push_back(std::move(counts));
    r.box.push_back(std::move(box));
    r.phi.push_back(std::move(phi));
  }
  return r;
}

std::vector<double> box_dimension_estimate(const SupportGroup& group, const std::vector<PathRecord>& paths,
                                           const std::vector<int>& levels, double t) {
  std::vector<double> out;
  for (const auto& s : analyze_paths(group, paths, levels, t).box_summary()) out.push_back(s.median);
  return out;
}

std::vector<std::vector<double>> hausdorff_phi_measure(const SupportGroup& group, const std::vector<PathRecord>& paths,
                                                       const std::vector<int>& levels, double t) {
  const int top = levels.empty() ? 1 : *std::max_element(levels.begin(), levels.end());
  const BnSequence seq = bn_sequence(group.tower(), top);
  for (int n : levels)
    if (seq.b_at(n) <= 0) throw Error(ErrorCode::ZeroBn, "b_" + std::to_string(n) + " = 0 on the first block");
  return analyze_paths(group, paths, levels, t).phi;
}

std::vector<double> running_liminf(const std::vector<double>& seq) {
  std::vector<double> out(seq.size());
  double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = seq.size(); i-- > 0;) {
    inf = std::min(inf, seq[i]);
    out[i] = inf;
  }
  return out;
}

void write_dimension_csv(const DimensionReport& r, std::ostream& os) {
  os << "level,path,visited,log_scale,box_dimension,b_n,phi_sum\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < r.levels.size(); ++i)
    for (std::size_t k = 0; k < r.count[i].size(); ++k)
      os << r.levels[i] << "," << k << "," << r.count[i][k] << "," << static_cast<double>(r.log_scale[i]) << ","
         << r.box[i][k] << "," << static_cast<double>(r.b[i]) << "," << r.phi[i][k] << "\n";
}

void write_dimension_summary_csv(const DimensionReport& r, std::ostream& os) {
  os << "level,box_median,box_q1,box_q3,phi_median,phi_q1,phi_q3\n";
  os << std::setprecision(17);
  const auto box = r.box_summary(), phi = r.phi_summary();
  for (std::size_t i = 0; i < r.levels.size(); ++i)
    os << r.levels[i] << "," << box[i].median << "," << box[i].q1 << "," << box[i].q3 << "," << phi[i].median << ","
       << phi[i].q1 << "," << phi[i].q3 << "\n";
}

}  // namespace tamelevy
