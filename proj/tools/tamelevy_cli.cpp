#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>

#include "tamelevy/analysis.hpp"
#include "tamelevy/error.hpp"
#include "tamelevy/levy_measure.hpp"
#include "tamelevy/report.hpp"
#include "tamelevy/simulator.hpp"
#include "tamelevy/verify.hpp"

namespace fs = std::filesystem;
using namespace tamelevy;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailure = 1;
constexpr int kConfigError = 2;

struct Args {
  std::string config;
  std::string command;
  int level = 0;
  std::string alpha;
  std::uint64_t samples = 1000;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  std::string format = "csv";
  std::string fault;
};

class Outputs {
 public:
  Outputs(const std::string& dir, RunManifest& manifest) : dir_(dir), manifest_(&manifest) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }

  bool enabled() const { return !dir_.empty(); }

  std::ofstream open(const std::string& name) {
    const fs::path path = fs::path(dir_) / name;
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
    manifest_->outputs.push_back(path.string());
    return os;
  }

  void json(const std::string& name, const nlohmann::json& j) { open(name) << j.dump(2) << "\n"; }

 private:
  std::string dir_;
  RunManifest* manifest_;
};

int level_or(const Args& a, int fallback) { return a.level > 0 ? a.level : fallback; }

int cmd_verify(const SupportGroup& G, const Args& a, Outputs& out) {
  VerifyOptions o;
  o.max_level = level_or(a, 3);
  o.seed = a.seed;
  o.mc_samples = a.samples;
  if (a.fault == "mass-scale") o.mass_fault = 2;
  const auto results = run_verify(G, o);
  print_table(results, std::cout);
  if (out.enabled()) {
    if (a.format == "json") {
      out.json("checks.json", checks_json(results));
    } else {
      auto os = out.open("checks.csv");
      write_checks_csv(results, os);
    }
  }
  if (!all_passed(results)) {
    std::cerr << to_string(ErrorCode::NumericalFailure) << ": " << first_failure(results) << "\n";
    return kCheckFailure;
  }
  return kOk;
}

int cmd_simulate(const SupportGroup& G, const Args& a, Outputs& out) {
  const TowerSpec& t = G.tower();
  const int n = level_or(a, 2);
  t.require_algebraic(n);
  const LevyTable table(t, n);
  const JumpSampler sampler(G, table);
  StopRule stop;
  stop.horizon = a.horizon;
  std::vector<PathRecord> paths;
  for (std::uint64_t i = 0; i < a.samples; ++i) paths.push_back(simulate_path(G, sampler, stop, a.seed, i));
  std::uint64_t jumps = 0;
  for (const auto& p : paths) jumps += p.times.size();
  std::cout << "simulated " << paths.size() << " paths at level " << n << " on [0, " << a.horizon << "], " << jumps
            << " jumps, rate " << static_cast<double>(table.total()) << "\n";

  std::vector<ExitStats> exits;
  for (int N = 1; N < n; ++N) {
    exits.push_back(exit_ensemble(G, n, N, a.samples, a.seed, a.samples));
    const Summary s = exits.back().pi_summary();
    std::cout << "pi(" << N << "): mean " << s.mean << " +- " << s.std_error << ", 1/Lambda_" << N << " = "
              << static_cast<double>(1 / total_mass(t, N)) << ", censored " << exits.back().censored << "\n";
  }
  if (!out.enabled()) return kOk;
  if (a.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : paths) arr.push_back(path_json(p, G));
    out.json("paths.json", arr);
    for (const auto& e : exits) out.json("exit_N" + std::to_string(e.N) + ".json", exit_stats_json(e));
  } else {
    auto os = out.open("paths.csv");
    os << "path,";
    for (std::size_t i = 0; i < paths.size(); ++i) {
      std::ostringstream body;
      write_path_csv(paths[i], G, body);
      std::string text = body.str();
      std::istringstream lines(text);
      std::string line;
      std::getline(lines, line);
      if (i == 0) os << line << "\n";
      while (std::getline(lines, line)) os << i << "," << line << "\n";
    }
    if (paths.empty()) os << "jump,time,digits,shell,delta_level\n";
    for (const auto& e : exits) {
      auto es = out.open("exit_N" + std::to_string(e.N) + ".csv");
      write_exit_csv(e, es);
    }
  }
  return kOk;
}

int cmd_analyze(const SupportGroup& G, const Args& a, Outputs& out) {
  const TowerSpec& t = G.tower();
  const int n = level_or(a, 3);
  t.require_algebraic(n);
  const JumpSampler sampler(G, LevyTable(t, n));
  StopRule stop;
  stop.horizon = a.horizon;
  std::vector<PathRecord> paths;
  for (std::uint64_t i = 0; i < a.samples; ++i) paths.push_back(simulate_path(G, sampler, stop, a.seed, i));
  std::vector<int> levels;
  for (int k = 1; k <= n; ++k) levels.push_back(k);
  const DimensionReport r = analyze_paths(G, paths, levels, a.horizon);
  write_dimension_summary_csv(r, std::cout);

  const BnSequence seq = bn_sequence(t, t.depth());
  LimsupResult lim;
  const bool limsup = seq.blocks.size() >= 2;
  if (limsup) lim = limsup_statistic(t, t.depth(), a.samples, a.seed + 1);

  if (!out.enabled()) return kOk;
  if (a.format == "json") {
    nlohmann::json j = dimension_json(r);
    if (limsup) j["limsup"] = {{"n_lo", lim.n_lo}, {"n_hi", lim.n_hi}, {"max_b", lim.max_b}, {"max_B", lim.max_B}};
    out.json("dimension.json", j);
  } else {
    auto d = out.open("dimension.csv");
    write_dimension_csv(r, d);
    auto s = out.open("dimension_summary.csv");
    write_dimension_summary_csv(r, s);
    if (limsup) {
      auto l = out.open("limsup.csv");
      l << "path,max_pi_over_b,max_pi_over_B\n" << std::setprecision(17);
      for (std::size_t i = 0; i < lim.max_b.size(); ++i) {
        l << i << "," << lim.max_b[i] << ",";
        if (!lim.max_B.empty()) l << lim.max_B[i];
        l << "\n";
      }
    }
  }
  return kOk;
}

int cmd_report(const SupportGroup& G, const Args& a, Outputs& out) {
  const TowerSpec& t = G.tower();
  const int top = std::min(level_or(a, 3), t.depth());
  std::vector<QComparison> rows;
  for (int n = 2; n <= top; ++n) {
    if (!t.level(n).algebraic || !t.enumerable(n) || t.group_order(n) > 8192) continue;
    for (int N = 1; N < n; ++N) {
      QComparison q;
      q.n = n;
      q.N = N;
      q.exact = static_cast<double>(q_exact(G, n, N));
      q.mc = q_mc(G, n, N, a.samples, a.seed);
      rows.push_back(q);
    }
  }
  write_q_csv(rows, std::cout);
  if (!out.enabled()) return kOk;
  if (a.format == "json") {
    nlohmann::json q = nlohmann::json::array();
    for (const auto& r : rows)
      q.push_back({{"n", r.n}, {"N", r.N}, {"q_exact", r.exact}, {"q_mc", r.mc.estimate},
                   {"ci", {r.mc.ci.lo, r.mc.ci.hi}}, {"trials", r.mc.trials}});
    nlohmann::json seq = nlohmann::json::array();
    const BnSequence s = bn_sequence(t, t.depth());
    for (int n = 1; n <= t.depth(); ++n)
      seq.push_back({{"n", n},
                     {"total_mass", static_cast<double>(total_mass(t, n))},
                     {"ratio", static_cast<double>(asymptotic_ratio(t, n))},
                     {"b_n", static_cast<double>(s.b_at(n))}});
    out.json("report.json", {{"tower", tower_json(t)}, {"q", q}, {"sequence", seq}});
  } else {
    auto sh = out.open("shells.csv");
    write_shell_csv(t, t.depth(), sh);
    auto sq = out.open("sequence.csv");
    write_sequence_csv(t, t.depth(), sq);
    auto qc = out.open("q_comparison.csv");
    write_q_csv(rows, qc);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jump processes on tamely ramified towers of local fields"};
  Args a;
  app.add_option("--config", a.config, "tower description (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--command", a.command, "what to run")
      ->required()
      ->check(CLI::IsMember({"verify", "simulate", "analyze", "report"}));
  app.add_option("--level", a.level, "level n (verify: highest level checked)")->check(CLI::PositiveNumber);
  app.add_option("--alpha", a.alpha, "override the stability index");
  app.add_option("--samples", a.samples, "paths per ensemble");
  app.add_option("--horizon", a.horizon, "time horizon")->check(CLI::PositiveNumber);
  auto* seed = app.add_option("--seed", a.seed, "master seed (default: from the config)");
  app.add_option("--out", a.out, "output directory");
  app.add_option("--format", a.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--fault", a.fault, "")->group("")->check(CLI::IsMember({"mass-scale"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (a.samples == 0) throw Error(ErrorCode::ConfigError, "--samples must be positive");
    TowerSpec tower = build_tower(load_tower_config(a.config));
    if (!a.alpha.empty()) tower = tower.with_alpha(parse_alpha(a.alpha), a.alpha);
    if (seed->count() == 0) a.seed = tower.seed();
    if (a.level > tower.depth())
      throw Error(ErrorCode::ConfigError, "--level exceeds the tower depth " + std::to_string(tower.depth()));

    RunManifest manifest;
    manifest.config_path = a.config;
    manifest.command = a.command;
    manifest.format = a.format;
    manifest.seed = a.seed;
    manifest.level = a.level;
    manifest.alpha_override = a.alpha;
    manifest.samples = a.samples;
    manifest.horizon = a.horizon;
    manifest.lk_cap = VerifyOptions{}.lk_cap;
    manifest.dense_cap = VerifyOptions{}.dense_cap;
    manifest.started = utc_timestamp();

    const SupportGroup G(tower, std::min(tower.algebra_levels(), std::max(4, a.level)));
    Outputs out(a.out, manifest);
    int code = kOk;
    if (a.command == "verify") code = cmd_verify(G, a, out);
    if (a.command == "simulate") code = cmd_simulate(G, a, out);
    if (a.command == "analyze") code = cmd_analyze(G, a, out);
    if (a.command == "report") code = cmd_report(G, a, out);

    if (out.enabled()) {
      manifest.finished = utc_timestamp();
      manifest.outputs.push_back((fs::path(a.out) / "manifest.json").string());
      std::ofstream(fs::path(a.out) / "manifest.json") << manifest_json(manifest, tower).dump(2) << "\n";
    }
    return code;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::NumericalFailure:
      case ErrorCode::TamenessViolated:
        return kCheckFailure;
      default:
        return kConfigError;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}
