#include "tamelevy/report.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <ostream>

namespace tamelevy {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json tower_json(const TowerSpec& t) {
  nlohmann::json levels = nlohmann::json::array();
  for (int n = 1; n <= t.depth(); ++n) {
    const LevelInfo& L = t.level(n);
    levels.push_back({{"n", n}, {"e", L.e}, {"f", L.f}, {"listed", n <= t.listed_levels()}, {"algebraic", L.algebraic}});
  }
  const Tolerances& tol = t.tolerances();
  return {{"name", t.name()},
          {"p", t.p()},
          {"alpha", t.alpha_text()},
          {"levels", levels},
          {"enum_cap", t.enum_cap()},
          {"hash", t.hash()},
          {"canonical", t.canonical()},
          {"tolerances",
           {{"coset_sum", tol.coset_sum},
            {"levy_khinchin", tol.levy_khinchin},
            {"imaginary", tol.imaginary},
            {"orthogonality", tol.orthogonality},
            {"normalization", tol.normalization},
            {"semigroup", tol.semigroup},
            {"clamp", tol.clamp},
            {"lemma_slack", tol.lemma_slack}}}};
}

nlohmann::json manifest_json(const RunManifest& m, const TowerSpec& t) {
  return {{"version", kVersion},
          {"config", m.config_path},
          {"command", m.command},
          {"format", m.format},
          {"seed", m.seed},
          {"level", m.level},
          {"alpha_override", m.alpha_override},
          {"samples", m.samples},
          {"horizon", m.horizon},
          {"caps", {{"enum", t.enum_cap()}, {"levy_khinchin", m.lk_cap}, {"dense", m.dense_cap}}},
          {"tower", tower_json(t)},
          {"started", m.started},
          {"finished", m.finished},
          {"outputs", m.outputs}};
}

nlohmann::json checks_json(const std::vector<CheckResult>& results) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : results)
    out.push_back({{"suite", r.suite},
                   {"name", r.name},
                   {"status", r.skipped ? "skip" : r.passed ? "pass" : "fail"},
                   {"value", r.value},
                   {"tolerance", r.tolerance},
                   {"detail", r.detail}});
  return out;
}

nlohmann::json exit_stats_json(const ExitStats& s) {
  const Summary pi = s.pi_summary(), tau = s.tau_summary();
  const auto summary = [](const Summary& x) {
    return nlohmann::json{{"count", x.count},   {"mean", x.mean},     {"variance", x.variance},
                          {"std_error", x.std_error}, {"median", x.median}, {"min", x.min},
                          {"max", x.max}};
  };
  std::uint64_t hits = 0;
  for (bool b : s.q) hits += b;
  return {{"n", s.n},
          {"N", s.N},
          {"censored", s.censored},
          {"pi", summary(pi)},
          {"tau", summary(tau)},
          {"q_events", hits},
          {"pi_samples", s.pi},
          {"tau_samples", s.tau}};
}

nlohmann::json dimension_json(const DimensionReport& r) {
  nlohmann::json levels = nlohmann::json::array();
  const auto box = r.box_summary(), phi = r.phi_summary();
  for (std::size_t i = 0; i < r.levels.size(); ++i)
    levels.push_back({{"level", r.levels[i]},
                      {"log_scale", static_cast<double>(r.log_scale[i])},
                      {"b_n", static_cast<double>(r.b[i])},
                      {"visited", r.count[i]},
                      {"box_median", box[i].median},
                      {"box_quartiles", {box[i].q1, box[i].q3}},
                      {"phi_median", phi[i].median},
                      {"phi_quartiles", {phi[i].q1, phi[i].q3}}});
  return {{"t", r.t}, {"paths", r.paths()}, {"levels", levels}};
}

nlohmann::json path_json(const PathRecord& p, const SupportGroup& group) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& x : p.states) states.push_back(digits_to_string(group.from_coords(p.level, x).digits));
  return {{"level", p.level},   {"seed", p.seed},         {"stream", p.stream}, {"tower_hash", p.tower_hash},
          {"times", p.times},   {"states", states},       {"end_time", p.end_time},
          {"exited", p.exited}, {"exit_level", p.exit_level}};
}

void write_exit_csv(const ExitStats& s, std::ostream& os) {
  os << "sample,pi,tau,q_event\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < s.pi.size(); ++i) os << i << "," << s.pi[i] << "," << s.tau[i] << "," << s.q[i] << "\n";
}

void write_q_csv(const std::vector<QComparison>& rows, std::ostream& os) {
  os << "n,N,q_exact,q_mc,ci_lo,ci_hi,trials,censored\n";
  os << std::setprecision(17);
  for (const auto& r : rows)
    os << r.n << "," << r.N << "," << r.exact << "," << r.mc.estimate << "," << r.mc.ci.lo << "," << r.mc.ci.hi << ","
       << r.mc.trials << "," << r.mc.censored << "\n";
}

}  // namespace tamelevy
