#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "tamelevy/levy_measure.hpp"
#include "tamelevy/rng.hpp"
#include "tamelevy/stats.hpp"
#include "tamelevy/support_group.hpp"

namespace tamelevy {

// Draws increments of the chain on G_n: shell by its share of Lambda_n, then
// a uniform coset of that shell by rejection from the subgroup of cosets
// with shell >= j0. No enumeration, so any algebraic level works.
class JumpSampler {
 public:
  JumpSampler(const SupportGroup& group, const LevyTable& table);

  int level() const { return n_; }
  long double rate() const { return rate_; }
  int sample_shell(CounterRng& rng) const;
  Coords sample_in_shell(int j0, CounterRng& rng) const;
  Coords sample(CounterRng& rng) const;

 private:
  const SupportGroup* group_;
  int n_;
  long double rate_;
  std::vector<double> cumulative_;
  std::vector<int> min_power_;  // per coordinate, at shell index j0 (row-major)
};

struct StopRule {
  double horizon = std::numeric_limits<double>::infinity();
  int exit_level = 0;  // stop at the first jump leaving S_N; 0 disables
  std::uint64_t max_jumps = 50'000'000;
};

struct PathRecord {
  int level = 0;
  int dimension = 0;           // m_n, the length of every state
  std::vector<double> times;   // jump times, strictly increasing
  std::vector<Coords> states;  // state after each jump; the start is 0
  double end_time = 0;         // horizon, or the exit time
  bool exited = false;
  int exit_level = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t tower_hash = 0;
};

PathRecord simulate_path(const SupportGroup& group, const JumpSampler& sampler, const StopRule& stop,
                         std::uint64_t seed, std::uint64_t stream);

// State at time t (right-continuous), as a coordinate vector at path level.
Coords state_at(const PathRecord& path, double t);

// pi(N): first jump whose post-state leaves S_N. Throws Censored.
double first_exit_time(const SupportGroup& group, const PathRecord& path, int N);
// tau(n, N): time spent in S_n up to pi(N).
double occupation_tau(const SupportGroup& group, const PathRecord& path, int n, int N);
// True when the path stays outside S_n on [pi(n), pi(N)).
bool q_event(const SupportGroup& group, const PathRecord& path, int n, int N);

struct ExitStats {
  int n = 0;
  int N = 0;
  std::vector<double> pi;
  std::vector<double> tau;
  std::vector<bool> q;
  std::uint64_t censored = 0;
  Summary pi_summary() const { return summarize(pi); }
  Summary tau_summary() const { return summarize(tau); }
};

// Paths at level n stopped at exit from S_N; stream ids stream0, stream0 + 1, ...
ExitStats exit_ensemble(const SupportGroup& group, int n, int N, std::uint64_t samples, std::uint64_t seed,
                        std::uint64_t stream0 = 0);

struct QEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  std::uint64_t censored = 0;
  double estimate = 0;
  Interval ci;
  double confidence = 0.99;
};
QEstimate q_mc(const SupportGroup& group, int n, int N, std::uint64_t samples, std::uint64_t seed,
               double confidence = 0.99);

// Joint first exit times pi(1) >= pi(2) >= ... >= pi(n_max) of one path.
// Increments outside S_n arrive as a Poisson stream of rate Lambda_n; splitting
// it by the Delta-class k of the increment (S_k \ S_{k+1}, rate
// Lambda_{k+1} - Lambda_k) gives independent exponential clocks E_k, and
// pi(n) = min_{k < n} E_k. Closed-form rates only, so n_max may exceed the
// algebraic levels.
std::vector<double> exit_times_thinned(const TowerSpec& tower, int n_max, CounterRng& rng);

struct LimsupResult {
  int n_lo = 0;
  int n_hi = 0;
  std::vector<double> max_b;  // per path, max_n pi(n) / (scale b_n)
  std::vector<double> max_B;  // empty when alpha <= log_{q_1} 2
};
// n_lo defaults to the start of the second block, where b_n > 0.
LimsupResult limsup_statistic(const TowerSpec& tower, int n_hi, std::uint64_t paths, std::uint64_t seed,
                              double scale = 1, int n_lo = 0);

void write_path_csv(const PathRecord& path, const SupportGroup& group, std::ostream& os);

}  // namespace tamelevy
