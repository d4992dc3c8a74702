#include "tamelevy/simulator.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "tamelevy/error.hpp"

namespace tamelevy {

JumpSampler::JumpSampler(const SupportGroup& group, const LevyTable& table)
    : group_(&group), n_(table.level()), rate_(table.total()) {
  const LevelInfo& L = group.tower().level(n_);
  group.tower().require_algebraic(n_);
  const int ne = n_ * L.e;
  double acc = 0;
  for (int j0 = 0; j0 < ne; ++j0) {
    acc += static_cast<double>(table.shell_probability(j0));
    cumulative_.push_back(acc);
  }
  for (int j0 = 0; j0 < ne; ++j0)
    for (int c = 0; c < L.m; ++c) {
      const int b = c / L.f;
      min_power_.push_back(std::max(0, (j0 - b + L.e - 1) / L.e));
    }
}

int JumpSampler::sample_shell(CounterRng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                   static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
}

Coords JumpSampler::sample_in_shell(int j0, CounterRng& rng) const {
  const LevelInfo& L = group_->tower().level(n_);
  const auto p = static_cast<std::int64_t>(group_->tower().p());
  const std::size_t m = static_cast<std::size_t>(L.m);
  Coords x(m, 0);
  for (;;) {
    for (std::size_t c = 0; c < m; ++c) {
      const int k = min_power_[static_cast<std::size_t>(j0) * m + c];
      if (k >= n_) {
        x[c] = 0;
        continue;
      }
      std::int64_t scale = 1, span = 1;
      for (int i = 0; i < k; ++i) scale *= p;
      for (int i = k; i < n_; ++i) span *= p;
      x[c] = scale * static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
    }
    if (group_->shell_of(n_, x) == j0) return x;
  }
}

Coords JumpSampler::sample(CounterRng& rng) const { return sample_in_shell(sample_shell(rng), rng); }

PathRecord simulate_path(const SupportGroup& group, const JumpSampler& sampler, const StopRule& stop,
                         std::uint64_t seed, std::uint64_t stream) {
  const int n = sampler.level();
  const auto P = static_cast<std::int64_t>(group.tower().level(n).p_pow_n);
  CounterRng rng(seed, stream);
  PathRecord path;
  path.level = n;
  path.dimension = group.tower().level(n).m;
  path.seed = seed;
  path.stream = stream;
  path.tower_hash = group.tower().hash();
  path.exit_level = stop.exit_level;
  const double rate = static_cast<double>(sampler.rate());
  Coords state(static_cast<std::size_t>(group.tower().level(n).m), 0);
  double t = 0;
  for (std::uint64_t jumps = 0;; ++jumps) {
    if (jumps == stop.max_jumps) {
      path.end_time = t;
      break;
    }
    double dt = 0;
    while (dt == 0) dt = rng.exponential(rate);
    if (t + dt > stop.horizon) {
      path.end_time = stop.horizon;
      break;
    }
    t += dt;
    const Coords inc = sampler.sample(rng);
    for (std::size_t c = 0; c < state.size(); ++c) state[c] = (state[c] + inc[c]) % P;
    path.times.push_back(t);
    path.states.push_back(state);
    if (stop.exit_level > 0 && group.delta_level_coords(n, inc) < stop.exit_level) {
      path.exited = true;
      path.end_time = t;
      break;
    }
  }
  return path;
}

Coords state_at(const PathRecord& path, double t) {
  const auto it = std::upper_bound(path.times.begin(), path.times.end(), t);
  if (it == path.times.begin()) return Coords(static_cast<std::size_t>(path.dimension), 0);
  return path.states[static_cast<std::size_t>(it - path.times.begin()) - 1];
}

namespace {

std::size_t exit_index(const SupportGroup& group, const PathRecord& path, int N) {
  const auto P = static_cast<std::int64_t>(group.tower().level(path.level).p_pow_n);
  Coords prev(static_cast<std::size_t>(path.dimension), 0);
  Coords inc(prev.size());
  for (std::size_t i = 0; i < path.states.size(); ++i) {
    for (std::size_t c = 0; c < inc.size(); ++c) inc[c] = ((path.states[i][c] - prev[c]) % P + P) % P;
    if (group.delta_level_coords(path.level, inc) < N) return i;
    prev = path.states[i];
  }
  throw Error(ErrorCode::Censored, "path ends at t = " + std::to_string(path.end_time) + " before leaving S_" +
                                       std::to_string(N));
}

bool in_subgroup(const SupportGroup& group, int level, const Coords& x, int n) {
  return group.delta_level_coords(level, x) >= n;
}

}  // namespace

double first_exit_time(const SupportGroup& group, const PathRecord& path, int N) {
  return path.times[exit_index(group, path, N)];
}

double occupation_tau(const SupportGroup& group, const PathRecord& path, int n, int N) {
  if (n <= N || n > path.level) throw Error(ErrorCode::InvalidLevels, "need N < n <= path level");
  const std::size_t k = exit_index(group, path, N);
  double tau = path.times.empty() ? 0 : path.times[0];
  for (std::size_t i = 0; i < k; ++i)
    if (in_subgroup(group, path.level, path.states[i], n)) tau += path.times[i + 1] - path.times[i];
  return tau;
}

bool q_event(const SupportGroup& group, const PathRecord& path, int n, int N) {
  if (n <= N || n > path.level) throw Error(ErrorCode::InvalidLevels, "need N < n <= path level");
  const std::size_t kN = exit_index(group, path, N);
  const std::size_t kn = exit_index(group, path, n);
  for (std::size_t i = kn; i < kN; ++i)
    if (in_subgroup(group, path.level, path.states[i], n)) return false;
  return true;
}

ExitStats exit_ensemble(const SupportGroup& group, int n, int N, std::uint64_t samples, std::uint64_t seed,
                        std::uint64_t stream0) {
  if (N < 1 || N >= n) throw Error(ErrorCode::InvalidLevels, "need 1 <= N < n");
  const LevyTable table(group.tower(), n);
  const JumpSampler sampler(group, table);
  StopRule stop;
  stop.exit_level = N;
  ExitStats stats;
  stats.n = n;
  stats.N = N;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const PathRecord path = simulate_path(group, sampler, stop, seed, stream0 + i);
    if (!path.exited) {
      ++stats.censored;
      continue;
    }
    stats.pi.push_back(path.end_time);
    stats.tau.push_back(occupation_tau(group, path, n, N));
    stats.q.push_back(q_event(group, path, n, N));
  }
  return stats;
}

QEstimate q_mc(const SupportGroup& group, int n, int N, std::uint64_t samples, std::uint64_t seed,
               double confidence) {
  const ExitStats stats = exit_ensemble(group, n, N, samples, seed);
  QEstimate q;
  q.trials = stats.q.size();
  q.successes = static_cast<std::uint64_t>(std::count(stats.q.begin(), stats.q.end(), true));
  q.censored = stats.censored;
  q.estimate = q.trials ? static_cast<double>(q.successes) / static_cast<double>(q.trials) : 0;
  q.ci = wilson_interval(q.successes, q.trials, confidence);
  q.confidence = confidence;
  return q;
}

std::vector<double> exit_times_thinned(const TowerSpec& tower, int n_max, CounterRng& rng) {
  std::vector<double> pi(static_cast<std::size_t>(n_max));
  long double prev = 0;
  double running = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_max; ++k) {
    const long double next = total_mass(tower, k + 1);
    running = std::min(running, rng.exponential(static_cast<double>(next - prev)));
    pi[static_cast<std::size_t>(k)] = running;
    prev = next;
  }
  return pi;
}

LimsupResult limsup_statistic(const TowerSpec& tower, int n_hi, std::uint64_t paths, std::uint64_t seed,
                              double scale, int n_lo) {
  const BnSequence seq = bn_sequence(tower, n_hi);
  if (n_lo == 0) {
    if (seq.blocks.size() < 2) throw Error(ErrorCode::ZeroBn, "b_n vanishes on the whole range");
    n_lo = seq.blocks[1];
  }
  if (seq.b_at(n_lo) <= 0) throw Error(ErrorCode::ZeroBn, "b_" + std::to_string(n_lo) + " = 0");
  LimsupResult r;
  r.n_lo = n_lo;
  r.n_hi = n_hi;
  for (std::uint64_t i = 0; i < paths; ++i) {
    CounterRng rng(seed, i);
    const std::vector<double> pi = exit_times_thinned(tower, n_hi, rng);
    double mb = 0, mB = 0;
    for (int n = n_lo; n <= n_hi; ++n) {
      const double v = pi[static_cast<std::size_t>(n - 1)];
      mb = std::max(mb, v / (scale * static_cast<double>(seq.b_at(n))));
      if (!seq.alpha_too_small) mB = std::max(mB, v / (scale * static_cast<double>(seq.B[static_cast<std::size_t>(n - 1)])));
    }
    r.max_b.push_back(mb);
    if (!seq.alpha_too_small) r.max_B.push_back(mB);
  }
  return r;
}

void write_path_csv(const PathRecord& path, const SupportGroup& group, std::ostream& os) {
  os << "jump,time,digits,shell,delta_level\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < path.states.size(); ++i) {
    const Coords& x = path.states[i];
    os << i + 1 << "," << path.times[i] << "," << digits_to_string(group.from_coords(path.level, x).digits) << ","
       << group.shell_of(path.level, x) << "," << group.delta_level_coords(path.level, x) << "\n";
  }
}

}  // namespace tamelevy
