#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tamelevy/error.hpp"
#include "tamelevy/simulator.hpp"
#include "test_common.hpp"

using namespace tamelevy;

namespace {

constexpr std::uint64_t kSeed = 7301;

std::vector<double> histogram(const SupportGroup& G, int n, const std::vector<Coords>& xs) {
  std::vector<double> h(G.group_order(n), 0);
  for (const auto& x : xs) h[G.index_of(n, x)] += 1;
  return h;
}

}  // namespace

TEST_CASE("sampler at the bottom level") {
  const TowerSpec t = testing::make(2, {{1, 1}, {1, 2}});
  const SupportGroup G(t);
  const JumpSampler s(G, LevyTable(t, 1));
  CounterRng rng(kSeed, 0);
  for (int i = 0; i < 100; ++i) CHECK(s.sample(rng) == Coords{1});
}

TEST_CASE("sampler shell law and uniformity") {
  const TowerSpec t = testing::load("T1");
  const SupportGroup G(t);
  const LevyTable table(t, 2);
  const JumpSampler s(G, table);
  CounterRng rng(kSeed, 1);
  std::vector<double> shells(2, 0);
  std::vector<Coords> draws;
  for (int i = 0; i < 100000; ++i) {
    draws.push_back(s.sample(rng));
    CHECK_FALSE(G.shell_of(2, draws.back()) == 2);
    shells[static_cast<std::size_t>(G.shell_of(2, draws.back()))] += 1;
  }
  CHECK(chi_square_gof(shells, {1.5 / 3.375, 1.875 / 3.375}).p_value > 0.01);

  std::vector<double> probs(16, 0);
  for (std::uint64_t i = 1; i < 16; ++i)
    probs[i] = static_cast<double>(table.mass(G.shell_of(2, G.element_at(2, i))) / table.total());
  std::vector<double> h = histogram(G, 2, draws);
  h.erase(h.begin());
  probs.erase(probs.begin());
  CHECK(chi_square_gof(h, probs).p_value > 0.01);
}

TEST_CASE("sampler on a ramified level") {
  const TowerSpec t = testing::load("T2");
  const SupportGroup G(t);
  const LevyTable table(t, 2);
  const JumpSampler s(G, table);
  CounterRng rng(kSeed, 2);
  std::vector<Coords> draws;
  for (int i = 0; i < 100000; ++i) draws.push_back(s.sample(rng));
  std::vector<double> h = histogram(G, 2, draws), probs(h.size(), 0);
  for (std::uint64_t i = 1; i < h.size(); ++i)
    probs[i] = static_cast<double>(table.mass(G.shell_of(2, G.element_at(2, i))) / table.total());
  CHECK(h[0] == 0);
  h.erase(h.begin());
  probs.erase(probs.begin());
  CHECK(chi_square_gof(h, probs).p_value > 0.01);
}

TEST_CASE("paths are well formed and reproducible") {
  const TowerSpec t = testing::load("T1");
  const SupportGroup G(t);
  const JumpSampler s(G, LevyTable(t, 3));
  StopRule stop;
  stop.horizon = 5;
  const PathRecord a = simulate_path(G, s, stop, kSeed, 11);
  const PathRecord b = simulate_path(G, s, stop, kSeed, 11);
  const PathRecord c = simulate_path(G, s, stop, kSeed, 12);
  CHECK(a.times == b.times);
  CHECK(a.states == b.states);
  CHECK(a.times != c.times);
  CHECK(a.tower_hash == t.hash());
  CHECK(std::is_sorted(a.times.begin(), a.times.end()));
  CHECK(std::adjacent_find(a.times.begin(), a.times.end()) == a.times.end());
  CHECK(a.end_time == 5);
  CHECK_FALSE(a.exited);
  for (std::size_t i = 1; i < a.states.size(); ++i) CHECK(a.states[i] != a.states[i - 1]);
  std::ostringstream x, y;
  write_path_csv(a, G, x);
  write_path_csv(b, G, y);
  CHECK(x.str() == y.str());
  CHECK(state_at(a, 0) == Coords(4, 0));
  if (!a.times.empty()) CHECK(state_at(a, a.times[0]) == a.states[0]);
}

TEST_CASE("jump counts are Poisson") {
  const TowerSpec t = testing::load("T1");
  const SupportGroup G(t);
  const LevyTable table(t, 2);
  const JumpSampler s(G, table);
  StopRule stop;
  stop.horizon = 1;
  std::vector<double> counts;
  for (std::uint64_t i = 0; i < 10000; ++i)
    counts.push_back(static_cast<double>(simulate_path(G, s, stop, kSeed, 100 + i).times.size()));
  const Summary sm = summarize(counts);
  const double lambda = static_cast<double>(table.total());
  CHECK(std::fabs(sm.mean - lambda) <= 3 * std::sqrt(lambda / 1e4));
}

TEST_CASE("marginals match Fourier inversion") {
  const TowerSpec t = testing::load("T1");
  const SupportGroup G(t);
  const JumpSampler s(G, LevyTable(t, 2));
  StopRule stop;
  stop.horizon = 0.5;
  std::vector<Coords> at_02, at_03, at_05;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const PathRecord path = simulate_path(G, s, stop, kSeed + 1, i);
    at_02.push_back(state_at(path, 0.2));
    at_03.push_back(state_at(path, 0.3));
    at_05.push_back(state_at(path, 0.5));
  }
  const auto compare = [&](const std::vector<Coords>& xs, double time) {
    std::vector<double> h = histogram(G, 2, xs);
    for (auto& v : h) v /= static_cast<double>(xs.size());
    const auto exact = transition_probs(G, 2, time).p;
    return total_variation(h, std::vector<double>(exact.begin(), exact.end()));
  };
  CHECK(compare(at_03, 0.3) < 0.02);
  CHECK(compare(at_02, 0.2) < 0.02);
  CHECK(compare(at_05, 0.5) < 0.02);
}

TEST_CASE("projection commutes with simulation") {
  const TowerSpec t = testing::load("T1");
  const SupportGroup G(t);
  const JumpSampler s3(G, LevyTable(t, 3)), s2(G, LevyTable(t, 2));
  StopRule stop;
  stop.horizon = 1;
  std::vector<Coords> fine, coarse;
  std::vector<double> fine_moves, coarse_moves;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const PathRecord a = simulate_path(G, s3, stop, kSeed + 2, i);
    const PathRecord b = simulate_path(G, s2, stop, kSeed + 3, i);
    fine.push_back(G.project_coords(3, 2, state_at(a, 0.7)));
    coarse.push_back(state_at(b, 0.7));
    Coords prev(2, 0);
    double moves = 0;
    for (const auto& x : a.states) {
      const Coords y = G.project_coords(3, 2, x);
      moves += y != prev;
      prev = y;
    }
    fine_moves.push_back(moves);
    coarse_moves.push_back(static_cast<double>(b.times.size()));
  }
  CHECK(chi_square_two_sample(histogram(G, 2, fine), histogram(G, 2, coarse)).p_value > 0.01);
  const double lambda2 = static_cast<double>(total_mass(t, 2));
  CHECK(std::fabs(summarize(fine_moves).mean - lambda2) <= 3 * std::sqrt(lambda2 / 2e4));
  CHECK(std::fabs(summarize(coarse_moves).mean - lambda2) <= 3 * std::sqrt(lambda2 / 2e4));
}

TEST_CASE("exit law") {
  const TowerSpec t = testing::load("T1");
  const SupportGroup G(t);
  for (int N : {1, 2}) {
    CAPTURE(N);
    const ExitStats st = exit_ensemble(G, 3, N, 10000, kSeed + 4);
    CHECK(st.censored == 0);
    const double rate = static_cast<double>(total_mass(t, N));
    const Summary sm = st.pi_summary();
    CHECK(std::fabs(sm.mean - 1 / rate) <= 3 * (1 / rate) / std::sqrt(1e4));
    CHECK(ks_exponential(st.pi, rate).p_value > 0.01);
    for (std::size_t i = 0; i < st.pi.size(); ++i) CHECK(st.tau[i] <= st.pi[i]);
  }
  const ExitStats one = exit_ensemble(G, 2, 1, 10000, kSeed + 5);
  CHECK(std::fabs(one.pi_summary().mean - 1.0) <= 3 / std::sqrt(1e4));
}

TEST_CASE("exit times along one path are ordered") {
  const TowerSpec t = testing::load("T1");
  const SupportGroup G(t);
  const JumpSampler s(G, LevyTable(t, 3));
  StopRule stop;
  stop.exit_level = 1;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const PathRecord path = simulate_path(G, s, stop, kSeed + 6, i);
    REQUIRE(path.exited);
    const double p1 = first_exit_time(G, path, 1), p2 = first_exit_time(G, path, 2), p3 = first_exit_time(G, path, 3);
    CHECK(p3 <= p2);
    CHECK(p2 <= p1);
    CHECK(p3 == path.times[0]);
    CHECK(occupation_tau(G, path, 3, 1) <= p1);
  }
}

TEST_CASE("censoring") {
  const TowerSpec t = testing::load("T1");
  const SupportGroup G(t);
  const JumpSampler s(G, LevyTable(t, 2));
  StopRule stop;
  stop.horizon = 1e-9;
  const PathRecord path = simulate_path(G, s, stop, kSeed, 0);
  bool censored = false;
  try {
    first_exit_time(G, path, 1);
  } catch (const Error& e) {
    censored = e.code() == ErrorCode::Censored;
  }
  CHECK(censored);
  CHECK_THROWS_AS(q_mc(G, 2, 2, 10, kSeed), Error);
}

TEST_CASE("Monte Carlo Q against the exact pipeline") {
  const TowerSpec t = testing::load("T1");
  const SupportGroup G(t);
  const QEstimate q = q_mc(G, 2, 1, 10000, kSeed + 7);
  const long double exact = q_exact(G, 2, 1);
  CHECK(q.trials == 10000);
  CHECK(q.estimate >= 0);
  CHECK(q.estimate <= 1);
  CHECK(q.ci.contains(static_cast<double>(exact)));
}

TEST_CASE("thinned exit times") {
  const TowerSpec t = testing::load("T1");
  std::vector<double> pi5;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    CounterRng rng(kSeed + 8, i);
    const auto pi = exit_times_thinned(t, 12, rng);
    CHECK(std::is_sorted(pi.rbegin(), pi.rend()));
    pi5.push_back(pi[4]);
  }
  CHECK(ks_exponential(pi5, static_cast<double>(total_mass(t, 5))).p_value > 0.01);
}

TEST_CASE("limsup statistic") {
  const TowerSpec t = testing::load("T1");
  CHECK_THROWS_AS(bn_sequence(t, 12).require_B(), Error);
  const TowerSpec t2 = t.with_alpha(2, "2");
  const LimsupResult r = limsup_statistic(t2, 12, 200, kSeed + 9);
  CHECK(r.n_lo == 2);
  CHECK(r.max_B.size() == 200);
  for (double v : r.max_b) CHECK(v >= 0);
  const double median = quantile(r.max_b, 0.5);
  CHECK(median >= 0.2);
  CHECK(median <= 5);
  const LimsupResult scaled = limsup_statistic(t2, 12, 200, kSeed + 9, 100);
  for (double v : scaled.max_b) CHECK(v < 1);
}
