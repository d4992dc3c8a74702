#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <map>
#include <sstream>

#include "tamelevy/error.hpp"
#include "tamelevy/rng.hpp"
#include "tamelevy/support_group.hpp"
#include "test_common.hpp"

using namespace tamelevy;

namespace {

CosetIndex random_coset(const SupportGroup& G, int n, CounterRng& rng) {
  const TowerSpec& t = G.tower();
  CosetIndex g = G.zero(n);
  for (auto& a : g.digits) a = rng.below(t.level(n).q);
  return g;
}

mpq_class q(long a, long b = 1) {
  mpq_class r(a, b);
  r.canonicalize();
  return r;
}

}  // namespace

TEST_CASE("orders and Haar measure, unramified quadratic") {
  const TowerSpec t = testing::make(2, {{1, 1}, {1, 2}});
  const SupportGroup G(t);
  CHECK(G.group_order(1) == 2);
  CHECK(G.group_order(2) == 16);
  CHECK(G.haar_cylinder(2, 1) == q(1, 16));
  CHECK(G.haar_cylinder(2, 16) == 1);
  CHECK(G.coset_enumerate(2).size() == 16);
}

TEST_CASE("delta level on the unramified quadratic tower") {
  const TowerSpec t = testing::make(2, {{1, 1}, {1, 2}});
  const SupportGroup G(t);
  const CosetIndex one{2, {1, 0}};
  const CosetIndex omega{2, {2, 0}};
  CHECK(G.delta_level(one) == 1);
  CHECK(G.delta_level_exact(one) == 1);
  CHECK(G.delta_level(omega) == 0);
  CHECK(G.delta_level_exact(omega) == 0);
  CHECK(G.ultrametric(omega).value == 1);
  CHECK(G.ultrametric(one).value == doctest::Approx(0.5));
  CHECK(G.ultrametric(G.zero(2)).value == 0);
  CHECK_FALSE(G.ultrametric(G.zero(2)).resolved);
}

TEST_CASE("duality at p=2, n=1") {
  const TowerSpec t = testing::make(2, {{1, 1}, {1, 2}});
  const SupportGroup G(t);
  const auto duals = G.dual_enumerate(1);
  REQUIRE(duals.size() == 2);
  const DualIndex half{1, 1, {1}};
  CHECK(G.dual_rep(half) == FieldElement::from_rational(t, 1, q(1, 2)));
  CHECK(G.pairing(CosetIndex{1, {1}}, half).angle() == q(1, 2));
  CHECK(G.pairing_exact(CosetIndex{1, {1}}, half).angle() == q(1, 2));
  CHECK(G.pairing(G.zero(1), half).is_one());
}

TEST_CASE("digit and coordinate round trips") {
  CounterRng rng(21, 0);
  for (const char* name : {"T1", "T2", "T3"}) {
    const TowerSpec t = testing::load(name);
    const SupportGroup G(t, 3);
    for (int n = 1; n <= G.max_level(); ++n)
      for (int trial = 0; trial < 50; ++trial) {
        const CosetIndex g = random_coset(G, n, rng);
        CHECK(G.from_coords(n, G.to_coords(g)) == g);
        CHECK(G.coset_of(G.coset_rep(g)) == g);
        const DualIndex xi = G.dual_from_coords(n, G.to_coords(g));
        CHECK(G.dual_coords(xi) == G.to_coords(g));
        CHECK(G.dual_class_of(G.dual_rep(xi)) == xi);
      }
  }
}

TEST_CASE("coset arithmetic matches representative arithmetic") {
  CounterRng rng(22, 0);
  for (const char* name : {"T1", "T2", "T3"}) {
    const TowerSpec t = testing::load(name);
    const SupportGroup G(t, 3);
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(G.max_level())));
      const CosetIndex g = random_coset(G, n, rng);
      const CosetIndex h = random_coset(G, n, rng);
      CHECK(G.coset_of(add(G.coset_rep(g), G.coset_rep(h))) == G.add(g, h));
      CHECK(G.add(g, G.negate(g)) == G.zero(n));
    }
    CHECK(G.coset_of(FieldElement::zero(t, 1)) == G.zero(1));
  }
}

TEST_CASE("coset_of rejects elements outside the ball") {
  const TowerSpec t = testing::load("T2");
  const SupportGroup G(t, 2);
  const FieldElement big = FieldElement::monomial(t, 2, -3, 0);
  CHECK_THROWS_AS(G.coset_of(big), Error);
  try {
    G.coset_of(big);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfBall);
  }
}

TEST_CASE("projection: exact equals matrix, homomorphism, fibers, composition") {
  CounterRng rng(23, 0);
  for (const char* name : {"T1", "T2", "T3"}) {
    const TowerSpec t = testing::load(name);
    const SupportGroup G(t, 3);
    const int top = G.max_level();
    for (int trial = 0; trial < 200; ++trial) {
      const CosetIndex g = random_coset(G, top, rng);
      const CosetIndex h = random_coset(G, top, rng);
      for (int n = 1; n < top; ++n) {
        CHECK(G.project(g, n) == G.project_exact(g, n));
        CHECK(G.project(G.add(g, h), n) == G.add(G.project(g, n), G.project(h, n)));
        for (int j = n + 1; j < top; ++j) CHECK(G.project(G.project(g, j), n) == G.project(g, n));
      }
    }
    CHECK(G.project(G.zero(top), 1) == G.zero(1));
  }
  const TowerSpec t = testing::make(2, {{1, 1}, {1, 2}});
  const SupportGroup G(t);
  std::map<std::vector<std::uint64_t>, int> fiber;
  for (const auto& g : G.coset_enumerate(2)) ++fiber[G.project(g, 1).digits];
  CHECK(fiber.size() == 2);
  for (const auto& [k, v] : fiber) CHECK(v == 8);
}

TEST_CASE("delta level is representative independent and matches the exact test") {
  CounterRng rng(24, 0);
  for (const char* name : {"T1", "T2", "T3"}) {
    const TowerSpec t = testing::load(name);
    const SupportGroup G(t, 3);
    const int n = G.max_level();
    const LevelInfo& L = t.level(n);
    for (int trial = 0; trial < 100; ++trial) {
      // bias towards deep cosets so every delta level shows up
      CosetIndex g = random_coset(G, n, rng);
      const std::size_t zeros = rng.below(g.digits.size() + 1);
      for (std::size_t i = 0; i < zeros; ++i) g.digits[i] = 0;
      const int dl = G.delta_level(g);
      CHECK(dl == G.delta_level_exact(g));
      // another representative: add an element of the S_n ball m pi^{-d} p^n O
      std::vector<mpq_class> c(static_cast<std::size_t>(L.m));
      for (auto& v : c) v = static_cast<long>(rng.below(7)) - 3;
      const FieldElement shift = scale(mul(t, FieldElement(n, std::move(c)), FieldElement::monomial(t, n, -L.d, 0)),
                                       mpq_class(static_cast<long>(L.m * L.p_pow_n)));
      const FieldElement other = add(G.coset_rep(g), shift);
      CHECK(G.coset_of(other) == g);
      for (int N = 1; N < n; ++N) CHECK(G.coset_of(t_map(t, other, N)) == G.project(g, N));
      // projection never increases Delta
      for (int N = 1; N < n; ++N) CHECK(G.delta_level(G.project(g, N)) >= std::min(dl, N));
    }
  }
}

TEST_CASE("dual enumeration counts and pairing agreement") {
  CounterRng rng(25, 0);
  for (const char* name : {"T1", "T2", "T3"}) {
    const TowerSpec t = testing::load(name);
    const SupportGroup G(t, 2);
    for (int n = 1; n <= 2; ++n) {
      const auto duals = G.dual_enumerate(n);
      CHECK(duals.size() == G.group_order(n));
      std::map<int, std::uint64_t> per_shell;
      for (const auto& xi : duals) ++per_shell[xi.shell];
      const std::uint64_t qn = t.level(n).q;
      CHECK(per_shell[0] == 1);
      std::uint64_t expect = qn - 1;
      for (int j = 1; j <= n * t.level(n).e; ++j, expect *= qn) CHECK(per_shell[j] == expect);
      for (int trial = 0; trial < 100; ++trial) {
        const CosetIndex g = random_coset(G, n, rng);
        const CosetIndex h = random_coset(G, n, rng);
        const DualIndex& xi = duals[rng.below(duals.size())];
        CHECK(G.pairing(g, xi) == G.pairing_exact(g, xi));
        CHECK(G.pairing(G.add(g, h), xi) == G.pairing(g, xi) * G.pairing(h, xi));
      }
    }
  }
}

TEST_CASE("character table orthogonality") {
  for (const char* name : {"T1", "T2", "T3"}) {
    const TowerSpec t = testing::load(name);
    const SupportGroup G(t, 2);
    const int n = t.group_order(2) <= 700 ? 2 : 1;
    const auto cosets = G.coset_enumerate(n);
    const auto duals = G.dual_enumerate(n);
    std::vector<std::vector<std::complex<double>>> table(duals.size());
    for (std::size_t i = 0; i < duals.size(); ++i)
      for (const auto& g : cosets) table[i].push_back(G.pairing(g, duals[i]).value());
    double worst = 0;
    for (std::size_t i = 0; i < duals.size(); ++i)
      for (std::size_t j = 0; j < duals.size(); ++j) {
        std::complex<double> s = 0;
        for (std::size_t k = 0; k < cosets.size(); ++k) s += table[i][k] * std::conj(table[j][k]);
        const double expect = i == j ? static_cast<double>(cosets.size()) : 0.0;
        worst = std::max(worst, std::abs(s - expect) / static_cast<double>(cosets.size()));
      }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("annihilator of S_n is exactly the ball of radius q_n^{n e_n}") {
  for (const char* name : {"T1", "T2", "T3"}) {
    const TowerSpec t = testing::load(name);
    const SupportGroup G(t, 3);
    for (int n = 1; n + 1 <= G.max_level() && t.enumerable(n + 1); ++n) {
      const int nu = n + 1;
      std::vector<CosetIndex> inside;
      for (const auto& g : G.coset_enumerate(nu))
        if (G.delta_level(g) >= n) inside.push_back(g);
      CHECK(inside.size() == G.group_order(nu) / G.group_order(n));
      for (const auto& xi : G.dual_enumerate(n)) {
        const DualIndex lifted = G.dual_class_of(embed(t, G.dual_rep(xi), nu));
        for (const auto& g : inside) CHECK(G.pairing(g, lifted).is_one());
      }
      const int ne = n * t.level(n).e;
      for (std::uint64_t u = 1; u < t.level(n).q; ++u) {
        const FieldElement outside = mul(t, FieldElement::lift(t, n, u), FieldElement::monomial(t, n, -(ne + 1), 0));
        const DualIndex lifted = G.dual_class_of(embed(t, outside, nu));
        bool witnessed = false;
        for (const auto& g : inside) witnessed = witnessed || !G.pairing(g, lifted).is_one();
        CHECK(witnessed);
      }
    }
  }
}

TEST_CASE("Sigma balls map onto each other under T") {
  const TowerSpec t1 = testing::make(2, {{1, 1}, {1, 2}});
  CHECK(SupportGroup(t1).lemma1_surjectivity_check(2, 1, 0));
  const TowerSpec t5 = testing::make(5, {{1, 1}, {2, 1}});
  CHECK(SupportGroup(t5).lemma1_surjectivity_check(2, 1, 1));
  for (const char* name : {"T1", "T2", "T3"}) {
    const TowerSpec t = testing::load(name);
    const SupportGroup G(t, 3);
    for (int nu = 2; nu <= G.max_level(); ++nu)
      for (int n = 1; n < nu; ++n)
        for (int N = 0; N <= nu; ++N) CHECK(G.lemma1_surjectivity_check(nu, n, N));
  }
}

TEST_CASE("containment: T_n of random Sigma_{nu,N} elements lands in Sigma_{n,N}") {
  CounterRng rng(26, 0);
  for (const char* name : {"T1", "T2", "T3"}) {
    const TowerSpec t = testing::load(name);
    const int nu = std::min(t.algebra_levels(), 3);
    const LevelInfo& Lv = t.level(nu);
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(nu - 1)));
      const int N = static_cast<int>(rng.below(3));
      std::vector<mpq_class> c(static_cast<std::size_t>(Lv.m));
      for (auto& v : c) v = static_cast<long>(rng.below(31)) - 15;
      mpz_class pN;
      mpz_ui_pow_ui(pN.get_mpz_t(), t.p(), static_cast<unsigned long>(N));
      const FieldElement y = scale(mul(t, FieldElement(nu, std::move(c)), FieldElement::monomial(t, nu, -Lv.d, 0)),
                                   mpq_class(pN * Lv.m));
      const FieldElement z = t_map(t, y, n);
      const LevelInfo& Ln = t.level(n);
      const auto v = valuation(t, z);
      const long bound = static_cast<long>(N) * Ln.e - Ln.d + Ln.e * padic_valuation(mpq_class(Ln.m), t.p());
      CHECK((!v || *v >= bound));
    }
  }
}

TEST_CASE("table dump") {
  const TowerSpec t = testing::make(2, {{1, 1}, {1, 2}});
  const SupportGroup G(t);
  std::ostringstream os;
  G.write_tables_csv(2, os);
  const std::string s = os.str();
  CHECK(s.rfind("kind,row,col,digits,shell,angle_num,angle_den\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 16 + 16 + 256);
}
