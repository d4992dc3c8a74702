#include "tamelevy/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "tamelevy/error.hpp"
#include "tamelevy/field.hpp"
#include "tamelevy/levy_measure.hpp"
#include "tamelevy/simulator.hpp"

namespace tamelevy {

namespace {

std::string level_name(int n) { return "n=" + std::to_string(n); }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

CheckResult check(std::string suite, std::string name) {
  CheckResult r;
  r.suite = std::move(suite);
  r.name = std::move(name);
  return r;
}

CheckResult skipped(std::string suite, std::string name, std::string why) {
  CheckResult r = check(std::move(suite), std::move(name));
  r.passed = true;
  r.skipped = true;
  r.detail = std::move(why);
  return r;
}

bool dense(const TowerSpec& t, int n, std::uint64_t cap) {
  return t.level(n).algebraic && t.enumerable(n) && t.group_order(n) <= cap;
}

bool within_log_cap(const TowerSpec& t, int n, std::uint64_t cap) {
  return t.level(n).algebraic && t.log_group_order(n) <= std::log(static_cast<long double>(cap)) + 1e-9L;
}

}  // namespace

DualityReport duality_check(const SupportGroup& G, int n) {
  const TowerSpec& t = G.tower();
  DualityReport r;
  mpz_class expected;
  mpz_ui_pow_ui(expected.get_mpz_t(), t.p(), static_cast<unsigned long>(n * t.level(n).m));
  r.expected = expected.get_ui();

  std::set<std::vector<std::uint64_t>> classes;
  for (const auto& xi : G.dual_enumerate(n)) classes.insert(xi.digits);
  r.cardinality = classes.size();

  const std::int64_t P = static_cast<std::int64_t>(t.level(n).p_pow_n);
  std::vector<Coords> elems;
  G.for_each_element(n, [&](const Coords& x) { elems.push_back(x); });
  std::vector<double> c(static_cast<std::size_t>(P)), s(static_cast<std::size_t>(P));
  for (std::int64_t k = 0; k < P; ++k) {
    c[static_cast<std::size_t>(k)] = std::cos(2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(P));
    s[static_cast<std::size_t>(k)] = std::sin(2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(P));
  }
  // Rows xi, xi' of the character table are orthogonal iff the character of
  // xi - xi' sums to zero over G_n, by bi-additivity of the pairing.
  const double M = static_cast<double>(elems.size());
  for (std::size_t yi = 1; yi < elems.size(); ++yi) {
    double re = 0, im = 0;
    for (const auto& x : elems) {
      const auto k = static_cast<std::size_t>(G.pairing_numerator(n, x, elems[yi]));
      re += c[k];
      im += s[k];
    }
    r.orthogonality = std::max(r.orthogonality, std::hypot(re, im) / M);
  }

  const int nu = n + 1;
  if (nu <= G.max_level() && t.enumerable(nu) && t.group_order(nu) <= (std::uint64_t{1} << 20)) {
    r.annihilator_checked = true;
    std::vector<Coords> inside;
    G.for_each_element(nu, [&](const Coords& x) {
      if (G.delta_level_coords(nu, x) >= n) inside.push_back(x);
    });
    for (const auto& xi : G.dual_enumerate(n)) {
      const Coords y = G.dual_coords(G.dual_class_of(embed(t, G.dual_rep(xi), nu)));
      for (const auto& x : inside)
        if (G.pairing_numerator(nu, x, y) != 0) r.annihilator_members = false;
    }
    const int ne = n * t.level(n).e;
    for (std::uint64_t u = 1; u < t.level(n).q; ++u) {
      const FieldElement outside = mul(t, FieldElement::lift(t, n, u), FieldElement::monomial(t, n, -(ne + 1), 0));
      const Coords y = G.dual_coords(G.dual_class_of(embed(t, outside, nu)));
      bool witnessed = false;
      for (const auto& x : inside)
        if (G.pairing_numerator(nu, x, y) != 0) {
          witnessed = true;
          break;
        }
      if (!witnessed) r.annihilator_violations = false;
    }
  }
  return r;
}

std::vector<CheckResult> run_verify(const SupportGroup& G, const VerifyOptions& o) {
  const TowerSpec& t = G.tower();
  const Tolerances& tol = t.tolerances();
  const int top = std::min(o.max_level, t.depth());
  std::vector<CheckResult> out;

  for (int n = 1; n <= t.algebra_levels(); ++n) {
    CheckResult r = check("different-exponent", level_name(n));
    const int d = different_exponent_scan(t, n);
    r.value = d;
    r.passed = d == t.level(n).e - 1;
    r.detail = "d=" + std::to_string(d) + " e-1=" + std::to_string(t.level(n).e - 1);
    out.push_back(r);
  }

  for (int nu = 2; nu <= std::min(top, G.max_level()); ++nu) {
    CheckResult r = check("lemma1-surjectivity", "nu=" + std::to_string(nu));
    r.passed = true;
    int count = 0;
    for (int n = 1; n < nu; ++n)
      for (int N = 0; N <= nu; ++N, ++count)
        if (!G.lemma1_surjectivity_check(nu, n, N)) {
          r.passed = false;
          r.detail += "(" + std::to_string(n) + "," + std::to_string(N) + ") ";
        }
    if (r.passed) r.detail = std::to_string(count) + " maps full rank";
    out.push_back(r);
  }

  for (int n = 1; n <= top; ++n) {
    CheckResult r = check("levy-total coset-sum", level_name(n));
    const CosetSumResult c = coset_sum_check(t, n, o.lk_cap, o.mass_fault);
    r.value = static_cast<double>(c.rel_error());
    r.tolerance = tol.coset_sum;
    r.passed = r.value <= r.tolerance;
    r.detail = std::string(c.enumerated ? "enumerated" : "shell counts") + " sum=" +
               fmt(static_cast<double>(c.coset_sum)) + " closed=" + fmt(static_cast<double>(c.closed_form));
    out.push_back(r);
  }

  for (int n = 1; n <= top; ++n) {
    const bool lattice_ok = t.level(n).algebraic && n <= G.max_level();
    if (!within_log_cap(t, n, o.lk_cap) && !lattice_ok) {
      out.push_back(skipped("levy-khinchin", level_name(n), "no exact arithmetic at this level"));
      continue;
    }
    const LevyTable table = LevyTable(t, n).with_mass_scale(o.mass_fault);
    std::string route = "lattice";
    LevyKhinchinSweep s;
    if (dense(t, n, o.dense_cap)) {
      route = "brute";
      s = levy_khinchin_sweep_brute(G, table);
    } else if (within_log_cap(t, n, o.lk_cap)) {
      route = "shell";
      s = levy_khinchin_sweep_shells(G, table, o.lk_cap);
    } else {
      s = levy_khinchin_sweep_lattice(G, table);
    }
    CheckResult r = check("levy-khinchin", level_name(n));
    r.value = static_cast<double>(s.worst_error);
    r.tolerance = tol.levy_khinchin;
    r.passed = s.worst_error <= tol.levy_khinchin && s.worst_imaginary <= tol.imaginary && s.trivial_exact;
    r.detail = "all of Xi_" + std::to_string(n) + ", " + route + " route";
    out.push_back(r);
  }

  for (int n = 1; n <= top; ++n) {
    if (!dense(t, n, o.dense_cap)) {
      out.push_back(skipped("duality", level_name(n), "M(n) above the dense cap"));
      continue;
    }
    const DualityReport d = duality_check(G, n);
    CheckResult r = check("duality", level_name(n));
    r.value = d.orthogonality;
    r.tolerance = tol.orthogonality;
    r.passed = d.cardinality == d.expected && d.orthogonality <= tol.orthogonality && d.annihilator_members &&
               d.annihilator_violations;
    r.detail = "card=" + std::to_string(d.cardinality) + "/" + std::to_string(d.expected) +
               (d.annihilator_checked ? " annihilator exact" : " annihilator n/a");
    out.push_back(r);
  }

  for (int n = 2; n <= top; ++n) {
    if (!dense(t, n, o.dense_cap)) {
      out.push_back(skipped("lemma2-bound", level_name(n), "M(n) above the dense cap"));
      out.push_back(skipped("q-exact", level_name(n), "M(n) above the dense cap"));
      continue;
    }
    const LevyTable table(t, n);
    for (int N = 1; N < n; ++N) {
      const std::string name = "(" + std::to_string(n) + "," + std::to_string(N) + ")";
      const OccupationSolver solver(G, table, N);
      const int lo = N * t.level(n).e + 1, hi = n * t.level(n).e;
      double worst = INFINITY;
      int eligible = 0;
      G.for_each_element(n, [&](const Coords& y) {
        const int shell = G.dual_shell_of(n, y);
        if (shell < lo || shell > hi) return;
        ++eligible;
        worst = std::min(worst, static_cast<double>(lemma2_bound(t, n, N, shell, solver.I(y)).slack()));
      });
      CheckResult l = check("lemma2-bound", name);
      l.value = worst;
      l.tolerance = tol.lemma_slack;
      l.passed = worst >= -tol.lemma_slack;
      l.detail = std::to_string(eligible) + " classes, min slack " + fmt(worst);
      out.push_back(l);

      const double q = static_cast<double>(solver.q_exact());
      CheckResult e = check("q-exact", name);
      e.value = q;
      e.tolerance = 0.01;
      e.passed = q >= 0.01 && q <= 1 && static_cast<double>(solver.worst_imaginary()) <= tol.imaginary;
      e.detail = "Q=" + fmt(q);
      out.push_back(e);

      if (o.mc_samples == 0) continue;
      const QEstimate mc = q_mc(G, n, N, o.mc_samples, o.seed);
      CheckResult m = check("q-mc", name);
      m.value = mc.estimate;
      m.passed = mc.ci.contains(q) && mc.censored == 0;
      m.detail = "99% CI [" + fmt(mc.ci.lo) + ", " + fmt(mc.ci.hi) + "] over " + std::to_string(mc.trials) + " paths";
      out.push_back(m);
    }
  }
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

std::string first_failure(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return r.suite + " " + r.name + ": value " + fmt(r.value) + ", tolerance " + fmt(r.tolerance);
  return {};
}

void print_table(const std::vector<CheckResult>& results, std::ostream& os) {
  for (const auto& r : results) {
    os << (r.skipped ? "SKIP" : r.passed ? "PASS" : "FAIL") << "  " << std::left << std::setw(22) << r.suite
       << std::setw(10) << r.name << std::right;
    if (!r.skipped) os << "  value=" << fmt(r.value);
    os << "  " << r.detail << "\n";
  }
}

void write_checks_csv(const std::vector<CheckResult>& results, std::ostream& os) {
  os << "suite,name,status,value,tolerance,detail\n";
  os << std::setprecision(17);
  for (const auto& r : results)
    os << r.suite << "," << r.name << "," << (r.skipped ? "skip" : r.passed ? "pass" : "fail") << "," << r.value << ","
       << r.tolerance << ",\"" << r.detail << "\"\n";
}

}  // namespace tamelevy
