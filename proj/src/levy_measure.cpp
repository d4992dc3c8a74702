#include "tamelevy/levy_measure.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "tamelevy/error.hpp"
#include "tamelevy/stats.hpp"

namespace tamelevy {

namespace {

long double logaddexp(long double a, long double b) {
  if (a < b) std::swap(a, b);
  if (b == -INFINITY) return a;
  return a + std::log1p(std::exp(b - a));
}

long double log_expm1(long double x) { return std::log(std::expm1(x)); }

// ||xi||^alpha for a dual class of the given shell: p^{shell alpha / e_n}
long double norm_pow_alpha(const TowerSpec& t, int n, int shell) {
  return std::exp(static_cast<long double>(shell) * t.alpha() * std::log(static_cast<long double>(t.p())) /
                  t.level(n).e);
}

std::vector<double> cos_table(std::int64_t modulus) {
  std::vector<double> c(static_cast<std::size_t>(modulus));
  for (std::int64_t k = 0; k < modulus; ++k)
    c[static_cast<std::size_t>(k)] = std::cos(2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(modulus));
  return c;
}

std::vector<double> sin_table(std::int64_t modulus) {
  std::vector<double> s(static_cast<std::size_t>(modulus));
  for (std::int64_t k = 0; k < modulus; ++k)
    s[static_cast<std::size_t>(k)] = std::sin(2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(modulus));
  return s;
}

// u = B y mod P
Coords form_times(const std::vector<std::int64_t>& B, const Coords& y, std::int64_t P) {
  const std::size_t m = y.size();
  Coords u(m, 0);
  for (std::size_t k = 0; k < m; ++k) {
    if (y[k] == 0) continue;
    for (std::size_t l = 0; l < m; ++l) u[l] = (u[l] + static_cast<std::int64_t>(
                                                          static_cast<__int128>(B[k * m + l]) * y[k] % P)) % P;
  }
  return u;
}

std::int64_t dot_mod(const Coords& u, const Coords& x, std::int64_t P) {
  __int128 s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += static_cast<__int128>(u[i]) * x[i];
  return static_cast<std::int64_t>(s % P);
}

void require_enumerable(const TowerSpec& t, int n, std::uint64_t cap) {
  if (!t.level(n).algebraic || t.log_group_order(n) > std::log(static_cast<long double>(cap)) + 1e-9L)
    throw Error(ErrorCode::EnumerationCapExceeded,
                "M(" + std::to_string(n) + ") exceeds the cap " + std::to_string(cap));
}

}  // namespace

long double log_total_mass(const TowerSpec& t, int n) {
  const LevelInfo& L = t.level(n);
  const long double a = t.alpha() / L.m;
  const long double log_r = -(1 + a) * L.log_q;
  const long double ne = static_cast<long double>(n) * L.e;
  return std::log1p(-std::exp(-L.log_q)) + t.alpha() * n * std::log(static_cast<long double>(t.p())) +
         std::log(-std::expm1(ne * log_r)) - std::log(-std::expm1(log_r));
}

long double total_mass(const TowerSpec& t, int n) { return std::exp(log_total_mass(t, n)); }

long double total_mass_literal(const TowerSpec& t, int n) {
  const LevelInfo& L = t.level(n);
  const long double q = std::exp(L.log_q);
  const long double a = t.alpha() / L.m;
  const long double ne = static_cast<long double>(n) * L.e;
  return (1 - 1 / q) * std::pow(q, -ne) * (std::pow(q, (ne + 1) * (a + 1)) - std::pow(q, a + 1)) /
         (std::pow(q, a + 1) - 1);
}

long double asymptotic_ratio(const TowerSpec& t, int n) {
  return std::exp(log_total_mass(t, n) - t.alpha() * n * std::log(static_cast<long double>(t.p())));
}

long double ShellRow::mass() const { return std::exp(log_mass); }

LevyTable::LevyTable(const TowerSpec& t, int n) : n_(n) {
  const LevelInfo& L = t.level(n);
  const long double Lq = L.log_q;
  const long double a = t.alpha() / L.m;
  const long double d = L.d;
  const int ne = n * L.e;
  const long double log_A = d * a * Lq + log_expm1(a * Lq) - std::log1p(-std::exp(-(1 + a) * Lq));
  const long double log_c = std::log1p(-std::exp(-Lq)) - log_expm1(a * Lq) - d * (1 + a) * Lq;
  const long double log_qm1 = Lq + std::log1p(-std::exp(-Lq));
  mpz_class q;
  mpz_ui_pow_ui(q.get_mpz_t(), t.p(), static_cast<unsigned long>(L.f));
  for (int j0 = 0; j0 < ne; ++j0) {
    ShellRow row;
    row.j0 = j0;
    mpz_pow_ui(row.count.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(ne - 1 - j0));
    row.count *= q - 1;
    row.log_count = log_qm1 + (ne - 1 - j0) * Lq;
    row.log_mass = log_A + (d - ne) * Lq + logaddexp(-(d - j0) * (1 + a) * Lq, log_c);
    shells_.push_back(std::move(row));
  }
  log_total_ = log_total_mass(t, n);
  total_ = std::exp(log_total_);
}

long double LevyTable::mass(int j0) const { return std::exp(log_mass(j0)); }

long double LevyTable::log_mass(int j0) const {
  if (j0 < 0 || j0 >= static_cast<int>(shells_.size()))
    throw Error(ErrorCode::ZeroCoset, "no finite mass for shell " + std::to_string(j0));
  return shells_[static_cast<std::size_t>(j0)].log_mass;
}

long double LevyTable::shell_sum() const {
  long double top = -INFINITY;
  for (const auto& r : shells_) top = std::max(top, r.log_count + r.log_mass);
  NeumaierSum<long double> s;
  for (const auto& r : shells_) s.add(std::exp(r.log_count + r.log_mass - top));
  return s.value() * std::exp(top);
}

long double LevyTable::shell_probability(int j0) const {
  const ShellRow& r = shells_.at(static_cast<std::size_t>(j0));
  return std::exp(r.log_count + r.log_mass - log_total_);
}

LevyTable LevyTable::with_mass_scale(long double factor) const {
  LevyTable copy = *this;
  for (auto& r : copy.shells_) r.log_mass += std::log(factor);
  return copy;
}

long double coset_mass(const SupportGroup& group, const LevyTable& table, const CosetIndex& g) {
  if (g.level != table.level()) throw Error(ErrorCode::LevelMismatch, "coset and table at different levels");
  const int j0 = group.shell_of(g.level, group.to_coords(g));
  if (j0 == g.level * group.tower().level(g.level).e)
    throw Error(ErrorCode::ZeroCoset, "the identity coset carries infinite Levy mass");
  return table.mass(j0);
}

long double LevyKhinchinResult::error() const {
  return std::hypot(lhs_re - rhs, lhs_im) / std::max<long double>(1, std::fabs(rhs));
}

namespace {

struct GroupList {
  std::vector<Coords> elems;  // nonzero cosets
  std::vector<int> shell;
};

GroupList nonzero_cosets(const SupportGroup& G, int n) {
  GroupList out;
  const int ne = n * G.tower().level(n).e;
  G.for_each_element(n, [&](const Coords& x) {
    const int j0 = G.shell_of(n, x);
    if (j0 == ne) return;
    out.elems.push_back(x);
    out.shell.push_back(j0);
  });
  return out;
}

struct ShellTargets {
  std::vector<long double> value;   // left-hand side when a(B y) = a
  std::vector<long double> target;  // -||xi||^alpha on dual shell s
};

// Sum over the shell j0 of (chi - 1) is S_j0 - S_{j0+1} - count_j0 where
// S_j is the character sum over pi^j O / p^n O. With a the least j at which
// the character vanishes on pi^j O, S_j = q^{ne - j} [j >= a], so the whole
// left-hand side only depends on a.
ShellTargets shell_targets(const TowerSpec& t, const LevyTable& table) {
  const int n = table.level();
  const LevelInfo& L = t.level(n);
  const int ne = n * L.e;
  ShellTargets st;
  st.value.assign(static_cast<std::size_t>(ne) + 1, 0);
  st.target.assign(static_cast<std::size_t>(ne) + 1, 0);
  for (int a = 0; a <= ne; ++a) {
    NeumaierSum<long double> s;
    for (int j0 = 0; j0 < a; ++j0) {
      const ShellRow& r = table.shells()[static_cast<std::size_t>(j0)];
      s.add(-std::exp(r.log_count + r.log_mass));
    }
    if (a >= 1) s.add(-std::exp(table.log_mass(a - 1) + (ne - a) * L.log_q));
    st.value[static_cast<std::size_t>(a)] = s.value();
  }
  for (int j = 1; j <= ne; ++j) st.target[static_cast<std::size_t>(j)] = -norm_pow_alpha(t, n, j);
  return st;
}

// Least j with the character u^T (.) / p^n trivial on pi^j O / p^n O.
int annihilation_level(const LevelInfo& L, int n, const Coords& u, std::uint64_t p) {
  int a = 0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (u[c] == 0) continue;
    int v = 0;
    for (std::int64_t x = u[c]; x % static_cast<std::int64_t>(p) == 0; x /= static_cast<std::int64_t>(p)) ++v;
    a = std::max(a, (n - v - 1) * L.e + static_cast<int>(c) / L.f + 1);
  }
  return a;
}

}  // namespace

LevyKhinchinResult levy_khinchin_check(const SupportGroup& G, const LevyTable& table, const DualIndex& xi) {
  const int n = xi.level;
  const TowerSpec& t = G.tower();
  const std::int64_t P = static_cast<std::int64_t>(t.level(n).p_pow_n);
  const GroupList list = nonzero_cosets(G, n);
  const Coords u = form_times(G.pairing_form(n), G.dual_coords(xi), P);
  const auto ct = cos_table(P), st = sin_table(P);
  const int ne = n * t.level(n).e;
  std::vector<NeumaierSum<long double>> re(static_cast<std::size_t>(ne)), im(static_cast<std::size_t>(ne));
  for (std::size_t i = 0; i < list.elems.size(); ++i) {
    const std::int64_t k = dot_mod(u, list.elems[i], P);
    re[static_cast<std::size_t>(list.shell[i])].add(ct[static_cast<std::size_t>(k)] - 1.0);
    im[static_cast<std::size_t>(list.shell[i])].add(st[static_cast<std::size_t>(k)]);
  }
  LevyKhinchinResult r;
  NeumaierSum<long double> sre, sim;
  for (int j = 0; j < ne; ++j) {
    sre.add(table.mass(j) * re[static_cast<std::size_t>(j)].value());
    sim.add(table.mass(j) * im[static_cast<std::size_t>(j)].value());
  }
  r.lhs_re = sre.value();
  r.lhs_im = sim.value();
  r.rhs = xi.shell > 0 ? -norm_pow_alpha(t, n, xi.shell) : 0;
  return r;
}

LevyKhinchinSweep levy_khinchin_sweep_brute(const SupportGroup& G, const LevyTable& table) {
  const int n = table.level();
  const TowerSpec& t = G.tower();
  const std::int64_t P = static_cast<std::int64_t>(t.level(n).p_pow_n);
  const int ne = n * t.level(n).e;
  const GroupList list = nonzero_cosets(G, n);
  const auto ct = cos_table(P), st = sin_table(P);
  std::vector<long double> mass(static_cast<std::size_t>(ne));
  for (int j = 0; j < ne; ++j) mass[static_cast<std::size_t>(j)] = table.mass(j);
  LevyKhinchinSweep sweep;
  G.for_each_element(n, [&](const Coords& y) {
    const Coords u = form_times(G.pairing_form(n), y, P);
    std::vector<long double> re(static_cast<std::size_t>(ne), 0), im(static_cast<std::size_t>(ne), 0);
    for (std::size_t i = 0; i < list.elems.size(); ++i) {
      const std::int64_t k = dot_mod(u, list.elems[i], P);
      re[static_cast<std::size_t>(list.shell[i])] += ct[static_cast<std::size_t>(k)] - 1.0;
      im[static_cast<std::size_t>(list.shell[i])] += st[static_cast<std::size_t>(k)];
    }
    NeumaierSum<long double> sre, sim;
    for (int j = 0; j < ne; ++j) {
      sre.add(mass[static_cast<std::size_t>(j)] * re[static_cast<std::size_t>(j)]);
      sim.add(mass[static_cast<std::size_t>(j)] * im[static_cast<std::size_t>(j)]);
    }
    const int shell = G.dual_shell_of(n, y);
    LevyKhinchinResult r{sre.value(), sim.value(), shell > 0 ? -norm_pow_alpha(t, n, shell) : 0};
    if (shell == 0 && (r.lhs_re != 0 || r.lhs_im != 0)) sweep.trivial_exact = false;
    sweep.worst_error = std::max(sweep.worst_error, r.error());
    sweep.worst_imaginary = std::max(sweep.worst_imaginary, std::fabs(r.lhs_im));
    ++sweep.checked;
  });
  return sweep;
}

LevyKhinchinSweep levy_khinchin_sweep_shells(const SupportGroup& G, const LevyTable& table, std::uint64_t cap) {
  const int n = table.level();
  const TowerSpec& t = G.tower();
  require_enumerable(t, n, cap);
  const LevelInfo& L = t.level(n);
  const std::int64_t P = static_cast<std::int64_t>(L.p_pow_n);
  const std::int64_t p = static_cast<std::int64_t>(t.p());
  const int ne = n * L.e;
  const std::size_t m = static_cast<std::size_t>(L.m);

  // vp[k] = v_p(k) for 0 < k < P, n for k = 0
  std::vector<int> vp(static_cast<std::size_t>(P), 0);
  vp[0] = n;
  for (std::int64_t k = 1; k < P; ++k) {
    std::int64_t c = k;
    while (c % p == 0) {
      c /= p;
      ++vp[static_cast<std::size_t>(k)];
    }
  }

  const ShellTargets st = shell_targets(t, table);
  const auto& value = st.value;
  const auto& target = st.target;

  const auto& B = G.pairing_form(n);
  // prefix[i] = sum_{j <= i} row_j (mod P): the change of B y when the
  // odometer increments coordinate i and wraps all lower ones.
  std::vector<Coords> prefix(m, Coords(m, 0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t l = 0; l < m; ++l)
      prefix[i][l] = ((i ? prefix[i - 1][l] : 0) + B[i * m + l]) % P;

  LevyKhinchinSweep sweep;
  Coords y(m, 0), u(m, 0);
  for (;;) {
    int a = 0;
    int vy = ne;
    for (std::size_t c = 0; c < m; ++c) {
      const int idx = static_cast<int>(c) / L.f;
      const int r = n - vp[static_cast<std::size_t>(u[c])];
      if (r > 0) a = std::max(a, (r - 1) * L.e + idx + 1);
      if (y[c] != 0) vy = std::min(vy, vp[static_cast<std::size_t>(y[c])] * L.e + idx);
    }
    const int shell = ne - vy;
    const long double lhs = value[static_cast<std::size_t>(a)];
    const long double rhs = target[static_cast<std::size_t>(shell)];
    if (shell == 0 && lhs != 0) sweep.trivial_exact = false;
    sweep.worst_error = std::max(sweep.worst_error, std::fabs(lhs - rhs) / std::max<long double>(1, std::fabs(rhs)));
    ++sweep.checked;

    std::size_t i = 0;
    while (i < m && y[i] == P - 1) y[i++] = 0;
    if (i == m) break;
    ++y[i];
    for (std::size_t l = 0; l < m; ++l) {
      u[l] += prefix[i][l];
      if (u[l] >= P) u[l] -= P;
    }
  }
  return sweep;
}

LevyKhinchinSweep levy_khinchin_sweep_lattice(const SupportGroup& G, const LevyTable& table) {
  const int n = table.level();
  const TowerSpec& t = G.tower();
  const LevelInfo& L = t.level(n);
  const std::int64_t P = static_cast<std::int64_t>(L.p_pow_n);
  const int ne = n * L.e;
  const ShellTargets st = shell_targets(t, table);
  LevyKhinchinSweep sweep;
  sweep.trivial_exact = st.value[0] == 0;
  if (!G.pairing_perfect(n)) {
    sweep.worst_error = INFINITY;
    return sweep;
  }
  // Dual shell <= j means shell_of(y) >= ne - j: y lies in pi^{ne-j} O,
  // generated by p^{k_c} e_c with k_c = ceil((ne - j - b_c) / e).
  for (int j = 0; j <= ne; ++j) {
    for (int c = 0; c < L.m; ++c) {
      const int k = std::max(0, (ne - j - c / L.f + L.e - 1) / L.e);
      if (k >= n) continue;
      Coords y(static_cast<std::size_t>(L.m), 0);
      y[static_cast<std::size_t>(c)] = 1;
      for (int i = 0; i < k; ++i) y[static_cast<std::size_t>(c)] *= static_cast<std::int64_t>(t.p());
      if (annihilation_level(L, n, form_times(G.pairing_form(n), y, P), t.p()) > j) {
        sweep.worst_error = INFINITY;
        return sweep;
      }
    }
  }
  for (int s = 0; s <= ne; ++s) {
    const long double lhs = st.value[static_cast<std::size_t>(s)], rhs = st.target[static_cast<std::size_t>(s)];
    sweep.worst_error = std::max(sweep.worst_error, std::fabs(lhs - rhs) / std::max<long double>(1, std::fabs(rhs)));
  }
  const long double log_m = t.log_group_order(n);
  sweep.checked = log_m < 63 * std::log(2.0L) ? static_cast<std::uint64_t>(std::llround(std::exp(log_m))) : 0;
  return sweep;
}

long double CosetSumResult::rel_error() const { return std::fabs(coset_sum - closed_form) / closed_form; }

CosetSumResult coset_sum_check(const TowerSpec& t, int n, std::uint64_t cap, long double mass_scale) {
  const LevyTable table = LevyTable(t, n).with_mass_scale(mass_scale);
  CosetSumResult r;
  r.closed_form = table.total();
  const LevelInfo& L = t.level(n);
  const bool small = L.algebraic && t.log_group_order(n) <= std::log(static_cast<long double>(cap)) + 1e-9L;
  if (!small) {
    r.coset_sum = table.shell_sum();
    return r;
  }
  // Walk G_n, bucket every nonzero coset by its lowest nonzero digit, then
  // sum count * mass.
  const std::int64_t P = static_cast<std::int64_t>(L.p_pow_n);
  const std::int64_t p = static_cast<std::int64_t>(t.p());
  const int ne = n * L.e;
  std::vector<int> vp(static_cast<std::size_t>(P), n);
  for (std::int64_t k = 1; k < P; ++k) {
    int v = 0;
    for (std::int64_t c = k; c % p == 0; c /= p) ++v;
    vp[static_cast<std::size_t>(k)] = v;
  }
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(ne) + 1, 0);
  const std::size_t m = static_cast<std::size_t>(L.m);
  Coords x(m, 0);
  for (;;) {
    int j0 = ne;
    for (std::size_t c = 0; c < m; ++c)
      if (x[c] != 0) j0 = std::min(j0, vp[static_cast<std::size_t>(x[c])] * L.e + static_cast<int>(c) / L.f);
    ++counts[static_cast<std::size_t>(j0)];
    std::size_t i = 0;
    while (i < m && x[i] == P - 1) x[i++] = 0;
    if (i == m) break;
    ++x[i];
  }
  NeumaierSum<long double> s;
  for (int j0 = 0; j0 < ne; ++j0) {
    if (mpz_class(static_cast<unsigned long>(counts[static_cast<std::size_t>(j0)])) != table.shells()[j0].count)
      throw Error(ErrorCode::NumericalFailure, "shell count mismatch at j0 = " + std::to_string(j0));
    s.add(static_cast<long double>(counts[static_cast<std::size_t>(j0)]) * table.mass(j0));
  }
  r.coset_sum = s.value();
  r.enumerated = true;
  return r;
}

long double rho_alpha(long double s, long double t, long double alpha) {
  return s > 1 ? std::exp(-t * std::pow(s, alpha)) : 1.0L;
}

TransitionProbs transition_probs(const SupportGroup& G, int n, double t) {
  if (!(t > 0)) throw Error(ErrorCode::NonPositiveTime, "t must be positive");
  const TowerSpec& tower = G.tower();
  const std::int64_t P = static_cast<std::int64_t>(tower.level(n).p_pow_n);
  std::vector<Coords> elems;
  std::vector<long double> weight;
  G.for_each_element(n, [&](const Coords& y) {
    elems.push_back(y);
    const int shell = G.dual_shell_of(n, y);
    weight.push_back(shell > 0 ? std::exp(-static_cast<long double>(t) * norm_pow_alpha(tower, n, shell)) : 1.0L);
  });
  const auto ct = cos_table(P);
  const long double M = static_cast<long double>(elems.size());
  TransitionProbs out;
  out.level = n;
  out.t = t;
  out.p.resize(elems.size());
  NeumaierSum<long double> total;
  long double min_raw = INFINITY;
  for (std::size_t gi = 0; gi < elems.size(); ++gi) {
    const Coords w = form_times(G.pairing_form(n), elems[gi], P);
    NeumaierSum<long double> s;
    for (std::size_t yi = 0; yi < elems.size(); ++yi)
      s.add(weight[yi] * ct[static_cast<std::size_t>(dot_mod(w, elems[yi], P))]);
    out.p[gi] = s.value() / M;
    total.add(out.p[gi]);
    min_raw = std::min(min_raw, out.p[gi]);
  }
  out.raw_sum = total.value();
  out.min_raw = min_raw;
  const long double clamp = tower.tolerances().clamp;
  NeumaierSum<long double> renorm;
  for (auto& v : out.p) {
    if (v < -clamp)
      throw Error(ErrorCode::NumericalFailure, "transition probability below -clamp at t = " + std::to_string(t));
    if (v < 0) v = 0;
    renorm.add(v);
  }
  for (auto& v : out.p) v /= renorm.value();
  return out;
}

std::vector<long double> convolve(const SupportGroup& G, int n, const std::vector<long double>& a,
                                  const std::vector<long double>& b) {
  const std::size_t M = a.size();
  const std::int64_t P = static_cast<std::int64_t>(G.tower().level(n).p_pow_n);
  std::vector<Coords> elems(M);
  for (std::size_t i = 0; i < M; ++i) elems[i] = G.element_at(n, i);
  std::vector<long double> out(M, 0);
  for (std::size_t gi = 0; gi < M; ++gi) {
    NeumaierSum<long double> s;
    Coords diff(elems[gi].size());
    for (std::size_t hi = 0; hi < M; ++hi) {
      for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = ((elems[gi][c] - elems[hi][c]) % P + P) % P;
      s.add(a[hi] * b[G.index_of(n, diff)]);
    }
    out[gi] = s.value();
  }
  return out;
}

OccupationSolver::OccupationSolver(const SupportGroup& G, const LevyTable& table, int N)
    : group_(&G), n_(table.level()), N_(N) {
  if (N < 1 || N >= n_)
    throw Error(ErrorCode::InvalidLevels, "need 1 <= N < n, got n = " + std::to_string(n_) + ", N = " + std::to_string(N));
  const TowerSpec& t = G.tower();
  lambda_N_ = total_mass(t, N);
  total_n_ = table.total();
  const int ne = n_ * t.level(n_).e;
  G.for_each_element(n_, [&](const Coords& x) {
    const int j0 = G.shell_of(n_, x);
    if (j0 == ne || G.delta_level_coords(n_, x) < N) return;
    inside_.push_back(x);
    inside_mass_.push_back(table.mass(j0));
  });
}

long double OccupationSolver::I(const Coords& y, long double* imaginary) const {
  const std::int64_t P = static_cast<std::int64_t>(group_->tower().level(n_).p_pow_n);
  const Coords u = form_times(group_->pairing_form(n_), y, P);
  NeumaierSum<long double> re, im;
  for (std::size_t i = 0; i < inside_.size(); ++i) {
    const long double theta = 2 * std::numbers::pi_v<long double> * static_cast<long double>(dot_mod(u, inside_[i], P)) /
                              static_cast<long double>(P);
    re.add(inside_mass_[i] * (1 - std::cos(theta)));
    im.add(-inside_mass_[i] * std::sin(theta));
  }
  worst_imaginary_ = std::max(worst_imaginary_, std::fabs(im.value()));
  if (imaginary) *imaginary = im.value();
  return re.value();
}

long double OccupationSolver::lambda(const Coords& y) const { return 1 / (lambda_N_ + I(y)); }

long double OccupationSolver::expected_tau() const {
  NeumaierSum<long double> s;
  std::uint64_t count = 0;
  group_->for_each_element(n_, [&](const Coords& y) {
    s.add(lambda(y));
    ++count;
  });
  return s.value() / static_cast<long double>(count);
}

long double OccupationSolver::q_exact() const { return 1 / (expected_tau() * total_n_); }

long double I_N(const SupportGroup& G, const LevyTable& table, const DualIndex& xi, int N) {
  return OccupationSolver(G, table, N).I(G.dual_coords(xi));
}

long double lambda_n(const SupportGroup& G, const LevyTable& table, const DualIndex& xi, int N) {
  return OccupationSolver(G, table, N).lambda(G.dual_coords(xi));
}

long double expected_tau(const SupportGroup& G, int n, int N) {
  return OccupationSolver(G, LevyTable(G.tower(), n), N).expected_tau();
}

long double q_exact(const SupportGroup& G, int n, int N) {
  return OccupationSolver(G, LevyTable(G.tower(), n), N).q_exact();
}

Lemma2Result lemma2_bound(const TowerSpec& t, int n, int N, int shell, long double i_value) {
  const LevelInfo& Ln = t.level(n);
  if (N < 1 || N >= n) throw Error(ErrorCode::InvalidLevels, "need 1 <= N < n");
  if (shell < N * Ln.e + 1 || shell > n * Ln.e)
    throw Error(ErrorCode::ShellOutOfRange, "shell " + std::to_string(shell) + " outside [" +
                                                std::to_string(N * Ln.e + 1) + ", " + std::to_string(n * Ln.e) + "]");
  const LevelInfo& LN = t.level(N);
  Lemma2Result r;
  r.lhs = i_value;
  r.bound = -std::expm1(-static_cast<long double>(N) * LN.e * LN.log_q) * norm_pow_alpha(t, n, shell) - total_mass(t, N);
  r.holds = r.slack() >= -static_cast<long double>(t.tolerances().lemma_slack);
  return r;
}

Lemma2Result lemma2_bound_check(const SupportGroup& G, const LevyTable& table, const DualIndex& xi, int N) {
  const TowerSpec& t = G.tower();
  const int n = xi.level;
  if (xi.shell < N * t.level(n).e + 1 || xi.shell > n * t.level(n).e)
    return lemma2_bound(t, n, N, xi.shell, 0);  // throws ShellOutOfRange
  return lemma2_bound(t, n, N, xi.shell, I_N(G, table, xi, N));
}

int BnSequence::block_of(int n) const {
  int j = 0;
  for (std::size_t i = 0; i < blocks.size() && blocks[i] <= n; ++i) j = static_cast<int>(i) + 1;
  return j;
}

void BnSequence::require_B() const {
  if (alpha_too_small) throw Error(ErrorCode::AlphaTooSmall, "B_n needs alpha > log_{q_1} 2");
}

BnSequence bn_sequence(const TowerSpec& t, int n_max) {
  if (n_max < 1 || n_max > t.depth())
    throw Error(ErrorCode::InvalidLevels, "n_max must lie in [1, " + std::to_string(t.depth()) + "]");
  BnSequence s;
  for (int n = 1; n <= n_max; ++n) s.total.push_back(total_mass(t, n));
  s.blocks.push_back(1);
  for (int n = 2; n <= n_max; ++n)
    if (s.total[static_cast<std::size_t>(n - 1)] / s.total[static_cast<std::size_t>(s.blocks.back() - 1)] >= 2)
      s.blocks.push_back(n);
  for (int n = 1; n <= n_max; ++n) {
    const int j = s.block_of(n);
    s.b.push_back(std::log(static_cast<long double>(j)) / s.total[static_cast<std::size_t>(s.blocks[j - 1] - 1)]);
  }
  const long double log_p = std::log(static_cast<long double>(t.p()));
  s.alpha_too_small = !(t.alpha() * log_p > std::log(2.0L));
  if (!s.alpha_too_small)
    for (int n = 1; n <= n_max; ++n) s.B.push_back(std::exp(-t.alpha() * n * log_p) * std::log(static_cast<long double>(n)));
  return s;
}

void write_shell_csv(const TowerSpec& t, int n_max, std::ostream& os) {
  os << "n,j0,count,log10_count,mass,log10_mass\n";
  os << std::setprecision(17);
  for (int n = 1; n <= n_max; ++n) {
    const LevyTable table(t, n);
    for (const auto& r : table.shells()) {
      os << n << "," << r.j0 << ",";
      if (mpz_sizeinbase(r.count.get_mpz_t(), 2) <= 64) os << r.count.get_str();
      os << "," << static_cast<double>(r.log_count / std::log(10.0L)) << ",";
      const long double mass = r.mass();
      if (std::isfinite(static_cast<double>(mass)) && mass > 0) os << static_cast<double>(mass);
      os << "," << static_cast<double>(r.log_mass / std::log(10.0L)) << "\n";
    }
  }
}

void write_sequence_csv(const TowerSpec& t, int n_max, std::ostream& os) {
  const BnSequence s = bn_sequence(t, n_max);
  os << "n,block,total_mass,ratio,b_n,B_n\n";
  os << std::setprecision(17);
  for (int n = 1; n <= n_max; ++n) {
    os << n << "," << s.block_of(n) << "," << static_cast<double>(s.total[static_cast<std::size_t>(n - 1)]) << ","
       << static_cast<double>(asymptotic_ratio(t, n)) << "," << static_cast<double>(s.b[static_cast<std::size_t>(n - 1)])
       << ",";
    if (!s.B.empty()) os << static_cast<double>(s.B[static_cast<std::size_t>(n - 1)]);
    os << "\n";
  }
}

}  // namespace tamelevy
