#include "tamelevy/support_group.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "tamelevy/error.hpp"

namespace tamelevy {

namespace {

std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t m) {
  return static_cast<std::int64_t>((static_cast<__int128>(a) * b) % m);
}

std::int64_t reduce_rational(const mpq_class& c, std::int64_t modulus) {
  mpz_class mod(static_cast<long>(modulus));
  mpz_class inv;
  if (mpz_invert(inv.get_mpz_t(), c.get_den_mpz_t(), mod.get_mpz_t()) == 0)
    throw Error(ErrorCode::OutOfBall, "coefficient is not p-integral");
  mpz_class r = c.get_num() * inv;
  mpz_mod(r.get_mpz_t(), r.get_mpz_t(), mod.get_mpz_t());
  return r.get_si();
}

bool p_integral(const FieldElement& x, std::uint64_t p) {
  for (const auto& c : x.coeffs())
    if (sgn(c) != 0 && padic_valuation(c, p) < 0) return false;
  return true;
}

int rank_mod_p(std::vector<std::vector<std::int64_t>> a, std::int64_t p) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && a[piv][c] % p == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[rank]);
    mpz_class inv;
    mpz_invert(inv.get_mpz_t(), mpz_class(static_cast<long>(a[rank][c] % p)).get_mpz_t(),
               mpz_class(static_cast<long>(p)).get_mpz_t());
    const std::int64_t iv = inv.get_si();
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank) continue;
      const std::int64_t factor = mulmod(a[r][c] % p, iv, p);
      if (factor == 0) continue;
      for (std::size_t k = 0; k < cols; ++k) {
        a[r][k] = (a[r][k] - mulmod(factor, a[rank][k] % p, p)) % p;
        if (a[r][k] < 0) a[r][k] += p;
      }
    }
    ++rank;
  }
  return static_cast<int>(rank);
}

}  // namespace

std::string digits_to_string(const std::vector<std::uint64_t>& digits) {
  std::ostringstream os;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i) os << ':';
    os << digits[i];
  }
  return os.str();
}

SupportGroup::SupportGroup(const TowerSpec& tower, int max_level) : tower_(&tower) {
  max_level_ = max_level > 0 ? std::min(max_level, tower.algebra_levels())
                             : std::min(tower.algebra_levels(), 4);
  tables_.resize(static_cast<std::size_t>(max_level_) + 1);
  for (int n = 1; n <= max_level_; ++n) {
    const LevelInfo& L = tower.level(n);
    LevelTables& T = tables_[n];
    T.modulus = static_cast<std::int64_t>(L.p_pow_n);

    // Trace functional t_i = Tr(pi^{-d} b_i), then B_kl = sum_i (b_k b_l)_i t_i.
    std::vector<mpq_class> t(static_cast<std::size_t>(L.m));
    for (int i = 0; i < L.m; ++i) {
      const FieldElement x = FieldElement::monomial(tower, n, static_cast<long>(i / L.f) - L.d, i % L.f);
      t[static_cast<std::size_t>(i)] = trace_rel(tower, x, 1)[0];
    }
    T.form.assign(static_cast<std::size_t>(L.m * L.m), 0);
    for (int k = 0; k < L.m; ++k) {
      const FieldElement bk = FieldElement::monomial(tower, n, k / L.f, k % L.f);
      for (int l = k; l < L.m; ++l) {
        const FieldElement bl = FieldElement::monomial(tower, n, l / L.f, l % L.f);
        const FieldElement prod = mul(tower, bk, bl);
        mpq_class s = 0;
        for (int i = 0; i < L.m; ++i) s += prod[static_cast<std::size_t>(i)] * t[static_cast<std::size_t>(i)];
        const std::int64_t v = reduce_rational(s, T.modulus);
        T.form[static_cast<std::size_t>(k * L.m + l)] = v;
        T.form[static_cast<std::size_t>(l * L.m + k)] = v;
      }
    }

    T.proj.resize(static_cast<std::size_t>(n));
    for (int N = 1; N < n; ++N) {
      const LevelInfo& LN = tower.level(N);
      const std::int64_t modN = static_cast<std::int64_t>(LN.p_pow_n);
      std::vector<std::int64_t> P(static_cast<std::size_t>(LN.m * L.m), 0);
      const FieldElement lift_d = FieldElement::monomial(tower, N, LN.d, 0);
      for (int k = 0; k < L.m; ++k) {
        const FieldElement x = FieldElement::monomial(tower, n, static_cast<long>(k / L.f) - L.d, k % L.f);
        const FieldElement z = mul(tower, lift_d, trace_rel(tower, x, N));
        for (int i = 0; i < LN.m; ++i)
          P[static_cast<std::size_t>(i * L.m + k)] = reduce_rational(z[static_cast<std::size_t>(i)], modN);
      }
      T.proj[static_cast<std::size_t>(N)] = std::move(P);
    }
  }
}

const SupportGroup::LevelTables& SupportGroup::tables(int n) const {
  if (n < 1 || n > max_level_)
    throw Error(ErrorCode::EnumerationCapExceeded,
                "group tables are built up to level " + std::to_string(max_level_) + ", requested " +
                    std::to_string(n));
  return tables_[static_cast<std::size_t>(n)];
}

mpq_class SupportGroup::haar_cylinder(int n, std::uint64_t count) const {
  mpz_class M;
  mpz_ui_pow_ui(M.get_mpz_t(), tower_->p(), static_cast<unsigned long>(n * tower_->level(n).m));
  mpq_class r(mpz_class(static_cast<unsigned long>(count)), M);
  r.canonicalize();
  return r;
}

Coords SupportGroup::to_coords(const CosetIndex& g) const {
  const LevelInfo& L = tower_->level(g.level);
  const std::int64_t p = static_cast<std::int64_t>(tower_->p());
  if (static_cast<int>(g.digits.size()) != g.level * L.e)
    throw Error(ErrorCode::LevelMismatch, "digit vector length does not match level");
  Coords x(static_cast<std::size_t>(L.m), 0);
  std::int64_t pt = 1;
  for (int t = 0; t < g.level; ++t, pt *= p) {
    for (int b = 0; b < L.e; ++b) {
      std::uint64_t a = g.digits[static_cast<std::size_t>(b + t * L.e)];
      for (int w = 0; w < L.f; ++w) {
        x[static_cast<std::size_t>(b * L.f + w)] += static_cast<std::int64_t>(a % tower_->p()) * pt;
        a /= tower_->p();
      }
    }
  }
  return x;
}

CosetIndex SupportGroup::from_coords(int n, const Coords& x) const {
  const LevelInfo& L = tower_->level(n);
  const std::uint64_t p = tower_->p();
  CosetIndex g{n, std::vector<std::uint64_t>(static_cast<std::size_t>(n * L.e), 0)};
  for (int b = 0; b < L.e; ++b) {
    for (int w = L.f - 1; w >= 0; --w) {
      std::uint64_t c = static_cast<std::uint64_t>(x[static_cast<std::size_t>(b * L.f + w)]);
      for (int t = 0; t < n; ++t) {
        auto& a = g.digits[static_cast<std::size_t>(b + t * L.e)];
        a = a * p + c % p;
        c /= p;
      }
    }
  }
  return g;
}

Coords SupportGroup::dual_coords(const DualIndex& xi) const {
  const LevelInfo& L = tower_->level(xi.level);
  const int ne = xi.level * L.e;
  if (xi.shell < 0 || xi.shell > ne || static_cast<int>(xi.digits.size()) != xi.shell)
    throw Error(ErrorCode::LevelMismatch, "dual index shell/digits inconsistent with level");
  CosetIndex g{xi.level, std::vector<std::uint64_t>(static_cast<std::size_t>(ne), 0)};
  for (int i = 0; i < xi.shell; ++i) g.digits[static_cast<std::size_t>(ne - xi.shell + i)] = xi.digits[i];
  return to_coords(g);
}

DualIndex SupportGroup::dual_from_coords(int n, const Coords& y) const {
  const int ne = n * tower_->level(n).e;
  const CosetIndex g = from_coords(n, y);
  const int j = ne - shell_of(n, y);
  DualIndex xi{n, j, std::vector<std::uint64_t>(static_cast<std::size_t>(j), 0)};
  for (int i = 0; i < j; ++i) xi.digits[static_cast<std::size_t>(i)] = g.digits[static_cast<std::size_t>(ne - j + i)];
  return xi;
}

CosetIndex SupportGroup::zero(int n) const {
  return CosetIndex{n, std::vector<std::uint64_t>(static_cast<std::size_t>(n * tower_->level(n).e), 0)};
}

CosetIndex SupportGroup::add(const CosetIndex& g, const CosetIndex& h) const {
  if (g.level != h.level) throw Error(ErrorCode::LevelMismatch, "cosets at different levels");
  const std::int64_t mod = static_cast<std::int64_t>(tower_->level(g.level).p_pow_n);
  Coords x = to_coords(g);
  const Coords y = to_coords(h);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (x[i] + y[i]) % mod;
  return from_coords(g.level, x);
}

CosetIndex SupportGroup::negate(const CosetIndex& g) const {
  const std::int64_t mod = static_cast<std::int64_t>(tower_->level(g.level).p_pow_n);
  Coords x = to_coords(g);
  for (auto& c : x) c = (mod - c) % mod;
  return from_coords(g.level, x);
}

FieldElement SupportGroup::scaled_basis(int n, int k) const {
  const LevelInfo& L = tower_->level(n);
  const FieldElement b = FieldElement::monomial(*tower_, n, static_cast<long>(k / L.f) - L.d, k % L.f);
  return scale(b, mpq_class(L.m));
}

FieldElement SupportGroup::coset_rep(const CosetIndex& g) const {
  const int n = g.level;
  const LevelInfo& L = tower_->level(n);
  const Coords x = to_coords(g);
  std::vector<mpq_class> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = static_cast<long>(x[i]);
  const FieldElement scale_elt = scale(FieldElement::monomial(*tower_, n, -L.d, 0), mpq_class(L.m));
  return mul(*tower_, scale_elt, FieldElement(n, std::move(c)));
}

Coords SupportGroup::reduce_coords(const FieldElement& x, std::int64_t modulus) const {
  Coords out(x.coeffs().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = reduce_rational(x[i], modulus);
  return out;
}

CosetIndex SupportGroup::coset_of(const FieldElement& z) const {
  const int n = z.level();
  const LevelInfo& L = tower_->level(n);
  mpq_class inv_m(1, L.m);
  inv_m.canonicalize();
  const FieldElement x = scale(mul(*tower_, z, FieldElement::monomial(*tower_, n, L.d, 0)), inv_m);
  if (!p_integral(x, tower_->p()))
    throw Error(ErrorCode::OutOfBall, "element lies outside the S^(n) ball at level " + std::to_string(n));
  return from_coords(n, reduce_coords(x, static_cast<std::int64_t>(L.p_pow_n)));
}

FieldElement SupportGroup::dual_rep(const DualIndex& xi) const {
  const int n = xi.level;
  const Coords y = dual_coords(xi);
  std::vector<mpq_class> c(y.size());
  mpz_class pn;
  mpz_ui_pow_ui(pn.get_mpz_t(), tower_->p(), static_cast<unsigned long>(n));
  for (std::size_t i = 0; i < y.size(); ++i) {
    c[i] = mpq_class(mpz_class(static_cast<long>(y[i])), pn);
    c[i].canonicalize();
  }
  return FieldElement(n, std::move(c));
}

DualIndex SupportGroup::dual_class_of(const FieldElement& xi) const {
  const int n = xi.level();
  const LevelInfo& L = tower_->level(n);
  mpz_class pn;
  mpz_ui_pow_ui(pn.get_mpz_t(), tower_->p(), static_cast<unsigned long>(n));
  const FieldElement y = scale(xi, mpq_class(pn));
  if (!p_integral(y, tower_->p()))
    throw Error(ErrorCode::OutOfBall, "dual element is not in the annihilator of S_" + std::to_string(n));
  return dual_from_coords(n, reduce_coords(y, static_cast<std::int64_t>(L.p_pow_n)));
}

int SupportGroup::shell_of(int n, const Coords& x) const {
  const LevelInfo& L = tower_->level(n);
  const std::int64_t p = static_cast<std::int64_t>(tower_->p());
  int best = n * L.e;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::int64_t c = x[i];
    if (c == 0) continue;
    int v = 0;
    while (c % p == 0) {
      c /= p;
      ++v;
    }
    best = std::min(best, v * L.e + static_cast<int>(i) / L.f);
  }
  return best;
}

int SupportGroup::dual_shell_of(int n, const Coords& y) const {
  return n * tower_->level(n).e - shell_of(n, y);
}

CosetIndex SupportGroup::project_exact(const CosetIndex& g, int n) const {
  if (n > g.level || n < 1)
    throw Error(ErrorCode::LevelMismatch, "cannot project level " + std::to_string(g.level) + " to level " +
                                              std::to_string(n));
  if (n == g.level) return g;
  return coset_of(t_map(*tower_, coset_rep(g), n));
}

Coords SupportGroup::project_coords(int from, int to, const Coords& x) const {
  if (to > from || to < 1)
    throw Error(ErrorCode::LevelMismatch, "cannot project level " + std::to_string(from) + " to level " +
                                              std::to_string(to));
  if (to == from) return x;
  const LevelTables& T = tables(from);
  const LevelInfo& L = tower_->level(from);
  const int mt = tower_->level(to).m;
  const std::int64_t mod = static_cast<std::int64_t>(tower_->level(to).p_pow_n);
  const auto& P = T.proj[static_cast<std::size_t>(to)];
  Coords out(static_cast<std::size_t>(mt), 0);
  for (int i = 0; i < mt; ++i) {
    std::int64_t s = 0;
    for (int k = 0; k < L.m; ++k) s = (s + mulmod(P[static_cast<std::size_t>(i * L.m + k)], x[k], mod)) % mod;
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

CosetIndex SupportGroup::project(const CosetIndex& g, int n) const {
  return from_coords(n, project_coords(g.level, n, to_coords(g)));
}

int SupportGroup::delta_level_exact(const CosetIndex& g) const {
  const int n = g.level;
  const FieldElement rep = coset_rep(g);
  int best = 0;
  for (int N = 1; N <= n; ++N) {
    const LevelInfo& LN = tower_->level(N);
    const FieldElement t = t_map(*tower_, rep, N);
    const auto v = valuation(*tower_, t);
    const long threshold = static_cast<long>(N) * LN.e - LN.d +
                           static_cast<long>(LN.e) * padic_valuation(mpq_class(LN.m), tower_->p());
    if (!v || *v >= threshold) best = N;
  }
  return best;
}

int SupportGroup::delta_level_coords(int n, const Coords& x) const {
  for (int N = 1; N < n; ++N) {
    const Coords y = project_coords(n, N, x);
    for (auto c : y)
      if (c != 0) return N - 1;
  }
  for (auto c : x)
    if (c != 0) return n - 1;
  return n;
}

int SupportGroup::delta_level(const CosetIndex& g) const { return delta_level_coords(g.level, to_coords(g)); }

UltrametricValue SupportGroup::ultrametric(const CosetIndex& g) const {
  const int N = delta_level(g);
  if (N == g.level) return {0, false};
  if (N == 0) return {1, true};
  return {std::exp(-tower_->log_group_order(N)), true};
}

const std::vector<std::int64_t>& SupportGroup::pairing_form(int n) const { return tables(n).form; }

std::int64_t SupportGroup::pairing_numerator(int n, const Coords& x, const Coords& y) const {
  const LevelTables& T = tables(n);
  const std::size_t m = x.size();
  const std::int64_t mod = T.modulus;
  std::int64_t s = 0;
  for (std::size_t k = 0; k < m; ++k) {
    if (y[k] == 0) continue;
    std::int64_t row = 0;
    for (std::size_t l = 0; l < m; ++l) row = (row + mulmod(T.form[k * m + l], x[l], mod)) % mod;
    s = (s + mulmod(y[k], row, mod)) % mod;
  }
  return s;
}

CharacterValue SupportGroup::pairing(const CosetIndex& g, const DualIndex& xi) const {
  if (g.level != xi.level) throw Error(ErrorCode::LevelMismatch, "coset and dual class at different levels");
  const std::int64_t num = pairing_numerator(g.level, to_coords(g), dual_coords(xi));
  return CharacterValue(mpq_class(static_cast<long>(num), static_cast<unsigned long>(tables(g.level).modulus)));
}

CharacterValue SupportGroup::pairing_exact(const CosetIndex& g, const DualIndex& xi) const {
  if (g.level != xi.level) throw Error(ErrorCode::LevelMismatch, "coset and dual class at different levels");
  const FieldElement prod = mul(*tower_, dual_rep(xi), coset_rep(g));
  return char_chi(*tower_, t_map(*tower_, prod, 1));
}

void SupportGroup::for_each_element(int n, const std::function<void(const Coords&)>& visit) const {
  if (!tower_->enumerable(n))
    throw Error(ErrorCode::EnumerationCapExceeded,
                "G_" + std::to_string(n) + " exceeds the enumeration cap of " + std::to_string(tower_->enum_cap()));
  const LevelInfo& L = tower_->level(n);
  const std::int64_t mod = static_cast<std::int64_t>(L.p_pow_n);
  Coords x(static_cast<std::size_t>(L.m), 0);
  for (;;) {
    visit(x);
    std::size_t i = 0;
    while (i < x.size() && ++x[i] == mod) x[i++] = 0;
    if (i == x.size()) break;
  }
}

std::uint64_t SupportGroup::index_of(int n, const Coords& x) const {
  const std::uint64_t mod = tower_->level(n).p_pow_n;
  std::uint64_t idx = 0;
  for (std::size_t i = x.size(); i-- > 0;) idx = idx * mod + static_cast<std::uint64_t>(x[i]);
  return idx;
}

Coords SupportGroup::element_at(int n, std::uint64_t index) const {
  const LevelInfo& L = tower_->level(n);
  Coords x(static_cast<std::size_t>(L.m));
  for (auto& c : x) {
    c = static_cast<std::int64_t>(index % L.p_pow_n);
    index /= L.p_pow_n;
  }
  return x;
}

std::vector<CosetIndex> SupportGroup::coset_enumerate(int n) const {
  std::vector<CosetIndex> out;
  for_each_element(n, [&](const Coords& x) { out.push_back(from_coords(n, x)); });
  return out;
}

std::vector<DualIndex> SupportGroup::dual_enumerate(int n) const {
  std::vector<DualIndex> out;
  for_each_element(n, [&](const Coords& y) { out.push_back(dual_from_coords(n, y)); });
  return out;
}

bool SupportGroup::lemma1_surjectivity_check(int nu, int n, int N) const {
  if (!(nu > n && n >= 1 && N >= 0))
    throw Error(ErrorCode::InvalidLevels, "need nu > n >= 1 and N >= 0");
  tower_->require_algebraic(nu);
  const LevelInfo& Ln = tower_->level(n);
  const LevelInfo& Lv = tower_->level(nu);
  mpz_class pN;
  mpz_ui_pow_ui(pN.get_mpz_t(), tower_->p(), static_cast<unsigned long>(N));
  // z / (m_n pi_n^{-d_n} p^N) for z in K_n
  mpq_class unscale(mpz_class(1), pN * Ln.m);
  unscale.canonicalize();
  const FieldElement lift_d = FieldElement::monomial(*tower_, n, Ln.d, 0);

  std::vector<std::vector<std::int64_t>> matrix(static_cast<std::size_t>(Ln.m),
                                                std::vector<std::int64_t>(static_cast<std::size_t>(Lv.m)));
  const std::int64_t p = static_cast<std::int64_t>(tower_->p());
  for (int k = 0; k < Lv.m; ++k) {
    const FieldElement y = scale(scaled_basis(nu, k), mpq_class(pN));
    const FieldElement w = scale(mul(*tower_, t_map(*tower_, y, n), lift_d), unscale);
    if (!p_integral(w, tower_->p())) return false;
    for (int i = 0; i < Ln.m; ++i) matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
        reduce_rational(w[static_cast<std::size_t>(i)], p);
  }
  return rank_mod_p(std::move(matrix), p) == Ln.m;
}

bool SupportGroup::pairing_perfect(int n) const {
  const auto& B = pairing_form(n);
  const auto m = static_cast<std::size_t>(tower_->level(n).m);
  const auto p = static_cast<std::int64_t>(tower_->p());
  std::vector<std::vector<std::int64_t>> a(m, std::vector<std::int64_t>(m));
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < m; ++l) a[k][l] = B[k * m + l] % p;
  return rank_mod_p(std::move(a), p) == static_cast<int>(m);
}

void SupportGroup::write_tables_csv(int n, std::ostream& os) const {
  const auto cosets = coset_enumerate(n);
  const auto duals = dual_enumerate(n);
  os << "kind,row,col,digits,shell,angle_num,angle_den\n";
  for (std::size_t i = 0; i < cosets.size(); ++i)
    os << "coset," << i << ",," << digits_to_string(cosets[i].digits) << ","
       << shell_of(n, to_coords(cosets[i])) << ",,\n";
  for (std::size_t i = 0; i < duals.size(); ++i)
    os << "dual," << i << ",," << digits_to_string(duals[i].digits) << "," << duals[i].shell << ",,\n";
  if (cosets.size() > 256) return;
  for (std::size_t i = 0; i < cosets.size(); ++i)
    for (std::size_t j = 0; j < duals.size(); ++j) {
      const CharacterValue c = pairing(cosets[i], duals[j]);
      os << "character," << i << "," << j << ",,," << c.angle().get_num() << "," << c.angle().get_den() << "\n";
    }
}

}  // namespace tamelevy
