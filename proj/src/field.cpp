#include "tamelevy/field.hpp"

#include <cmath>
#include <numbers>

#include "tamelevy/detail/unramified.hpp"
#include "tamelevy/error.hpp"

namespace tamelevy {

namespace {

void require_same_level(const FieldElement& x, const FieldElement& y) {
  if (x.level() != y.level())
    throw Error(ErrorCode::LevelMismatch, "operands at levels " + std::to_string(x.level()) + " and " +
                                              std::to_string(y.level()));
}

mpq_class p_power(std::uint64_t p, long k) {
  mpz_class pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), p, static_cast<unsigned long>(k < 0 ? -k : k));
  if (k >= 0) return mpq_class(pk);
  mpq_class r(mpz_class(1), pk);
  r.canonicalize();
  return r;
}

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

long padic_valuation(const mpq_class& x, std::uint64_t p) {
  mpz_class tmp;
  mpz_class prime(static_cast<unsigned long>(p));
  const long vn = static_cast<long>(mpz_remove(tmp.get_mpz_t(), x.get_num_mpz_t(), prime.get_mpz_t()));
  const long vd = static_cast<long>(mpz_remove(tmp.get_mpz_t(), x.get_den_mpz_t(), prime.get_mpz_t()));
  return vn - vd;
}

FieldElement FieldElement::zero(const TowerSpec& tower, int n) {
  tower.require_algebraic(n);
  return FieldElement(n, std::vector<mpq_class>(static_cast<std::size_t>(tower.level(n).m), mpq_class(0)));
}

FieldElement FieldElement::from_rational(const TowerSpec& tower, int n, const mpq_class& value) {
  FieldElement x = zero(tower, n);
  x.coeffs_[0] = value;
  return x;
}

FieldElement FieldElement::monomial(const TowerSpec& tower, int n, long k, int w) {
  FieldElement x = zero(tower, n);
  const LevelInfo& L = tower.level(n);
  if (w < 0 || w >= L.f) throw Error(ErrorCode::LevelMismatch, "monomial index out of range");
  const long t = floor_div(k, L.e);
  const long b = k - t * L.e;
  x.coeffs_[static_cast<std::size_t>(b * L.f + w)] = p_power(tower.p(), t);
  return x;
}

FieldElement FieldElement::lift(const TowerSpec& tower, int n, std::uint64_t residue) {
  FieldElement x = zero(tower, n);
  const LevelInfo& L = tower.level(n);
  for (int w = 0; w < L.f; ++w) {
    x.coeffs_[static_cast<std::size_t>(w)] = static_cast<unsigned long>(residue % tower.p());
    residue /= tower.p();
  }
  return x;
}

bool FieldElement::is_zero() const {
  for (const auto& c : coeffs_)
    if (sgn(c) != 0) return false;
  return true;
}

FieldElement add(const FieldElement& x, const FieldElement& y) {
  require_same_level(x, y);
  std::vector<mpq_class> c(x.coeffs().size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = x[i] + y[i];
  return FieldElement(x.level(), std::move(c));
}

FieldElement sub(const FieldElement& x, const FieldElement& y) {
  require_same_level(x, y);
  std::vector<mpq_class> c(x.coeffs().size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = x[i] - y[i];
  return FieldElement(x.level(), std::move(c));
}

FieldElement negate(const FieldElement& x) {
  std::vector<mpq_class> c(x.coeffs().size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = -x[i];
  return FieldElement(x.level(), std::move(c));
}

FieldElement scale(const FieldElement& x, const mpq_class& s) {
  std::vector<mpq_class> c(x.coeffs().size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = x[i] * s;
  return FieldElement(x.level(), std::move(c));
}

FieldElement mul(const TowerSpec& tower, const FieldElement& x, const FieldElement& y) {
  require_same_level(x, y);
  const int n = x.level();
  const LevelInfo& L = tower.level(n);
  const int s = tower.steps_at(n);
  const int e = L.e, f = L.f;
  const mpq_class p(static_cast<unsigned long>(tower.p()));

  auto block_zero = [&](const FieldElement& z, int b) {
    for (int w = 0; w < f; ++w)
      if (sgn(z[static_cast<std::size_t>(b * f + w)]) != 0) return false;
    return true;
  };

  std::vector<mpq_class> out(static_cast<std::size_t>(e * f), mpq_class(0));
  std::vector<mpq_class> prod(static_cast<std::size_t>(f));
  for (int i = 0; i < e; ++i) {
    if (block_zero(x, i)) continue;
    for (int j = 0; j < e; ++j) {
      if (block_zero(y, j)) continue;
      detail::w_mul(tower.steps(), s, x.coeffs().data() + i * f, y.coeffs().data() + j * f, prod.data(),
                    detail::NoReduce{});
      const int k = i + j;
      for (int w = 0; w < f; ++w) {
        if (k < e) {
          out[static_cast<std::size_t>(k * f + w)] += prod[static_cast<std::size_t>(w)];
        } else {
          out[static_cast<std::size_t>((k - e) * f + w)] += p * prod[static_cast<std::size_t>(w)];
        }
      }
    }
  }
  return FieldElement(n, std::move(out));
}

std::optional<long> valuation(const TowerSpec& tower, const FieldElement& x) {
  const LevelInfo& L = tower.level(x.level());
  std::optional<long> v;
  for (std::size_t i = 0; i < x.coeffs().size(); ++i) {
    if (sgn(x[i]) == 0) continue;
    const long b = static_cast<long>(i) / L.f;
    const long vi = static_cast<long>(L.e) * padic_valuation(x[i], tower.p()) + b;
    if (!v || vi < *v) v = vi;
  }
  return v;
}

long double abs_level(const TowerSpec& tower, const FieldElement& x) {
  const auto v = valuation(tower, x);
  if (!v) return 0;
  return std::exp(-static_cast<long double>(*v) * tower.level(x.level()).log_q);
}

long double abs_norm(const TowerSpec& tower, const FieldElement& x) {
  const auto v = valuation(tower, x);
  if (!v) return 0;
  const long double e = tower.level(x.level()).e;
  return std::pow(static_cast<long double>(tower.p()), -static_cast<long double>(*v) / e);
}

std::optional<mpq_class> log_p_norm(const TowerSpec& tower, const FieldElement& x) {
  const auto v = valuation(tower, x);
  if (!v) return std::nullopt;
  mpq_class r(-*v, tower.level(x.level()).e);
  r.canonicalize();
  return r;
}

FieldElement embed(const TowerSpec& tower, const FieldElement& x, int target) {
  const int n = x.level();
  if (target < n)
    throw Error(ErrorCode::LevelMismatch, "cannot embed level " + std::to_string(n) + " into level " +
                                              std::to_string(target));
  if (target == n) return x;
  const LevelInfo& Ln = tower.level(n);
  const LevelInfo& Lv = tower.level(target);
  const int re = Lv.e / Ln.e;
  FieldElement y = FieldElement::zero(tower, target);
  std::vector<mpq_class> c = y.coeffs();
  for (int b = 0; b < Ln.e; ++b)
    for (int w = 0; w < Ln.f; ++w)
      c[static_cast<std::size_t>(b * re * Lv.f + w)] = x[static_cast<std::size_t>(b * Ln.f + w)];
  return FieldElement(target, std::move(c));
}

FieldElement trace_rel(const TowerSpec& tower, const FieldElement& x, int target) {
  const int nu = x.level();
  if (target > nu || target < 1)
    throw Error(ErrorCode::LevelMismatch, "trace from level " + std::to_string(nu) + " to level " +
                                              std::to_string(target));
  tower.require_algebraic(target);
  if (target == nu) return x;
  const LevelInfo& Ln = tower.level(target);
  const LevelInfo& Lv = tower.level(nu);
  const int re = Lv.e / Ln.e;
  const int rf = Lv.f / Ln.f;
  std::vector<mpq_class> out(static_cast<std::size_t>(Ln.m), mpq_class(0));
  for (int c = 0; c < re; ++c) {
    for (int wh = 0; wh < rf; ++wh) {
      FieldElement beta = FieldElement::zero(tower, nu);
      std::vector<mpq_class> bc = beta.coeffs();
      bc[static_cast<std::size_t>(c * Lv.f + wh * Ln.f)] = 1;
      const FieldElement prod = mul(tower, x, FieldElement(nu, std::move(bc)));
      for (int b = 0; b < Ln.e; ++b)
        for (int wl = 0; wl < Ln.f; ++wl)
          out[static_cast<std::size_t>(b * Ln.f + wl)] +=
              prod[static_cast<std::size_t>((c + re * b) * Lv.f + wl + Ln.f * wh)];
    }
  }
  return FieldElement(target, std::move(out));
}

FieldElement t_map(const TowerSpec& tower, const FieldElement& x, int target) {
  if (target == x.level()) return x;
  const FieldElement tr = trace_rel(tower, x, target);
  mpq_class ratio(tower.level(target).m, tower.level(x.level()).m);
  ratio.canonicalize();
  return scale(tr, ratio);
}

int different_exponent_scan(const TowerSpec& tower, int n) {
  const LevelInfo& L = tower.level(n);
  const int limit = 4 * L.e + 4;
  int best = -1;
  for (int d = 0; d <= limit; ++d) {
    bool integral = true;
    for (int b = 0; b < L.e && integral; ++b) {
      for (int w = 0; w < L.f && integral; ++w) {
        const FieldElement x = FieldElement::monomial(tower, n, static_cast<long>(b) - d, w);
        const FieldElement tr = trace_rel(tower, x, 1);
        if (sgn(tr[0]) != 0 && padic_valuation(tr[0], tower.p()) < 0) integral = false;
      }
    }
    if (!integral) break;
    best = d;
  }
  if (best != L.e - 1)
    throw Error(ErrorCode::TamenessViolated, "different exponent " + std::to_string(best) + " at level " +
                                                 std::to_string(n) + ", expected e_n - 1 = " +
                                                 std::to_string(L.e - 1));
  return best;
}

CharacterValue::CharacterValue(mpq_class angle) : angle_(std::move(angle)) {
  angle_.canonicalize();
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), angle_.get_num_mpz_t(), angle_.get_den_mpz_t());
  angle_ -= fl;
}

std::complex<double> CharacterValue::value() const {
  const double theta = 2.0 * std::numbers::pi * angle_.get_d();
  return {std::cos(theta), std::sin(theta)};
}

mpq_class fractional_part(const TowerSpec& tower, const FieldElement& u) {
  if (u.level() != 1)
    throw Error(ErrorCode::LevelMismatch, "character is defined on level 1; apply t_map first");
  const mpq_class& x = u[0];
  if (sgn(x) == 0) return mpq_class(0);
  mpz_class prime(static_cast<unsigned long>(tower.p()));
  mpz_class coprime_den;
  const unsigned long k = mpz_remove(coprime_den.get_mpz_t(), x.get_den_mpz_t(), prime.get_mpz_t());
  if (k == 0) return mpq_class(0);
  mpz_class pk;
  mpz_pow_ui(pk.get_mpz_t(), prime.get_mpz_t(), k);
  mpz_class inv;
  mpz_invert(inv.get_mpz_t(), coprime_den.get_mpz_t(), pk.get_mpz_t());
  mpz_class r = x.get_num() * inv;
  mpz_mod(r.get_mpz_t(), r.get_mpz_t(), pk.get_mpz_t());
  mpq_class out(r, pk);
  out.canonicalize();
  return out;
}

CharacterValue char_chi(const TowerSpec& tower, const FieldElement& u) {
  return CharacterValue(fractional_part(tower, u));
}

}  // namespace tamelevy
