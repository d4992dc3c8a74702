#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <gmpxx.h>

#include "tamelevy/tower.hpp"

namespace tamelevy {

// Exact element of K_n = Q_p[X_2, ..., Y] / (Phi_k, Y^{e_n} - p).
//
// Coordinates are indexed by b * f_n + w, the coefficient of Y^b X^w where
// X^w runs over the monomials of the unramified part (one generator per
// unramified step) and 0 <= b < e_n. Y is the uniformizer pi_n; at every level
// pi_n = pi_nu^{e_nu / e_n}, so embeddings are coordinate relabelings.
class FieldElement {
 public:
  FieldElement(int level, std::vector<mpq_class> coeffs)
      : level_(level), coeffs_(std::move(coeffs)) {}

  static FieldElement zero(const TowerSpec& tower, int n);
  static FieldElement from_rational(const TowerSpec& tower, int n, const mpq_class& value);
  // Y^k X^w for any integer k (negative and large powers reduce via Y^e = p).
  static FieldElement monomial(const TowerSpec& tower, int n, long k, int w);
  // Unramified lift of a residue-field element given by its base-p code:
  // the digits become X-coordinates in {0, ..., p-1}.
  static FieldElement lift(const TowerSpec& tower, int n, std::uint64_t residue);

  int level() const { return level_; }
  const std::vector<mpq_class>& coeffs() const { return coeffs_; }
  const mpq_class& operator[](std::size_t i) const { return coeffs_[i]; }
  bool is_zero() const;

  friend bool operator==(const FieldElement& a, const FieldElement& b) {
    return a.level_ == b.level_ && a.coeffs_ == b.coeffs_;
  }

 private:
  int level_;
  std::vector<mpq_class> coeffs_;
};

FieldElement add(const FieldElement& x, const FieldElement& y);
FieldElement sub(const FieldElement& x, const FieldElement& y);
FieldElement negate(const FieldElement& x);
FieldElement scale(const FieldElement& x, const mpq_class& c);
FieldElement mul(const TowerSpec& tower, const FieldElement& x, const FieldElement& y);

// Normalized valuation v_n(x) with v_n(pi_n) = 1; nullopt encodes +infinity.
std::optional<long> valuation(const TowerSpec& tower, const FieldElement& x);
// |x|_n = q_n^{-v(x)}
long double abs_level(const TowerSpec& tower, const FieldElement& x);
// ||x|| = |x|_n^{1/m_n} = p^{-v(x)/e_n}
long double abs_norm(const TowerSpec& tower, const FieldElement& x);
// Exact log_p ||x|| = -v(x)/e_n; nullopt for zero.
std::optional<mpq_class> log_p_norm(const TowerSpec& tower, const FieldElement& x);

FieldElement embed(const TowerSpec& tower, const FieldElement& x, int target);

// Tr_{K_nu/K_n}(x), as the matrix trace of multiplication by x on the
// monomial basis of K_nu over K_n.
FieldElement trace_rel(const TowerSpec& tower, const FieldElement& x, int target);
// T_n(x) = (m_n / m_nu) Tr_{K_nu/K_n}(x); identity when target == level.
FieldElement t_map(const TowerSpec& tower, const FieldElement& x, int target);

// Largest d with Tr_{K_n/Q_p}(pi_n^{-d} O_n) in Z_p. Throws TamenessViolated
// unless the result is e_n - 1.
int different_exponent_scan(const TowerSpec& tower, int n);

// e^{2 pi i angle}, with the angle an exact rational in [0, 1).
class CharacterValue {
 public:
  CharacterValue() = default;
  explicit CharacterValue(mpq_class angle);

  const mpq_class& angle() const { return angle_; }
  bool is_one() const { return sgn(angle_) == 0; }
  std::complex<double> value() const;

  friend CharacterValue operator*(const CharacterValue& a, const CharacterValue& b) {
    return CharacterValue(a.angle_ + b.angle_);
  }
  friend bool operator==(const CharacterValue& a, const CharacterValue& b) {
    return a.angle_ == b.angle_;
  }

 private:
  mpq_class angle_{0};
};

// p-adic fractional part {u} in [0, 1) of an element of Q_p = K_1.
mpq_class fractional_part(const TowerSpec& tower, const FieldElement& u);
// Rank-zero additive character chi(u) = e^{2 pi i {u}}.
CharacterValue char_chi(const TowerSpec& tower, const FieldElement& u);

// v_p of a nonzero rational.
long padic_valuation(const mpq_class& x, std::uint64_t p);

}  // namespace tamelevy
