#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include <gmpxx.h>

#include "tamelevy/field.hpp"
#include "tamelevy/tower.hpp"

namespace tamelevy {

// Coset g of S_n in S. digits[j] (j < n e_n) is a residue-field code; the
// representative is m_n pi_n^{-d_n} sum_j lift(digits[j]) pi_n^j.
struct CosetIndex {
  int level = 0;
  std::vector<std::uint64_t> digits;
  friend bool operator==(const CosetIndex&, const CosetIndex&) = default;
};

// Class xi + O in the annihilator of S_n, xi = pi_n^{-shell} sum_i lift(digits[i]) pi_n^i.
struct DualIndex {
  int level = 0;
  int shell = 0;
  std::vector<std::uint64_t> digits;
  friend bool operator==(const DualIndex&, const DualIndex&) = default;
};

// Delta-distance from 0. Cosets inside S_n have distance below M(n)^{-1},
// which level n cannot see; those report value 0 with resolved = false.
struct UltrametricValue {
  long double value = 0;
  bool resolved = true;
};

using Coords = std::vector<std::int64_t>;

// Quotients G_n = S/S_n and their duals. Internally a coset is stored through
// x in O_n / p^n O_n (rep = m_n pi^{-d} x) and a dual class through
// y = p^n xi in O_n / p^n O_n; both are coordinate vectors in (Z/p^n)^{m_n}
// on the monomial basis Y^b X^w. The pairing is y^T B x / p^n mod 1 with
// B_kl = Tr(pi^{-d} b_k b_l).
class SupportGroup {
 public:
  // Tables (pairing forms, projection matrices) are built for algebraic
  // levels up to max_level; 0 picks min(algebra_levels, 4).
  explicit SupportGroup(const TowerSpec& tower, int max_level = 0);

  const TowerSpec& tower() const { return *tower_; }
  int max_level() const { return max_level_; }

  std::uint64_t group_order(int n) const { return tower_->group_order(n); }
  // mu of a union of `count` cosets of S_n.
  mpq_class haar_cylinder(int n, std::uint64_t count) const;

  Coords to_coords(const CosetIndex& g) const;
  CosetIndex from_coords(int n, const Coords& x) const;
  Coords dual_coords(const DualIndex& xi) const;
  DualIndex dual_from_coords(int n, const Coords& y) const;

  CosetIndex zero(int n) const;
  CosetIndex add(const CosetIndex& g, const CosetIndex& h) const;
  CosetIndex negate(const CosetIndex& g) const;

  FieldElement coset_rep(const CosetIndex& g) const;
  CosetIndex coset_of(const FieldElement& z) const;
  FieldElement dual_rep(const DualIndex& xi) const;
  // Class xi + O at the level of xi; OutOfBall unless |xi|_n <= q_n^{n e_n}.
  DualIndex dual_class_of(const FieldElement& xi) const;

  // Index of the lowest nonzero digit; n e_n for the zero coset.
  int shell_of(int n, const Coords& x) const;
  int dual_shell_of(int n, const Coords& y) const;

  // Projection G_nu -> G_n through coset_of(T_n(rep(g))), evaluated exactly
  // (project_exact) or through the cached integer matrix (project).
  CosetIndex project_exact(const CosetIndex& g, int n) const;
  CosetIndex project(const CosetIndex& g, int n) const;
  Coords project_coords(int from, int to, const Coords& x) const;

  int delta_level_exact(const CosetIndex& g) const;
  int delta_level(const CosetIndex& g) const;
  int delta_level_coords(int n, const Coords& x) const;
  UltrametricValue ultrametric(const CosetIndex& g) const;

  // Pairing exactly through field arithmetic, and through the cached form.
  CharacterValue pairing_exact(const CosetIndex& g, const DualIndex& xi) const;
  CharacterValue pairing(const CosetIndex& g, const DualIndex& xi) const;
  // Numerator k of the angle k / p^n.
  std::int64_t pairing_numerator(int n, const Coords& x, const Coords& y) const;
  const std::vector<std::int64_t>& pairing_form(int n) const;
  // B invertible mod p, i.e. the pairing G_n x Xi_n -> Q/Z is perfect.
  bool pairing_perfect(int n) const;

  // Visits every coordinate vector of (Z/p^n)^{m_n} in lexicographic order
  // (first coordinate fastest). Throws EnumerationCapExceeded above the cap.
  void for_each_element(int n, const std::function<void(const Coords&)>& visit) const;
  // Position in that order: sum_i x_i (p^n)^i, and its inverse.
  std::uint64_t index_of(int n, const Coords& x) const;
  Coords element_at(int n, std::uint64_t index) const;
  std::vector<CosetIndex> coset_enumerate(int n) const;
  std::vector<DualIndex> dual_enumerate(int n) const;

  // T_n maps Sigma_{nu,N} into and onto Sigma_{n,N}: the map is written in
  // the scaled bases of both balls, checked for integrality and for full
  // rank over F_p.
  bool lemma1_surjectivity_check(int nu, int n, int N) const;

  // Group, dual and (for M(n) <= 256) character tables.
  void write_tables_csv(int n, std::ostream& os) const;

 private:
  struct LevelTables {
    std::int64_t modulus = 0;            // p^n
    std::vector<std::int64_t> form;      // B, m x m row-major
    std::vector<std::vector<std::int64_t>> proj;  // proj[N]: m_N x m_n, N < n
  };

  const LevelTables& tables(int n) const;
  FieldElement scaled_basis(int n, int k) const;  // m_n pi_n^{-d_n} b_k
  Coords reduce_coords(const FieldElement& x, std::int64_t modulus) const;

  const TowerSpec* tower_;
  int max_level_;
  std::vector<LevelTables> tables_;
};

std::string digits_to_string(const std::vector<std::uint64_t>& digits);

}  // namespace tamelevy
