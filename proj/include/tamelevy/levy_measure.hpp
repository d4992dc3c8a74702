#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <gmpxx.h>

#include "tamelevy/support_group.hpp"
#include "tamelevy/tower.hpp"

namespace tamelevy {

// Lambda_n = Pi(S \ S_n) in closed form, evaluated in log space so that it
// stays finite for levels whose q_n^{n e_n} overflows any float type.
long double log_total_mass(const TowerSpec& tower, int n);
long double total_mass(const TowerSpec& tower, int n);
// The same formula written literally; only for levels where it fits.
long double total_mass_literal(const TowerSpec& tower, int n);
// Lambda_n / q_1^{alpha n}
long double asymptotic_ratio(const TowerSpec& tower, int n);

struct ShellRow {
  int j0 = 0;          // index of the lowest nonzero digit
  mpz_class count;     // (q_n - 1) q_n^{n e_n - 1 - j0}
  long double log_count = 0;
  long double log_mass = 0;  // per coset
  long double mass() const;
};

// Per-shell Levy masses at level n. The mass of one coset depends only on
// the position of its lowest nonzero digit.
class LevyTable {
 public:
  LevyTable(const TowerSpec& tower, int n);

  int level() const { return n_; }
  const std::vector<ShellRow>& shells() const { return shells_; }
  long double mass(int j0) const;
  long double log_mass(int j0) const;
  long double total() const { return total_; }
  long double log_total() const { return log_total_; }
  // sum_j0 count_j0 mass_j0 with compensated summation in log-scaled form
  long double shell_sum() const;
  // count_j0 mass_j0 / Lambda_n
  long double shell_probability(int j0) const;

  // Fault hook for negative controls: every per-coset mass multiplied.
  LevyTable with_mass_scale(long double factor) const;

 private:
  int n_;
  std::vector<ShellRow> shells_;
  long double total_;
  long double log_total_;
};

long double coset_mass(const SupportGroup& group, const LevyTable& table, const CosetIndex& g);

struct LevyKhinchinResult {
  long double lhs_re = 0;
  long double lhs_im = 0;
  long double rhs = 0;
  long double error() const;  // |lhs - rhs| / max(1, |rhs|)
};

// Brute force over G_n (enumeration cap applies).
LevyKhinchinResult levy_khinchin_check(const SupportGroup& group, const LevyTable& table, const DualIndex& xi);

struct LevyKhinchinSweep {
  std::uint64_t checked = 0;  // classes covered; 0 if M(n) exceeds 64 bits
  long double worst_error = 0;
  long double worst_imaginary = 0;
  bool trivial_exact = true;  // lhs is exactly 0 for the trivial class
};

// Every xi in Xi_n against every g in G_n.
LevyKhinchinSweep levy_khinchin_sweep_brute(const SupportGroup& group, const LevyTable& table);
// Every xi in Xi_n, with the sum over each digit shell of G_n evaluated as
// a character sum over the subgroup pi^j O / p^n O: it equals the subgroup
// order when the character y^T B (.) vanishes on it and 0 otherwise. The
// vanishing test reads B directly. Usable while M(n) <= cap.
LevyKhinchinSweep levy_khinchin_sweep_shells(const SupportGroup& group, const LevyTable& table,
                                             std::uint64_t cap = std::uint64_t{1} << 28);

// Every xi in Xi_n without enumeration. The left-hand side at xi only
// depends on a(B y), and the identity for all xi amounts to a(B y) being
// the dual shell of y. For each j the classes {a(B y) <= j} and
// {dual shell <= j} are subgroups of equal order once the pairing is perfect
// (B invertible mod p), so generator containment proves equality. What is
// left is one comparison per shell.
LevyKhinchinSweep levy_khinchin_sweep_lattice(const SupportGroup& group, const LevyTable& table);

// Coset-sum of masses over G_n \ {0}: brute enumeration while M(n) <= cap,
// otherwise sum over digit shells with exact counts.
struct CosetSumResult {
  long double coset_sum = 0;
  long double closed_form = 0;
  bool enumerated = false;
  long double rel_error() const;
};
CosetSumResult coset_sum_check(const TowerSpec& tower, int n, std::uint64_t cap = std::uint64_t{1} << 24,
                               long double mass_scale = 1);

struct TransitionProbs {
  int level = 0;
  double t = 0;
  std::vector<long double> p;  // indexed by SupportGroup::index_of
  long double raw_sum = 0;     // before clamping and renormalization
  long double min_raw = 0;
};

long double rho_alpha(long double s, long double t, long double alpha);
TransitionProbs transition_probs(const SupportGroup& group, int n, double t);
std::vector<long double> convolve(const SupportGroup& group, int n, const std::vector<long double>& a,
                                  const std::vector<long double>& b);

// Exact Evans-identity pipeline on G_n.
class OccupationSolver {
 public:
  OccupationSolver(const SupportGroup& group, const LevyTable& table, int N);

  int n() const { return n_; }
  int N() const { return N_; }
  // I_N(xi): sum over nonzero cosets in S_N/S_n of mass (1 - chi); the
  // imaginary residue is tracked separately.
  long double I(const Coords& y, long double* imaginary = nullptr) const;
  long double lambda(const Coords& y) const;
  long double expected_tau() const;
  long double q_exact() const;
  long double worst_imaginary() const { return worst_imaginary_; }

 private:
  const SupportGroup* group_;
  int n_, N_;
  long double lambda_N_;
  long double total_n_;
  std::vector<Coords> inside_;          // nonzero cosets of S_n inside S_N
  std::vector<long double> inside_mass_;
  mutable long double worst_imaginary_ = 0;
};

long double I_N(const SupportGroup& group, const LevyTable& table, const DualIndex& xi, int N);
long double lambda_n(const SupportGroup& group, const LevyTable& table, const DualIndex& xi, int N);
long double expected_tau(const SupportGroup& group, int n, int N);
long double q_exact(const SupportGroup& group, int n, int N);

struct Lemma2Result {
  bool holds = false;
  long double lhs = 0;   // I_N(xi)
  long double bound = 0; // (1 - q_N^{-N e_N}) |xi|_n^{alpha/m_n} - Lambda_N
  long double slack() const { return lhs - bound; }
};
// Throws ShellOutOfRange unless N e_n + 1 <= shell <= n e_n.
Lemma2Result lemma2_bound(const TowerSpec& tower, int n, int N, int shell, long double i_value);
Lemma2Result lemma2_bound_check(const SupportGroup& group, const LevyTable& table, const DualIndex& xi, int N);

struct BnSequence {
  std::vector<int> blocks;          // n(1), n(2), ...
  std::vector<long double> total;   // index n - 1
  std::vector<long double> b;       // index n - 1
  std::vector<long double> B;       // empty when alpha <= log_{q_1} 2
  bool alpha_too_small = false;
  long double b_at(int n) const { return b.at(static_cast<std::size_t>(n - 1)); }
  int block_of(int n) const;        // j with n(j) <= n < n(j+1)
  void require_B() const;           // throws AlphaTooSmall
};
BnSequence bn_sequence(const TowerSpec& tower, int n_max);

void write_shell_csv(const TowerSpec& tower, int n_max, std::ostream& os);
void write_sequence_csv(const TowerSpec& tower, int n_max, std::ostream& os);

}  // namespace tamelevy
