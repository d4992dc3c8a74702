#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tamelevy {

struct Tolerances {
  double coset_sum = 1e-10;      // relative, coset sums vs closed-form totals
  double levy_khinchin = 1e-8;   // relative to max(1, ||lambda||^alpha)
  double imaginary = 1e-10;      // absolute bound on imaginary parts of real sums
  double orthogonality = 1e-10;  // character table orthogonality
  double normalization = 1e-10;  // transition probabilities sum to one
  double semigroup = 1e-8;       // Chapman-Kolmogorov
  double clamp = 1e-12;          // negatives above -clamp are rounded to zero
  double lemma_slack = 1e-9;     // slack in the I_N lower bound
};

// Parsed, not yet validated, tower description.
struct TowerConfig {
  std::string name;
  std::uint64_t p = 0;
  std::string alpha_text;
  long double alpha = 0;
  std::vector<std::pair<int, int>> levels;  // (e_n, f_n) relative to Q_p
  int extend_to = 0;                // closed-form levels; 0 = listed levels only
  int max_algebra_degree = 32;      // exact arithmetic is built for m_n <= this
  std::uint64_t enum_cap = 1u << 20;  // enumeration allowed while M(n) <= enum_cap
  std::uint64_t seed = 1;
  Tolerances tolerances;
};

TowerConfig parse_tower_config(std::string_view json_text);
TowerConfig load_tower_config(const std::filesystem::path& path);

// Accepts "2", "1.5", "3/2" or a JSON number rendered to text.
long double parse_alpha(std::string_view text);

struct LevelInfo {
  int n = 0;
  int e = 1;  // ramification index over Q_p
  int f = 1;  // inertia index over Q_p
  int m = 1;  // degree e * f
  int d = 0;  // exponent of the different, e - 1 for tame levels
  long double log_q = 0;  // log q_n = f log p
  std::uint64_t q = 0;    // residue field size, 0 when it does not fit in 63 bits
  bool algebraic = false;       // exact arithmetic available at this level
  std::uint64_t p_pow_n = 0;    // p^n for algebraic levels
};

// One unramified step W' = W[X] / (Phi(X)). Phi is monic of degree `degree`;
// coefficient i is an element of W with `base_dim` coordinates, each in [0, p).
struct UnramifiedStep {
  int degree = 1;
  int base_dim = 1;
  std::vector<std::vector<std::int64_t>> phi;
};

class TowerSpec {
 public:
  std::uint64_t p() const { return p_; }
  long double alpha() const { return alpha_; }
  const std::string& alpha_text() const { return alpha_text_; }
  const std::string& name() const { return name_; }
  std::uint64_t seed() const { return seed_; }
  const Tolerances& tolerances() const { return tolerances_; }
  std::uint64_t enum_cap() const { return enum_cap_; }

  // Levels are numbered from 1 (K_1 = Q_p).
  int depth() const { return static_cast<int>(levels_.size()); }
  int listed_levels() const { return listed_; }
  int algebra_levels() const { return algebraic_; }
  const LevelInfo& level(int n) const;
  void require_algebraic(int n) const;

  const std::vector<UnramifiedStep>& steps() const { return steps_; }
  // Number of unramified steps used by level n.
  int steps_at(int n) const;

  // M(n) = p^(n m_n); log M(n) is always available, the exact value only when
  // it fits in 64 bits (throws EnumerationCapExceeded otherwise).
  long double log_group_order(int n) const;
  std::uint64_t group_order(int n) const;
  bool enumerable(int n) const;

  TowerSpec with_alpha(long double alpha, std::string text) const;

  // Stable 64-bit hash of (p, alpha, levels).
  std::uint64_t hash() const;
  std::string canonical() const;

 private:
  friend TowerSpec build_tower(const TowerConfig& config);

  std::string name_;
  std::uint64_t p_ = 0;
  long double alpha_ = 0;
  std::string alpha_text_;
  std::uint64_t seed_ = 1;
  std::uint64_t enum_cap_ = 0;
  Tolerances tolerances_;
  int listed_ = 0;
  int algebraic_ = 0;
  std::vector<LevelInfo> levels_;
  std::vector<UnramifiedStep> steps_;
  std::vector<int> steps_at_;
};

// Validates the tower and chooses the defining polynomials.
TowerSpec build_tower(const TowerConfig& config);

bool is_prime(std::uint64_t n);

// Exact arithmetic in the residue field F_{q_n}. Elements are encoded as
// integers in [0, q_n): base-p digits are the coordinates in the monomial
// basis of the unramified part.
class ResidueField {
 public:
  ResidueField(const TowerSpec& tower, int n);

  std::uint64_t size() const { return q_; }
  int dimension() const { return dim_; }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const;
  std::uint64_t neg(std::uint64_t a) const;
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const;
  // Absolute trace F_q -> F_p.
  std::uint64_t trace(std::uint64_t a) const;

  std::vector<std::int64_t> coordinates(std::uint64_t a) const;
  std::uint64_t encode(const std::vector<std::int64_t>& coords) const;

 private:
  const TowerSpec* tower_;
  int steps_ = 0;
  int dim_ = 1;
  std::uint64_t q_ = 0;
};

}  // namespace tamelevy
