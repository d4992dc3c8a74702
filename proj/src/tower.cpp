#include "tamelevy/tower.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tamelevy/detail/unramified.hpp"
#include "tamelevy/error.hpp"

namespace tamelevy {

namespace {

using Elem = std::vector<std::int64_t>;
using Poly = std::vector<Elem>;

// F_Q built from a prefix of the unramified steps, coordinates mod p.
struct FiniteField {
  const std::vector<UnramifiedStep>* steps;
  int s;
  int dim;
  std::int64_t p;
  std::uint64_t order;

  Elem zero() const { return Elem(dim, 0); }
  Elem one() const {
    Elem e = zero();
    e[0] = 1;
    return e;
  }
  bool is_zero(const Elem& a) const {
    for (auto c : a)
      if (c != 0) return false;
    return true;
  }
  Elem add(const Elem& a, const Elem& b) const {
    Elem r(dim);
    for (int i = 0; i < dim; ++i) r[i] = (a[i] + b[i]) % p;
    return r;
  }
  Elem sub(const Elem& a, const Elem& b) const {
    Elem r(dim);
    for (int i = 0; i < dim; ++i) r[i] = ((a[i] - b[i]) % p + p) % p;
    return r;
  }
  Elem mul(const Elem& a, const Elem& b) const {
    Elem r(dim);
    detail::w_mul(*steps, s, a.data(), b.data(), r.data(), detail::ReduceMod{p});
    return r;
  }
  Elem pow(Elem base, std::uint64_t e) const {
    Elem r = one();
    while (e > 0) {
      if (e & 1) r = mul(r, base);
      base = mul(base, base);
      e >>= 1;
    }
    return r;
  }
  Elem inv(const Elem& a) const { return pow(a, order - 2); }
  Elem decode(std::uint64_t code) const {
    Elem e(dim);
    for (int i = 0; i < dim; ++i) {
      e[i] = static_cast<std::int64_t>(code % static_cast<std::uint64_t>(p));
      code /= static_cast<std::uint64_t>(p);
    }
    return e;
  }
};

void trim(const FiniteField& F, Poly& a) {
  while (!a.empty() && F.is_zero(a.back())) a.pop_back();
}

Poly poly_mod(const FiniteField& F, Poly a, const Poly& b) {
  trim(F, a);
  const std::size_t db = b.size() - 1;
  const Elem lead_inv = F.inv(b.back());
  while (a.size() >= b.size()) {
    const std::size_t shift = a.size() - b.size();
    const Elem c = F.mul(a.back(), lead_inv);
    for (std::size_t i = 0; i <= db; ++i) a[shift + i] = F.sub(a[shift + i], F.mul(c, b[i]));
    trim(F, a);
  }
  return a;
}

Poly poly_mulmod(const FiniteField& F, const Poly& a, const Poly& b, const Poly& g) {
  if (a.empty() || b.empty()) return {};
  Poly prod(a.size() + b.size() - 1, F.zero());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) prod[i + j] = F.add(prod[i + j], F.mul(a[i], b[j]));
  return poly_mod(F, std::move(prod), g);
}

Poly poly_powmod(const FiniteField& F, Poly base, std::uint64_t e, const Poly& g) {
  Poly r{F.one()};
  base = poly_mod(F, std::move(base), g);
  while (e > 0) {
    if (e & 1) r = poly_mulmod(F, r, base, g);
    base = poly_mulmod(F, base, base, g);
    e >>= 1;
  }
  return r;
}

Poly poly_gcd(const FiniteField& F, Poly a, Poly b) {
  trim(F, a);
  trim(F, b);
  while (!b.empty()) {
    Poly r = poly_mod(F, a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

std::vector<int> prime_factors(int r) {
  std::vector<int> out;
  for (int d = 2; d * d <= r; ++d) {
    if (r % d == 0) {
      out.push_back(d);
      while (r % d == 0) r /= d;
    }
  }
  if (r > 1) out.push_back(r);
  return out;
}

// Rabin's test for a monic polynomial of degree r over F.
bool irreducible(const FiniteField& F, const Poly& g) {
  const int r = static_cast<int>(g.size()) - 1;
  const Poly x{F.zero(), F.one()};
  std::vector<Poly> frob{poly_mod(F, x, g)};  // x^(Q^k) mod g
  for (int k = 1; k <= r; ++k) frob.push_back(poly_powmod(F, frob.back(), F.order, g));
  Poly diff = frob[r];
  diff.resize(std::max<std::size_t>(diff.size(), 2), F.zero());
  diff[1] = F.sub(diff[1], F.one());
  trim(F, diff);
  if (!diff.empty()) return false;
  for (int ell : prime_factors(r)) {
    Poly h = frob[r / ell];
    h.resize(std::max<std::size_t>(h.size(), 2), F.zero());
    h[1] = F.sub(h[1], F.one());
    if (poly_gcd(F, h, g).size() != 1) return false;
  }
  return true;
}

std::uint64_t checked_pow(std::uint64_t base, int exp, std::uint64_t limit) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > limit / base) return 0;
    r *= base;
  }
  return r;
}

std::string trim_copy(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

long double parse_alpha(std::string_view text) {
  const std::string s = trim_copy(text);
  try {
    std::size_t used = 0;
    if (auto slash = s.find('/'); slash != std::string::npos) {
      const long double num = std::stold(s.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument(s);
      const std::string den_text = s.substr(slash + 1);
      const long double den = std::stold(den_text, &used);
      if (used != den_text.size() || den == 0) throw std::invalid_argument(s);
      return num / den;
    }
    const long double v = std::stold(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "cannot parse alpha '" + s + "'");
  }
}

TowerConfig parse_tower_config(std::string_view json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed config: ") + e.what());
  }
  TowerConfig c;
  try {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    for (const char* key : {"p", "alpha", "levels"})
      if (!j.contains(key)) throw Error(ErrorCode::ConfigError, std::string("missing key '") + key + "'");
    c.name = j.value("name", std::string("tower"));
    if (!j["p"].is_number_integer() || j["p"].get<std::int64_t>() < 2)
      throw Error(ErrorCode::ConfigError, "p must be an integer >= 2");
    c.p = j["p"].get<std::uint64_t>();
    const json& a = j["alpha"];
    if (a.is_string()) {
      c.alpha_text = a.get<std::string>();
    } else if (a.is_number()) {
      c.alpha_text = a.dump();
    } else {
      throw Error(ErrorCode::ConfigError, "alpha must be a number or a string");
    }
    c.alpha = parse_alpha(c.alpha_text);
    if (!j["levels"].is_array()) throw Error(ErrorCode::ConfigError, "levels must be an array");
    for (const json& lv : j["levels"]) {
      if (!lv.is_array() || lv.size() != 2 || !lv[0].is_number_integer() || !lv[1].is_number_integer())
        throw Error(ErrorCode::ConfigError, "each level must be an [e, f] pair of integers");
      c.levels.emplace_back(lv[0].get<int>(), lv[1].get<int>());
    }
    c.extend_to = j.value("extend_to", 0);
    c.max_algebra_degree = j.value("max_algebra_degree", 32);
    c.enum_cap = j.value("enum_cap", std::uint64_t{1} << 20);
    c.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("tolerances")) {
      const json& t = j["tolerances"];
      Tolerances& tol = c.tolerances;
      tol.coset_sum = t.value("coset_sum", tol.coset_sum);
      tol.levy_khinchin = t.value("levy_khinchin", tol.levy_khinchin);
      tol.imaginary = t.value("imaginary", tol.imaginary);
      tol.orthogonality = t.value("orthogonality", tol.orthogonality);
      tol.normalization = t.value("normalization", tol.normalization);
      tol.semigroup = t.value("semigroup", tol.semigroup);
      tol.clamp = t.value("clamp", tol.clamp);
      tol.lemma_slack = t.value("lemma_slack", tol.lemma_slack);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad config value: ") + e.what());
  }
  return c;
}

TowerConfig load_tower_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_tower_config(ss.str());
}

const LevelInfo& TowerSpec::level(int n) const {
  if (n < 1 || n > depth())
    throw Error(ErrorCode::LevelMismatch, "level " + std::to_string(n) + " outside tower of depth " +
                                              std::to_string(depth()));
  return levels_[n - 1];
}

void TowerSpec::require_algebraic(int n) const {
  if (!level(n).algebraic)
    throw Error(ErrorCode::EnumerationCapExceeded,
                "exact arithmetic is not built for level " + std::to_string(n));
}

int TowerSpec::steps_at(int n) const {
  require_algebraic(n);
  return steps_at_[n - 1];
}

long double TowerSpec::log_group_order(int n) const {
  if (n == 0) return 0;
  const LevelInfo& L = level(n);
  return static_cast<long double>(n) * L.m * std::log(static_cast<long double>(p_));
}

std::uint64_t TowerSpec::group_order(int n) const {
  if (n == 0) return 1;
  const LevelInfo& L = level(n);
  const std::uint64_t v = checked_pow(p_, n * L.m, std::uint64_t{1} << 62);
  if (v == 0)
    throw Error(ErrorCode::EnumerationCapExceeded, "M(" + std::to_string(n) + ") exceeds 2^62");
  return v;
}

bool TowerSpec::enumerable(int n) const {
  if (n < 1 || n > depth() || !level(n).algebraic) return false;
  if (log_group_order(n) > 62 * std::log(2.0L)) return false;
  return group_order(n) <= enum_cap_;
}

TowerSpec TowerSpec::with_alpha(long double alpha, std::string text) const {
  if (!(alpha > 0)) throw Error(ErrorCode::ConfigError, "alpha must be positive");
  TowerSpec t = *this;
  t.alpha_ = alpha;
  t.alpha_text_ = std::move(text);
  return t;
}

std::string TowerSpec::canonical() const {
  std::ostringstream os;
  os << "p=" << p_ << ";alpha=" << alpha_text_ << ";levels=";
  for (const LevelInfo& L : levels_) os << "(" << L.e << "," << L.f << ")";
  os << ";listed=" << listed_;
  return os.str();
}

std::uint64_t TowerSpec::hash() const {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

TowerSpec build_tower(const TowerConfig& config) {
  if (!is_prime(config.p)) throw Error(ErrorCode::ConfigError, "p = " + std::to_string(config.p) + " is not prime");
  if (config.p > 65521) throw Error(ErrorCode::ConfigError, "p too large for exact residue arithmetic");
  if (!(config.alpha > 0)) throw Error(ErrorCode::ConfigError, "alpha must be positive");
  if (config.levels.empty() || config.levels.front() != std::pair<int, int>{1, 1})
    throw Error(ErrorCode::ConfigError, "level list must start with (1, 1)");
  for (auto [e, f] : config.levels)
    if (e < 1 || f < 1) throw Error(ErrorCode::ConfigError, "e and f must be positive");
  if (config.max_algebra_degree < 1) throw Error(ErrorCode::ConfigError, "max_algebra_degree must be positive");

  std::vector<std::pair<int, int>> ef = config.levels;
  const int listed = static_cast<int>(ef.size());
  if (config.extend_to > listed) {
    if (listed < 2) throw Error(ErrorCode::ConfigError, "cannot extend a tower with a single level");
    const int re = ef[listed - 1].first / std::max(1, ef[listed - 2].first);
    const int rf = ef[listed - 1].second / std::max(1, ef[listed - 2].second);
    while (static_cast<int>(ef.size()) < config.extend_to) {
      auto [e, f] = ef.back();
      if (e > (1 << 26) / std::max(1, re) || f > (1 << 26) / std::max(1, rf))
        throw Error(ErrorCode::ConfigError, "extended tower degree overflows");
      ef.emplace_back(e * re, f * rf);
    }
  }

  for (std::size_t i = 1; i < ef.size(); ++i) {
    auto [e0, f0] = ef[i - 1];
    auto [e1, f1] = ef[i];
    const std::string where = " at level " + std::to_string(i + 1);
    if (e1 % e0 != 0 || f1 % f0 != 0)
      throw Error(ErrorCode::NonDivisibleTower, "e_n | e_n+1 and f_n | f_n+1 fail" + where);
    if (static_cast<long long>(e1) * f1 <= static_cast<long long>(e0) * f0)
      throw Error(ErrorCode::NotIncreasing, "degree does not increase" + where);
  }
  for (std::size_t i = 0; i < ef.size(); ++i)
    if (static_cast<std::uint64_t>(ef[i].first) % config.p == 0)
      throw Error(ErrorCode::WildRamification,
                  "p = " + std::to_string(config.p) + " divides e = " + std::to_string(ef[i].first) +
                      " at level " + std::to_string(i + 1));

  TowerSpec t;
  t.name_ = config.name;
  t.p_ = config.p;
  t.alpha_ = config.alpha;
  t.alpha_text_ = config.alpha_text.empty() ? std::to_string(static_cast<double>(config.alpha))
                                            : config.alpha_text;
  t.seed_ = config.seed;
  t.enum_cap_ = config.enum_cap;
  t.tolerances_ = config.tolerances;
  t.listed_ = listed;

  const long double log_p = std::log(static_cast<long double>(config.p));
  const long double log2_p = std::log2(static_cast<long double>(config.p));
  bool algebraic_prefix = true;
  for (std::size_t i = 0; i < ef.size(); ++i) {
    LevelInfo L;
    L.n = static_cast<int>(i) + 1;
    L.e = ef[i].first;
    L.f = ef[i].second;
    L.m = L.e * L.f;
    L.d = L.e - 1;
    L.log_q = L.f * log_p;
    L.q = (L.f * log2_p < 62.5L) ? checked_pow(config.p, L.f, std::uint64_t{1} << 62) : 0;
    const std::uint64_t ppn = checked_pow(config.p, L.n, std::uint64_t{1} << 31);
    algebraic_prefix = algebraic_prefix && L.m <= config.max_algebra_degree && L.q != 0 &&
                       ppn != 0 && L.q < (std::uint64_t{1} << 32);
    L.algebraic = algebraic_prefix;
    L.p_pow_n = L.algebraic ? ppn : 0;
    t.levels_.push_back(L);
    if (L.algebraic) ++t.algebraic_;
  }

  // Defining polynomials for each unramified step, lexicographically least
  // monic irreducible over the residue field reached so far.
  int steps = 0;
  t.steps_at_.assign(t.levels_.size(), 0);
  for (int n = 1; n <= t.algebraic_; ++n) {
    if (n > 1) {
      const int f_prev = t.levels_[n - 2].f;
      const int r = t.levels_[n - 1].f / f_prev;
      if (r > 1) {
        FiniteField F{&t.steps_, steps, f_prev, static_cast<std::int64_t>(config.p), t.levels_[n - 2].q};
        bool found = false;
        for (std::uint64_t code = 0; !found; ++code) {
          Poly g(r + 1);
          std::uint64_t rest = code;
          for (int i = 0; i < r; ++i) {
            g[i] = F.decode(rest % F.order);
            rest /= F.order;
          }
          if (rest != 0) break;
          g[r] = F.one();
          if (irreducible(F, g)) {
            UnramifiedStep st;
            st.degree = r;
            st.base_dim = f_prev;
            st.phi.assign(g.begin(), g.begin() + r);
            t.steps_.push_back(std::move(st));
            ++steps;
            found = true;
          }
        }
        if (!found) throw Error(ErrorCode::ConfigError, "no irreducible polynomial found");
      }
    }
    t.steps_at_[n - 1] = steps;
  }
  return t;
}

ResidueField::ResidueField(const TowerSpec& tower, int n)
    : tower_(&tower), steps_(tower.steps_at(n)), dim_(tower.level(n).f), q_(tower.level(n).q) {}

std::vector<std::int64_t> ResidueField::coordinates(std::uint64_t a) const {
  std::vector<std::int64_t> c(dim_);
  const std::uint64_t p = tower_->p();
  for (int i = 0; i < dim_; ++i) {
    c[i] = static_cast<std::int64_t>(a % p);
    a /= p;
  }
  return c;
}

std::uint64_t ResidueField::encode(const std::vector<std::int64_t>& coords) const {
  const auto p = static_cast<std::int64_t>(tower_->p());
  std::uint64_t code = 0;
  for (int i = dim_ - 1; i >= 0; --i) code = code * tower_->p() + static_cast<std::uint64_t>(((coords[i] % p) + p) % p);
  return code;
}

std::uint64_t ResidueField::add(std::uint64_t a, std::uint64_t b) const {
  auto x = coordinates(a), y = coordinates(b);
  for (int i = 0; i < dim_; ++i) x[i] += y[i];
  return encode(x);
}

std::uint64_t ResidueField::neg(std::uint64_t a) const {
  auto x = coordinates(a);
  for (auto& c : x) c = -c;
  return encode(x);
}

std::uint64_t ResidueField::mul(std::uint64_t a, std::uint64_t b) const {
  auto x = coordinates(a), y = coordinates(b);
  std::vector<std::int64_t> out(dim_);
  detail::w_mul(tower_->steps(), steps_, x.data(), y.data(), out.data(),
                detail::ReduceMod{static_cast<std::int64_t>(tower_->p())});
  return encode(out);
}

std::uint64_t ResidueField::trace(std::uint64_t a) const {
  // Tr(a) = a + a^p + ... + a^(p^(f-1))
  std::uint64_t sum = 0, power = a;
  for (int i = 0; i < dim_; ++i) {
    sum = add(sum, power);
    std::uint64_t next = 1;
    for (std::uint64_t k = 0; k < tower_->p(); ++k) next = mul(next, power);
    power = next;
  }
  return sum;
}

}  // namespace tamelevy
