#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "tamelevy/tower.hpp"

namespace tamelevy::detail {

inline bool is_zero(const mpq_class& x) { return sgn(x) == 0; }
inline bool is_zero(std::int64_t x) { return x == 0; }

struct NoReduce {
  void operator()(mpq_class&) const {}
};

struct ReduceMod {
  std::int64_t modulus;
  void operator()(std::int64_t& x) const {
    x %= modulus;
    if (x < 0) x += modulus;
  }
};

// Product in the unramified part built from the first `s` steps. Elements are
// flat coordinate arrays; step s contributes the most significant index.
template <class R, class Reduce>
void w_mul(const std::vector<UnramifiedStep>& steps, int s, const R* a, const R* b, R* out,
           const Reduce& reduce) {
  if (s == 0) {
    out[0] = a[0] * b[0];
    reduce(out[0]);
    return;
  }
  const UnramifiedStep& step = steps[s - 1];
  const int r = step.degree;
  const int fb = step.base_dim;

  auto block_zero = [fb](const R* x) {
    for (int t = 0; t < fb; ++t)
      if (!is_zero(x[t])) return false;
    return true;
  };

  std::vector<R> acc(static_cast<std::size_t>((2 * r - 1) * fb), R(0));
  std::vector<R> prod(static_cast<std::size_t>(fb));
  for (int i = 0; i < r; ++i) {
    if (block_zero(a + i * fb)) continue;
    for (int j = 0; j < r; ++j) {
      if (block_zero(b + j * fb)) continue;
      w_mul(steps, s - 1, a + i * fb, b + j * fb, prod.data(), reduce);
      for (int t = 0; t < fb; ++t) {
        acc[(i + j) * fb + t] += prod[t];
        reduce(acc[(i + j) * fb + t]);
      }
    }
  }
  std::vector<R> phi(static_cast<std::size_t>(fb));
  for (int k = 2 * r - 2; k >= r; --k) {
    if (block_zero(acc.data() + k * fb)) continue;
    for (int i = 0; i < r; ++i) {
      bool phi_zero = true;
      for (int t = 0; t < fb; ++t) {
        phi[t] = R(step.phi[i][t]);
        phi_zero = phi_zero && step.phi[i][t] == 0;
      }
      if (phi_zero) continue;
      w_mul(steps, s - 1, acc.data() + k * fb, phi.data(), prod.data(), reduce);
      for (int t = 0; t < fb; ++t) {
        acc[(k - r + i) * fb + t] -= prod[t];
        reduce(acc[(k - r + i) * fb + t]);
      }
    }
  }
  for (int t = 0; t < r * fb; ++t) out[t] = acc[t];
}

}  // namespace tamelevy::detail
