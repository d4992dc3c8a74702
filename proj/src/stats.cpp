#include "tamelevy/stats.hpp"

#include <algorithm>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "tamelevy/error.hpp"

namespace tamelevy {

double kolmogorov_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_exponential(std::vector<double> samples, double rate) {
  if (samples.empty()) throw Error(ErrorCode::NumericalFailure, "KS test on an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = -std::expm1(-rate * samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_pvalue(d, samples.size()), 0};
}

TestResult chi_square_gof(const std::vector<double>& observed, const std::vector<double>& probs,
                          double min_expected) {
  if (observed.size() != probs.size()) throw Error(ErrorCode::NumericalFailure, "bin count mismatch");
  double total = 0;
  for (double o : observed) total += o;
  double stat = 0, pooled_o = 0, pooled_e = 0;
  int bins = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = probs[i] * total;
    if (e < min_expected) {
      pooled_o += observed[i];
      pooled_e += e;
      continue;
    }
    stat += (observed[i] - e) * (observed[i] - e) / e;
    ++bins;
  }
  if (pooled_e > 0) {
    stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++bins;
  }
  const int dof = bins - 1;
  if (dof < 1) return {stat, 1.0, 0};
  boost::math::chi_squared dist(dof);
  return {stat, boost::math::cdf(boost::math::complement(dist, stat)), dof};
}

TestResult chi_square_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::NumericalFailure, "bin count mismatch");
  double na = 0, nb = 0;
  for (double x : a) na += x;
  for (double x : b) nb += x;
  const double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
  double stat = 0;
  int bins = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] + b[i] == 0) continue;
    const double diff = ka * a[i] - kb * b[i];
    stat += diff * diff / (a[i] + b[i]);
    ++bins;
  }
  const int dof = bins - 1;
  if (dof < 1) return {stat, 1.0, 0};
  boost::math::chi_squared dist(dof);
  return {stat, boost::math::cdf(boost::math::complement(dist, stat)), dof};
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0) return {0, 1};
  const double z = normal_quantile(0.5 + confidence / 2);
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double denom = 1 + z * z / n;
  const double centre = (phat + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::NumericalFailure, "distribution size mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s / 2;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0;
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  NeumaierSum<double> sum;
  for (double x : xs) sum.add(x);
  s.mean = sum.value() / static_cast<double>(xs.size());
  NeumaierSum<double> ss;
  for (double x : xs) ss.add((x - s.mean) * (x - s.mean));
  s.variance = xs.size() > 1 ? ss.value() / static_cast<double>(xs.size() - 1) : 0.0;
  s.std_error = std::sqrt(s.variance / static_cast<double>(xs.size()));
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  s.q1 = quantile(xs, 0.25);
  s.median = quantile(xs, 0.5);
  s.q3 = quantile(xs, 0.75);
  return s;
}

}  // namespace tamelevy
