#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace tamelevy {

// Compensated (Neumaier) summation; deterministic for a fixed order.
template <class T>
class NeumaierSum {
 public:
  void add(T x) {
    const T t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_ = 0;
  T comp_ = 0;
};

struct TestResult {
  double statistic = 0;
  double p_value = 1;
  int dof = 0;
};

// Asymptotic Kolmogorov tail with the Stephens small-sample correction.
double kolmogorov_pvalue(double d, std::size_t n);
TestResult ks_exponential(std::vector<double> samples, double rate);

// Goodness of fit against probabilities; bins with expected count below
// min_expected are pooled into one bin.
TestResult chi_square_gof(const std::vector<double>& observed, const std::vector<double>& probs,
                          double min_expected = 5.0);
// Homogeneity of two histograms over the same bins.
TestResult chi_square_two_sample(const std::vector<double>& a, const std::vector<double>& b);

struct Interval {
  double lo = 0;
  double hi = 1;
  bool contains(double x) const { return lo <= x && x <= hi; }
};
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence);
double normal_quantile(double p);

double total_variation(const std::vector<double>& a, const std::vector<double>& b);

struct Summary {
  std::size_t count = 0;
  double mean = 0;
  double variance = 0;
  double std_error = 0;
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;
};
Summary summarize(const std::vector<double>& xs);
double quantile(std::vector<double> xs, double q);

}  // namespace tamelevy
