#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace fvlab {

// Compensated (Kahan) accumulator for the long quadrature and occupation
// sums where plain summation would drift past the 1e-12 identities the
// test suite checks.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }
  void reset() { sum_ = 0.0; carry_ = 0.0; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double stderr_mean = 0.0;
};

inline SampleStats summarize_samples(std::span<const double> xs) {
  SampleStats s;
  s.n = xs.size();
  if (s.n == 0) return s;
  KahanSum acc;
  for (double x : xs) acc.add(x);
  s.mean = acc.value() / static_cast<double>(s.n);
  if (s.n > 1) {
    KahanSum sq;
    for (double x : xs) {
      const double d = x - s.mean;
      sq.add(d * d);
    }
    s.variance = sq.value() / static_cast<double>(s.n - 1);
    s.stderr_mean = std::sqrt(s.variance / static_cast<double>(s.n));
  }
  return s;
}

// z-score of mean against a target; 0/0 (exact match, zero spread) counts
// as z = 0 so degenerate-but-correct channels pass.
inline double z_score(const SampleStats& s, double target) {
  const double diff = s.mean - target;
  if (s.stderr_mean == 0.0) return diff == 0.0 ? 0.0 : HUGE_VAL;
  return diff / s.stderr_mean;
}

// Pearson correlation between paired samples.
inline double correlation(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) return 0.0;
  const SampleStats sx = summarize_samples(xs);
  const SampleStats sy = summarize_samples(ys);
  if (sx.variance == 0.0 || sy.variance == 0.0) return 0.0;
  KahanSum cov;
  for (std::size_t i = 0; i < n; ++i) cov.add((xs[i] - sx.mean) * (ys[i] - sy.mean));
  return cov.value() / (static_cast<double>(n - 1) * std::sqrt(sx.variance * sy.variance));
}

// Two-sample Kolmogorov-Smirnov test. Returns the KS statistic; the
// companion threshold gives the rejection level at significance p.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

inline double ks_threshold(std::size_t n, std::size_t m, double alpha = 1e-3) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt((static_cast<double>(n) + static_cast<double>(m)) /
                       (static_cast<double>(n) * static_cast<double>(m)));
}

}  // namespace fvlab
