#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fvlab/rng.hpp"
#include "fvlab/stable_motion.hpp"
#include "fvlab/statistics.hpp"

using namespace fvlab;

namespace {

// One-sample KS distance against a reference CDF.
double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_one_sample_threshold(std::size_t n, double alpha = 1e-3) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

double normal_cdf(double x, double sd) { return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0))); }

struct CfEstimate {
  double real_mean;
  double imag_mean;
  double real_se;
};

CfEstimate empirical_cf(const std::vector<double>& xs, double theta) {
  KahanSum re, im, re2;
  for (double x : xs) {
    re.add(std::cos(theta * x));
    im.add(std::sin(theta * x));
  }
  const double n = static_cast<double>(xs.size());
  const double mean = re.value() / n;
  for (double x : xs) {
    const double d = std::cos(theta * x) - mean;
    re2.add(d * d);
  }
  return {mean, im.value() / n, std::sqrt(re2.value() / (n * (n - 1.0)))};
}

}  // namespace

TEST_CASE("one-dimensional stable draws match their characteristic function") {
  // |(1/M) sum e^{i theta X} - e^{-|theta|^alpha}| <= 4/sqrt(M).
  const std::vector<double> alphas = {0.5, 1.0, 1.5, 2.0};
  const std::vector<double> thetas = {0.5, 1.0, 2.0};
  const std::size_t m = 200000;
  for (double alpha : alphas) {
    RngStream rng(2024, 11);
    std::vector<double> xs(m);
    for (double& x : xs) x = sample_stable_1d(alpha, rng);
    for (double theta : thetas) {
      const CfEstimate cf = empirical_cf(xs, theta);
      const double target = std::exp(-std::pow(theta, alpha));
      const double bound = 4.0 / std::sqrt(static_cast<double>(m));
      CAPTURE(alpha);
      CAPTURE(theta);
      CHECK(std::abs(cf.real_mean - target) <= bound);
      CHECK(std::abs(cf.imag_mean) <= bound);
    }
  }
}

TEST_CASE("alpha=2 draws are centered Gaussian with variance 2") {
  RngStream rng(7, 0);
  const std::size_t m = 100000;
  std::vector<double> xs(m);
  for (double& x : xs) x = sample_stable_1d(2.0, rng);
  const double d = ks_one_sample(xs, [](double x) { return normal_cdf(x, std::sqrt(2.0)); });
  CHECK(d < ks_one_sample_threshold(m));
}

TEST_CASE("alpha=1 draws are standard Cauchy") {
  RngStream rng(7, 1);
  const std::size_t m = 100000;
  std::vector<double> xs(m);
  for (double& x : xs) x = sample_stable_1d(1.0, rng);
  const double d =
      ks_one_sample(xs, [](double x) { return 0.5 + std::atan(x) / M_PI; });
  CHECK(d < ks_one_sample_threshold(m));
}

TEST_CASE("alpha=0.7 empirical characteristic function at theta=1") {
  RngStream rng(100, 3);
  const std::size_t m = 1000000;
  std::vector<double> xs(m);
  for (double& x : xs) x = sample_stable_1d(0.7, rng);
  const CfEstimate cf = empirical_cf(xs, 1.0);
  CHECK(std::abs(cf.real_mean - std::exp(-1.0)) <= 3.0 * cf.real_se);
}

TEST_CASE("stable sampler rejects alpha outside (0,2]") {
  RngStream rng(1, 1);
  CHECK_THROWS_AS(sample_stable_1d(0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_stable_1d(2.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_stable_1d(-1.0, rng), std::invalid_argument);
}

TEST_CASE("subordinator at sigma=1/2 matches the closed-form law") {
  // Density (1/(2 sqrt(pi))) u^{-3/2} exp(-1/(4u)); CDF erfc(1/(2 sqrt(u))).
  RngStream rng(42, 5);
  const std::size_t m = 100000;
  std::vector<double> xs(m);
  for (double& x : xs) x = sample_subordinator(0.5, 1.0, rng);
  for (double x : xs) REQUIRE(x > 0.0);
  const double d =
      ks_one_sample(xs, [](double u) { return std::erfc(1.0 / (2.0 * std::sqrt(u))); });
  CHECK(d < ks_one_sample_threshold(m));
}

TEST_CASE("subordinator empirical Laplace transform") {
  // sigma=0.9, t=2: E exp(-S) = exp(-2).
  RngStream rng(42, 6);
  const std::size_t m = 1000000;
  KahanSum acc, acc2;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = std::exp(-sample_subordinator(0.9, 2.0, rng));
    acc.add(v);
    acc2.add(v * v);
  }
  const double mean = acc.value() / m;
  const double var = (acc2.value() - m * mean * mean) / (m - 1.0);
  const double se = std::sqrt(var / m);
  CHECK(std::abs(mean - std::exp(-2.0)) <= 3.0 * se);
}

TEST_CASE("subordinator rejects bad parameters") {
  RngStream rng(3, 3);
  CHECK_THROWS_AS(sample_subordinator(1.0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_subordinator(0.0, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_subordinator(0.5, 0.0, rng), std::invalid_argument);
}

TEST_CASE("isotropic increments: Gaussian case factorizes per coordinate") {
  RngStream rng(9, 2);
  const StableParams params{2.0, 3};
  const double dt = 0.7;
  const std::size_t m = 50000;
  std::vector<double> coord0(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = sample_isotropic_increment(params, dt, rng);
    coord0[i] = x[0];
  }
  const double sd = std::sqrt(2.0 * dt);
  const double d = ks_one_sample(coord0, [sd](double x) { return normal_cdf(x, sd); });
  CHECK(d < ks_one_sample_threshold(m));
}

TEST_CASE("isotropic increments: d=2 alpha=1 characteristic function") {
  RngStream rng(9, 3);
  const StableParams params{1.0, 2};
  const std::size_t m = 1000000;
  KahanSum re, re2;
  std::vector<double> projections(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = sample_isotropic_increment(params, 1.0, rng);
    projections[i] = x[0];  // theta = (1, 0), |theta| = 1
  }
  const CfEstimate cf = empirical_cf(projections, 1.0);
  CHECK(std::abs(cf.real_mean - std::exp(-1.0)) <= 3.0 * cf.real_se);
}

TEST_CASE("isotropic increments are rotation invariant") {
  const StableParams params{1.3, 2};
  const std::size_t m = 60000;
  const double c = std::cos(0.5);
  const double s = std::sin(0.5);
  RngStream rng_a(17, 0), rng_b(17, 1);
  std::vector<double> plain(m), rotated(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = sample_isotropic_increment(params, 1.0, rng_a);
    plain[i] = x[0];
    const auto y = sample_isotropic_increment(params, 1.0, rng_b);
    rotated[i] = c * y[0] - s * y[1];
  }
  CHECK(ks_two_sample(plain, rotated) < ks_threshold(m, m));
}

TEST_CASE("isotropic sampler output is symmetric") {
  const StableParams params{0.8, 1};
  const std::size_t m = 60000;
  RngStream rng_a(23, 0), rng_b(23, 1);
  std::vector<double> xs(m), negs(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = sample_isotropic_increment(params, 1.0, rng_a)[0];
    negs[i] = -sample_isotropic_increment(params, 1.0, rng_b)[0];
  }
  CHECK(ks_two_sample(xs, negs) < ks_threshold(m, m));
}

TEST_CASE("increment additivity over adjacent intervals") {
  const StableParams params{0.8, 1};
  const std::size_t m = 60000;
  RngStream rng_a(29, 0), rng_b(29, 1);
  std::vector<double> split(m), whole(m);
  for (std::size_t i = 0; i < m; ++i) {
    split[i] = sample_isotropic_increment(params, 0.4, rng_a)[0] +
               sample_isotropic_increment(params, 0.6, rng_a)[0];
    whole[i] = sample_isotropic_increment(params, 1.0, rng_b)[0];
  }
  CHECK(ks_two_sample(split, whole) < ks_threshold(m, m));
}

TEST_CASE("sampler rejects non-positive dt") {
  RngStream rng(5, 5);
  const StableParams params{1.5, 2};
  CHECK_THROWS_AS(sample_isotropic_increment(params, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_isotropic_increment(params, -1.0, rng), std::invalid_argument);
}

TEST_CASE("simulate_path on the trivial grid returns the start point") {
  RngStream rng(31, 0);
  const StableParams params{1.5, 2};
  const PathGrid path = simulate_path(params, {0.0}, {1.0, -2.0}, rng);
  REQUIRE(path.times.size() == 1);
  CHECK(path.point(0)[0] == 1.0);
  CHECK(path.point(0)[1] == -2.0);
}

TEST_CASE("simulate_path rejects malformed grids") {
  RngStream rng(31, 1);
  const StableParams params{1.5, 1};
  CHECK_THROWS_AS(simulate_path(params, {0.0, 1.0, 1.0}, {0.0}, rng), std::invalid_argument);
  CHECK_THROWS_AS(simulate_path(params, {0.5, 1.0}, {0.0}, rng), std::invalid_argument);
  CHECK_THROWS_AS(simulate_path(params, {}, {0.0}, rng), std::invalid_argument);
}

TEST_CASE("path self-similarity: X_t - X_0 vs t^{1/alpha} (X_1 - X_0)") {
  const StableParams params{1.5, 1};
  const double t = 4.0;
  const std::size_t m = 40000;
  RngStream rng_a(37, 0), rng_b(37, 1);
  std::vector<double> at_t(m), scaled(m);
  for (std::size_t i = 0; i < m; ++i) {
    const PathGrid p1 = simulate_path(params, {0.0, t}, {0.0}, rng_a);
    at_t[i] = p1.point(1)[0];
    const PathGrid p2 = simulate_path(params, {0.0, 1.0}, {0.0}, rng_b);
    scaled[i] = std::pow(t, 1.0 / params.alpha) * p2.point(1)[0];
  }
  CHECK(ks_two_sample(at_t, scaled) < ks_threshold(m, m));
}

TEST_CASE("Gaussian path quadratic variation is 2 per unit time") {
  const StableParams params{2.0, 1};
  const int steps = 4096;
  std::vector<double> grid(steps + 1);
  for (int i = 0; i <= steps; ++i) grid[i] = static_cast<double>(i) / steps;
  RngStream rng(41, 0);
  const PathGrid path = simulate_path(params, grid, {0.0}, rng);
  double qv = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double d = path.point(i + 1)[0] - path.point(i)[0];
    qv += d * d;
  }
  // Var of the realized QV is 8/steps; allow 5 sigma.
  CHECK(std::abs(qv - 2.0) < 5.0 * std::sqrt(8.0 / steps));
}

TEST_CASE("identical streams reproduce bit-identical paths") {
  const StableParams params{1.2, 3};
  std::vector<double> grid = {0.0, 0.5, 1.25, 2.0};
  RngStream rng_a(99, 7), rng_b(99, 7), rng_c(99, 8);
  const PathGrid a = simulate_path(params, grid, {0.0, 0.0, 0.0}, rng_a);
  const PathGrid b = simulate_path(params, grid, {0.0, 0.0, 0.0}, rng_b);
  const PathGrid c = simulate_path(params, grid, {0.0, 0.0, 0.0}, rng_c);
  CHECK(a.positions == b.positions);
  CHECK(a.positions != c.positions);
}
