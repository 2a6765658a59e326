#include "fvlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace fvlab {

namespace {

GaussLegendreRule compute_rule(int order) {
  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev initial guess, Newton refinement on P_order.
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= order; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
  return it->second;
}

double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        int panels, int order) {
  if (panels < 1) throw std::invalid_argument("integrate_panels: panels < 1");
  const GaussLegendreRule& rule = gauss_legendre(order);
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    double acc = 0.0;
    for (int i = 0; i < order; ++i) acc += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    total += acc * 0.5 * h;
  }
  return total;
}

double integrate_graded(const std::function<double(double)>& f, double a, double b,
                        int levels, int panels_per_level, int order) {
  if (b <= a) return 0.0;
  // Geometric subdivision [a + (b-a)/2^{j+1}, a + (b-a)/2^j].
  double total = 0.0;
  double hi = b;
  for (int j = 0; j < levels; ++j) {
    const double lo = a + (b - a) * std::ldexp(1.0, -(j + 1));
    total += integrate_panels(f, lo, hi, panels_per_level, order);
    hi = lo;
  }
  total += integrate_panels(f, a, hi, panels_per_level, order);
  return total;
}

double integrate_oscillatory(const std::function<double(double)>& f, double cutoff,
                             double osc_rate, int min_panels, int order) {
  // At least two panels per oscillation period.
  const double periods = std::abs(osc_rate) * cutoff / (2.0 * M_PI);
  int panels = min_panels + static_cast<int>(std::ceil(2.0 * periods));
  if (panels > 200000) {
    throw std::invalid_argument("integrate_oscillatory: oscillation count too large");
  }
  return integrate_panels(f, 0.0, cutoff, panels, order);
}

double gamma_ratio_exp(double log_num, double log_den) {
  return std::exp(log_num - log_den);
}

double sphere_surface(int dim) {
  // 2 pi^{d/2} / Gamma(d/2)
  return 2.0 * std::exp(0.5 * dim * std::log(M_PI) - std::lgamma(0.5 * dim));
}

double sphere_monomial_moment(const std::vector<int>& k) {
  int total = 0;
  for (int ki : k) {
    if (ki < 0) throw std::invalid_argument("sphere_monomial_moment: negative index");
    if (ki % 2 == 1) return 0.0;
    total += ki;
  }
  const int d = static_cast<int>(k.size());
  // 2 prod Gamma((k_i+1)/2) / Gamma((|k|+d)/2), valid for even k.
  double log_num = 0.0;
  for (int ki : k) log_num += std::lgamma(0.5 * (ki + 1));
  const double log_den = std::lgamma(0.5 * (total + d));
  return 2.0 * std::exp(log_num - log_den);
}

}  // namespace fvlab
