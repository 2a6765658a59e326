#pragma once

#include <functional>
#include <vector>

namespace fvlab {

// Fixed-order Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached rule of the given order (computed once via Newton iteration).
const GaussLegendreRule& gauss_legendre(int order);

// Composite Gauss-Legendre over [a, b] with `panels` equal panels.
double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        int panels, int order = 16);

// Composite rule with panels graded geometrically toward `a`; used for
// integrands with an integrable algebraic singularity at the left endpoint.
double integrate_graded(const std::function<double(double)>& f, double a, double b,
                        int levels, int panels_per_level = 4, int order = 16);

// Oscillation-aware semi-infinite integral of f against exp-decaying
// envelopes: integrates over [0, cutoff] with panel density proportional
// to `osc_rate` (radians per unit length of the integrand's oscillation).
double integrate_oscillatory(const std::function<double(double)>& f, double cutoff,
                             double osc_rate, int min_panels = 8, int order = 16);

// log Gamma convenience wrappers used by the closed-form moment formulas.
double gamma_ratio_exp(double log_num, double log_den);  // exp(log_num - log_den)

// Surface measure of the unit sphere in R^d.
double sphere_surface(int dim);

// Angular monomial moment over the unit sphere: \int_{S^{d-1}} w^k dsigma.
// Zero when any component of k is odd.
double sphere_monomial_moment(const std::vector<int>& k);

}  // namespace fvlab
