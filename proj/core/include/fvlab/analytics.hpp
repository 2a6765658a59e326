#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "fvlab/schedule.hpp"
#include "fvlab/stable_motion.hpp"
#include "fvlab/test_function.hpp"

namespace fvlab {

// Controls the Fourier quadratures. extent = 0 picks the cutoff from the
// integrand decay automatically; grid_points applies to FFT fallbacks.
struct QuadratureSpec {
  double extent = 0.0;
  int grid_points = 4096;
  double tolerance = 1e-6;

  void validate() const;
};

// Transition density p_t(x) of the isotropic stable motion, by radial
// Fourier inversion of exp(-t |theta|^alpha). Supports dim 1..3.
double transition_density(const StableParams& params, double t, std::span<const double> x,
                          const QuadratureSpec& spec = {});

// Partial derivative d^k p_t(x). The imaginary part of the inversion
// integral is checked against the tolerance before being discarded.
double density_derivative(const StableParams& params, double t, std::span<const double> x,
                          const MultiIndex& k, const QuadratureSpec& spec = {});

// Moment constant (2 pi)^{-d} int exp(-|theta|^alpha) theta^k dtheta,
// exactly zero when any component of k is odd. Closed form via the
// angular-moment / radial-Gamma factorization.
double theta_const(const StableParams& params, const MultiIndex& k);

// T_t f(x) through the Fourier representation.
double semigroup_apply(const StableParams& params, double t, const TestFunction& f,
                       std::span<const double> x, const QuadratureSpec& spec = {});

// Cross-check route: direct convolution of f against the transition
// density (dim 1 only; quadrature over the support of f).
double semigroup_apply_convolution(const StableParams& params, double t, const TestFunction& f,
                                   double x, const QuadratureSpec& spec = {});

// The test function with Fourier data of T_s f (used to exercise the
// semigroup law without re-deriving closed forms).
TestFunction semigroup_evolve(const StableParams& params, double s, const TestFunction& f);

// The kernel itself as a test function: f = p_{t0}. Moments of order >= 2
// are infinite for alpha < 2 and reported as such.
TestFunction make_kernel_function(const StableParams& params, double t0);

// Finite-order expansion L_t f(x) = sum_{|k|<=N} ((-1)^{|k|}/k!) m_k(f) d^k p_t(x).
double expansion_apply(const StableParams& params, double t, const TestFunction& f, int order,
                       std::span<const double> x, const QuadratureSpec& spec = {});

// t^{(N+d)/alpha} sup_x |T_t f - L_t f| with the sup taken over the
// configured evaluation grid (2049 points per axis across
// [-10 t^{1/alpha}, 10 t^{1/alpha}]; radial grid when f is isotropic).
double expansion_error(const StableParams& params, double t, const TestFunction& f, int order,
                       const QuadratureSpec& spec = {});

// int_0^t T_s f(x) ds via the closed Fourier-side weight
// (1 - exp(-t r^alpha)) / r^alpha.
double integrated_semigroup(const StableParams& params, double t, const TestFunction& f,
                            std::span<const double> x, const QuadratureSpec& spec = {});

// Large-time limit of int_0^t T_s f(x) ds in high dimension (d > alpha):
// (2 pi)^{-d} int e^{i x theta} fhat(theta) |theta|^{-alpha} dtheta.
double integrated_semigroup_limit(const StableParams& params, const TestFunction& f,
                                  std::span<const double> x, const QuadratureSpec& spec = {});

// Occupation-time normalization: t^{1-d/alpha} (d < alpha), log(t v 1)
// (d = alpha), 1 (d > alpha).
double gamma_d(const StableParams& params, double t);

// Occupation limit constant; defined only for d <= alpha.
double kappa_d(const StableParams& params);

// Dimension-dependent norm gating the occupation results: ||f||_1 for
// d < alpha, ||f||_1 + int |fhat| |theta|^{-alpha} for d = alpha, and the
// integral alone for d > alpha. Divergence is reported as +infinity.
double norm_Nd(const StableParams& params, const TestFunction& f,
               const QuadratureSpec& spec = {});

enum class IntegrabilityVerdict { Pass, Fail, Inconclusive };

const char* to_string(IntegrabilityVerdict v);

// Numerically tests int_0^inf s^{p+1+eps} / phi(s) ds for convergence by
// dyadic-block tail-ratio analysis. Pass requires a certified geometric
// tail; Fail requires certified non-summability; anything else is
// Inconclusive. Requires p + 1 + eps >= 0.
IntegrabilityVerdict check_phi_integrability(const SamplingSchedule& schedule, double p,
                                             double eps);

// Writes the constants table as CSV with columns (d, alpha, k, value):
// theta^k rows for |k| <= max_order, a kappa row when d <= alpha, and one
// gamma row per requested time.
void emit_constants_csv(std::ostream& out, const StableParams& params, int max_order,
                        std::span<const double> gamma_times);

}  // namespace fvlab
