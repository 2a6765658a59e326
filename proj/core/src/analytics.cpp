#include "fvlab/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "fvlab/fft.hpp"
#include "fvlab/quadrature.hpp"

namespace fvlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Radius beyond which exp(-t r^alpha) r^m is below ~1e-18.
double decay_cutoff(double t, double alpha, double poly_power) {
  double r = std::pow(45.0 / t, 1.0 / alpha);
  for (int i = 0; i < 4; ++i) {
    const double target = 42.0 + poly_power * std::max(0.0, std::log(r));
    r = std::pow(target / t, 1.0 / alpha);
  }
  return r;
}

// (2 pi)^{-d} int_{R^d} h(|theta|) e^{i x.theta} dtheta at |x| = s, d <= 3.
double radial_fourier_inverse(int dim, const std::function<double(double)>& h, double s,
                              double cutoff) {
  switch (dim) {
    case 1: {
      auto g = [&](double r) { return h(r) * std::cos(r * s); };
      return integrate_oscillatory(g, cutoff, s) / M_PI;
    }
    case 2: {
      auto g = [&](double r) { return h(r) * std::cyl_bessel_j(0.0, r * s) * r; };
      return integrate_oscillatory(g, cutoff, s) / (2.0 * M_PI);
    }
    case 3: {
      if (s == 0.0) {
        auto g = [&](double r) { return h(r) * r * r; };
        return integrate_oscillatory(g, cutoff, 0.0) / (2.0 * M_PI * M_PI);
      }
      auto g = [&](double r) { return h(r) * std::sin(r * s) * r; };
      return integrate_oscillatory(g, cutoff, s) / (2.0 * M_PI * M_PI * s);
    }
    default:
      throw std::invalid_argument("radial Fourier inversion supports dim 1..3");
  }
}

// Complex line integral (2 pi)^{-1} int_{-R}^{R} g(theta) e^{i x theta} dtheta.
std::complex<double> line_fourier_inverse(const std::function<std::complex<double>(double)>& g,
                                          double x, double cutoff) {
  const double periods = std::abs(x) * cutoff / M_PI;
  const int panels = 16 + static_cast<int>(std::ceil(periods));
  const GaussLegendreRule& rule = gauss_legendre(16);
  const double h = 2.0 * cutoff / panels;
  std::complex<double> total(0.0, 0.0);
  for (int p = 0; p < panels; ++p) {
    const double lo = -cutoff + p * h;
    const double mid = lo + 0.5 * h;
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double th = mid + 0.5 * h * rule.nodes[i];
      acc += rule.weights[i] * g(th) * std::exp(std::complex<double>(0.0, x * th));
    }
    total += acc * (0.5 * h);
  }
  return total / (2.0 * M_PI);
}

std::vector<MultiIndex> enumerate_multi_indices(int dim, int max_order) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(dim, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == dim - 1) {
      for (int v = 0; v <= remaining; ++v) {
        cur[pos] = v;
        out.push_back(MultiIndex(cur));
      }
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      cur[pos] = v;
      rec(pos + 1, remaining - v);
    }
  };
  rec(0, max_order);
  return out;
}

// Taylor polynomial of fhat about 0 through total order N, evaluated at a
// radial argument (isotropic f): sum_j (-1)^j m_{(2j,0,..)} / (2j)! r^{2j}.
std::vector<double> radial_taylor_coeffs(const TestFunction& f, int order) {
  std::vector<double> coeffs;
  for (int j = 0; 2 * j <= order; ++j) {
    std::vector<int> k(f.dim(), 0);
    k[0] = 2 * j;
    const MultiIndex mi(k);
    const double m = f.moment(mi);
    if (!std::isfinite(m)) {
      throw std::invalid_argument("expansion: divergent moment of order " +
                                  std::to_string(2 * j));
    }
    coeffs.push_back(((j % 2 == 0) ? 1.0 : -1.0) * m / mi.factorial());
  }
  return coeffs;
}

double eval_poly_even(const std::vector<double>& coeffs, double r) {
  const double r2 = r * r;
  double acc = 0.0;
  for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * r2 + coeffs[j];
  return acc;
}

// Taylor polynomial of fhat about 0 through total order N at a general
// theta (complex, for non-isotropic f in dim 1).
std::complex<double> fourier_taylor(const TestFunction& f, int order, double theta) {
  std::complex<double> acc(0.0, 0.0);
  for (int m = 0; m <= order; ++m) {
    const MultiIndex mi({m});
    const double mom = f.moment(mi);
    if (!std::isfinite(mom)) {
      throw std::invalid_argument("expansion: divergent moment of order " + std::to_string(m));
    }
    if (mom == 0.0) continue;
    // d^m fhat(0) = (-i)^m mom
    std::complex<double> im(1.0, 0.0);
    switch (m % 4) {
      case 1: im = {0.0, -1.0}; break;
      case 2: im = {-1.0, 0.0}; break;
      case 3: im = {0.0, 1.0}; break;
      default: break;
    }
    acc += im * (mom / mi.factorial()) * std::pow(theta, m);
  }
  return acc;
}

void check_imag(double imag, double real, double tol, const char* where) {
  if (std::abs(imag) > tol * (1.0 + std::abs(real))) {
    throw std::runtime_error(std::string(where) +
                             ": imaginary residual above tolerance, got " + std::to_string(imag));
  }
}

double require_time_positive(double t, const char* op) {
  if (!(t > 0.0)) throw std::invalid_argument(std::string(op) + ": t must be > 0");
  return t;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (extent < 0.0) throw std::invalid_argument("QuadratureSpec: extent must be >= 0");
  if (grid_points <= 0 || !is_power_of_two(static_cast<std::size_t>(grid_points))) {
    throw std::invalid_argument("QuadratureSpec: grid_points must be a power of two");
  }
  if (!(tolerance > 0.0)) throw std::invalid_argument("QuadratureSpec: tolerance must be > 0");
}

double transition_density(const StableParams& params, double t, std::span<const double> x,
                          const QuadratureSpec& spec) {
  params.validate();
  spec.validate();
  require_time_positive(t, "transition_density");
  if (x.size() != static_cast<std::size_t>(params.dim)) {
    throw std::invalid_argument("transition_density: x has wrong dimension");
  }
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  const double cutoff =
      spec.extent > 0.0 ? spec.extent : decay_cutoff(t, alpha, params.dim - 1);
  auto h = [t, alpha](double r) { return std::exp(-t * std::pow(r, alpha)); };
  return radial_fourier_inverse(params.dim, h, norm2(x), cutoff);
}

double density_derivative(const StableParams& params, double t, std::span<const double> x,
                          const MultiIndex& k, const QuadratureSpec& spec) {
  params.validate();
  spec.validate();
  require_time_positive(t, "density_derivative");
  if (k.dim() != params.dim || x.size() != static_cast<std::size_t>(params.dim)) {
    throw std::invalid_argument("density_derivative: dimension mismatch");
  }
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  const int order = k.order();
  const double s = norm2(x);

  if (s == 0.0) {
    // Closed form via the angular-moment / radial-Gamma factorization.
    if (k.any_odd()) return 0.0;
    const double ang = sphere_monomial_moment(k.k);
    const double radial = std::exp(std::lgamma((order + params.dim) / alpha)) / alpha *
                          std::pow(t, -(order + params.dim) / alpha);
    const double sign = (order / 2) % 2 == 0 ? 1.0 : -1.0;
    return sign * std::pow(2.0 * M_PI, -params.dim) * ang * radial;
  }

  if (params.dim == 1) {
    const double cutoff = spec.extent > 0.0 ? spec.extent : decay_cutoff(t, alpha, order);
    const double phase = order * M_PI / 2.0;
    const double x0 = x[0];
    auto g = [&](double r) {
      return std::pow(r, order) * std::exp(-t * std::pow(r, alpha)) * std::cos(r * x0 + phase);
    };
    return integrate_oscillatory(g, cutoff, std::abs(x0)) / M_PI;
  }

  if (params.dim == 2) {
    // Tensor Gauss-Legendre over [-R, R]^2 of
    // theta^k exp(-t |theta|^alpha) cos(x.theta + |k| pi/2) / (2 pi)^2.
    const double cutoff = spec.extent > 0.0 ? spec.extent : decay_cutoff(t, alpha, order + 1);
    const double phase = order * M_PI / 2.0;
    const GaussLegendreRule& rule = gauss_legendre(16);
    const int panels0 = 12 + static_cast<int>(std::ceil(cutoff * std::abs(x[0]) / M_PI));
    const int panels1 = 12 + static_cast<int>(std::ceil(cutoff * std::abs(x[1]) / M_PI));
    if (static_cast<long>(panels0) * panels1 > 400000L) {
      throw std::invalid_argument("density_derivative: oscillation count too large in dim 2");
    }
    std::vector<double> nodes0, w0, nodes1, w1;
    auto fill = [&](int panels, std::vector<double>& nodes, std::vector<double>& ws) {
      const double h = 2.0 * cutoff / panels;
      for (int p = 0; p < panels; ++p) {
        const double mid = -cutoff + (p + 0.5) * h;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
          nodes.push_back(mid + 0.5 * h * rule.nodes[i]);
          ws.push_back(rule.weights[i] * 0.5 * h);
        }
      }
    };
    fill(panels0, nodes0, w0);
    fill(panels1, nodes1, w1);
    double total = 0.0;
    for (std::size_t i = 0; i < nodes0.size(); ++i) {
      const double th0 = nodes0[i];
      const double p0 = std::pow(th0, k.k[0]);
      double inner = 0.0;
      for (std::size_t j = 0; j < nodes1.size(); ++j) {
        const double th1 = nodes1[j];
        const double r = std::sqrt(th0 * th0 + th1 * th1);
        inner += w1[j] * std::pow(th1, k.k[1]) * std::exp(-t * std::pow(r, alpha)) *
                 std::cos(x[0] * th0 + x[1] * th1 + phase);
      }
      total += w0[i] * p0 * inner;
    }
    return total / (4.0 * M_PI * M_PI);
  }

  if (order == 0) return transition_density(params, t, x, spec);
  throw std::invalid_argument(
      "density_derivative: general-x derivatives are supported for dim <= 2");
}

double theta_const(const StableParams& params, const MultiIndex& k) {
  params.validate();
  if (k.dim() != params.dim) throw std::invalid_argument("theta_const: dimension mismatch");
  if (k.any_odd()) return 0.0;
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  const int order = k.order();
  const double ang = sphere_monomial_moment(k.k);
  const double radial = std::exp(std::lgamma((order + params.dim) / alpha)) / alpha;
  return std::pow(2.0 * M_PI, -params.dim) * ang * radial;
}

double semigroup_apply(const StableParams& params, double t, const TestFunction& f,
                       std::span<const double> x, const QuadratureSpec& spec) {
  params.validate();
  spec.validate();
  require_time_positive(t, "semigroup_apply");
  if (f.dim() != params.dim || x.size() != static_cast<std::size_t>(params.dim)) {
    throw std::invalid_argument("semigroup_apply: dimension mismatch");
  }
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  const double kernel_cut = decay_cutoff(t, alpha, params.dim - 1);
  const double f_cut = f.fourier_extent(1e-18);
  const double cutoff = spec.extent > 0.0 ? spec.extent : std::min(kernel_cut, f_cut);

  if (params.dim == 1) {
    auto g = [&](double th) {
      return f.fourier(std::span<const double>(&th, 1)) *
             std::exp(-t * std::pow(std::abs(th), alpha));
    };
    const std::complex<double> v = line_fourier_inverse(g, x[0], cutoff);
    check_imag(v.imag(), v.real(), spec.tolerance, "semigroup_apply");
    return v.real();
  }
  if (!f.isotropic()) {
    throw std::invalid_argument("semigroup_apply: non-isotropic f requires dim 1");
  }
  auto h = [&](double r) { return f.fourier_radial(r) * std::exp(-t * std::pow(r, alpha)); };
  return radial_fourier_inverse(params.dim, h, norm2(x), cutoff);
}

double semigroup_apply_convolution(const StableParams& params, double t, const TestFunction& f,
                                   double x, const QuadratureSpec& spec) {
  params.validate();
  require_time_positive(t, "semigroup_apply_convolution");
  if (params.dim != 1 || f.dim() != 1) {
    throw std::invalid_argument("semigroup_apply_convolution: dim 1 only");
  }
  const double r = f.support_radius();
  auto g = [&](double y) {
    const double d = x - y;
    return transition_density(params, t, std::span<const double>(&d, 1), spec) *
           f.evaluate1(y);
  };
  return integrate_panels(g, -r, r, 96);
}

TestFunction semigroup_evolve(const StableParams& params, double s, const TestFunction& f) {
  params.validate();
  require_time_positive(s, "semigroup_evolve");
  if (!f.isotropic() && params.dim > 1) {
    throw std::invalid_argument("semigroup_evolve: non-isotropic f requires dim 1");
  }
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  const StableParams p = params;
  TestFunction base = f;
  auto eval = [p, s, base](std::span<const double> x) {
    return semigroup_apply(p, s, base, x);
  };
  auto four = [s, alpha, base](std::span<const double> th) {
    double r = 0.0;
    for (double v : th) r += v * v;
    r = std::sqrt(r);
    return base.fourier(th) * std::exp(-s * std::pow(r, alpha));
  };
  std::function<double(double)> rad;
  if (f.isotropic()) {
    rad = [s, alpha, base](double r) {
      return base.fourier_radial(r) * std::exp(-s * std::pow(r, alpha));
    };
  }
  auto extent = [base](double eps) { return base.fourier_extent(eps); };
  return TestFunction::from_fourier(f.dim(), f.isotropic(), std::move(eval), std::move(four),
                                    std::move(rad), std::move(extent),
                                    "evolved(" + f.label() + ")");
}

TestFunction make_kernel_function(const StableParams& params, double t0) {
  params.validate();
  require_time_positive(t0, "make_kernel_function");
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  const StableParams p = params;
  auto eval = [p, t0](std::span<const double> x) { return transition_density(p, t0, x); };
  auto rad = [t0, alpha](double r) { return std::exp(-t0 * std::pow(r, alpha)); };
  auto four = [rad](std::span<const double> th) {
    double r = 0.0;
    for (double v : th) r += v * v;
    return std::complex<double>(rad(std::sqrt(r)), 0.0);
  };
  auto extent = [t0, alpha](double eps) {
    return std::pow(std::log(1.0 / eps) / t0, 1.0 / alpha);
  };
  auto moment = [p, t0, alpha](const MultiIndex& k) -> double {
    if (k.any_odd()) return 0.0;
    if (k.order() == 0) return 1.0;
    if (alpha < 2.0) return kInf;  // heavy tails: moments of order >= alpha diverge
    double m = 1.0;
    const double w = std::sqrt(2.0 * t0);  // per-coordinate variance 2 t0
    for (int ki : k.k) {
      double dfact = 1.0;
      for (int j = ki - 1; j >= 1; j -= 2) dfact *= j;
      m *= std::pow(w, ki) * dfact;
    }
    return m;
  };
  TestFunction g = TestFunction::from_fourier(params.dim, true, std::move(eval),
                                              std::move(four), std::move(rad),
                                              std::move(extent), "stable-kernel");
  g = TestFunction::with_moments(std::move(g), std::move(moment));
  const std::vector<double> zero(params.dim, 0.0);
  const double sup = transition_density(params, t0, zero);
  const double l2 = std::sqrt(transition_density(params, 2.0 * t0, zero));
  return TestFunction::with_norms(std::move(g), 1.0, l2, sup);
}

double expansion_apply(const StableParams& params, double t, const TestFunction& f, int order,
                       std::span<const double> x, const QuadratureSpec& spec) {
  params.validate();
  spec.validate();
  require_time_positive(t, "expansion_apply");
  if (order < 0) throw std::invalid_argument("expansion_apply: order must be >= 0");
  if (f.dim() != params.dim || x.size() != static_cast<std::size_t>(params.dim)) {
    throw std::invalid_argument("expansion_apply: dimension mismatch");
  }
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;

  if (f.isotropic() && params.dim >= 2) {
    const auto coeffs = radial_taylor_coeffs(f, order);
    const double cutoff = decay_cutoff(t, alpha, params.dim - 1 + order);
    auto h = [&](double r) {
      return eval_poly_even(coeffs, r) * std::exp(-t * std::pow(r, alpha));
    };
    return radial_fourier_inverse(params.dim, h, norm2(x), cutoff);
  }

  double total = 0.0;
  for (const MultiIndex& k : enumerate_multi_indices(params.dim, order)) {
    const double m = f.moment(k);
    if (!std::isfinite(m)) {
      throw std::invalid_argument("expansion_apply: divergent moment at order " +
                                  std::to_string(k.order()));
    }
    if (m == 0.0) continue;
    const double sign = k.order() % 2 == 0 ? 1.0 : -1.0;
    total += sign * m / k.factorial() * density_derivative(params, t, x, k, spec);
  }
  return total;
}

double expansion_error(const StableParams& params, double t, const TestFunction& f, int order,
                       const QuadratureSpec& spec) {
  params.validate();
  spec.validate();
  require_time_positive(t, "expansion_error");
  if (params.dim > 2 && !f.isotropic()) {
    throw std::invalid_argument("expansion_error: sup grids support dim <= 2");
  }
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  const double half_extent = 10.0 * std::pow(t, 1.0 / alpha);
  const double cutoff = decay_cutoff(t, alpha, params.dim - 1 + order);

  double sup = 0.0;
  if (f.isotropic()) {
    // The residual is isotropic, so scan radii only. 1025 radii across
    // [0, 10 t^{1/alpha}] matches the 2049-point symmetric axis grid.
    const auto coeffs = radial_taylor_coeffs(f, order);
    auto h = [&](double r) {
      return (f.fourier_radial(r) - eval_poly_even(coeffs, r)) *
             std::exp(-t * std::pow(r, alpha));
    };
    const int n = 1024;
    for (int i = 0; i <= n; ++i) {
      const double s = half_extent * static_cast<double>(i) / n;
      sup = std::max(sup, std::abs(radial_fourier_inverse(params.dim, h, s, cutoff)));
    }
  } else {
    if (params.dim != 1) {
      throw std::invalid_argument("expansion_error: non-isotropic f requires dim 1");
    }
    auto g = [&](double th) {
      return (f.fourier(std::span<const double>(&th, 1)) - fourier_taylor(f, order, th)) *
             std::exp(-t * std::pow(std::abs(th), alpha));
    };
    const int n = 2048;
    for (int i = 0; i <= n; ++i) {
      const double xg = -half_extent + 2.0 * half_extent * static_cast<double>(i) / n;
      const std::complex<double> v = line_fourier_inverse(g, xg, cutoff);
      sup = std::max(sup, std::abs(v.real()));
    }
  }
  return std::pow(t, (order + params.dim) / alpha) * sup;
}

double integrated_semigroup(const StableParams& params, double t, const TestFunction& f,
                            std::span<const double> x, const QuadratureSpec& spec) {
  params.validate();
  spec.validate();
  if (t < 0.0) throw std::invalid_argument("integrated_semigroup: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (f.dim() != params.dim || x.size() != static_cast<std::size_t>(params.dim)) {
    throw std::invalid_argument("integrated_semigroup: dimension mismatch");
  }
  if (!std::isfinite(norm_Nd(params, f, spec))) {
    throw std::invalid_argument("integrated_semigroup: norm_Nd(f) diverges");
  }
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  auto weight = [t, alpha](double r) -> double {
    if (r == 0.0) return t;
    const double u = t * std::pow(r, alpha);
    return -std::expm1(-u) / std::pow(r, alpha);
  };
  const double cutoff = std::min(f.fourier_extent(1e-3 * spec.tolerance), 1e6);

  if (params.dim == 1) {
    auto g = [&](double th) {
      return f.fourier(std::span<const double>(&th, 1)) * weight(std::abs(th));
    };
    const std::complex<double> v = line_fourier_inverse(g, x[0], cutoff);
    check_imag(v.imag(), v.real(), spec.tolerance, "integrated_semigroup");
    return v.real();
  }
  if (!f.isotropic()) {
    throw std::invalid_argument("integrated_semigroup: non-isotropic f requires dim 1");
  }
  auto h = [&](double r) { return f.fourier_radial(r) * weight(r); };
  return radial_fourier_inverse(params.dim, h, norm2(x), cutoff);
}

double integrated_semigroup_limit(const StableParams& params, const TestFunction& f,
                                  std::span<const double> x, const QuadratureSpec& spec) {
  params.validate();
  spec.validate();
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  if (!(params.dim > alpha)) {
    throw std::invalid_argument("integrated_semigroup_limit: requires d > alpha");
  }
  const double cutoff = std::min(f.fourier_extent(1e-3 * spec.tolerance), 1e6);
  const double s = norm2(x);
  if (params.dim == 1) {
    // d = 1 > alpha: integrable singularity |theta|^{-alpha} at 0.
    auto g = [&](double th) -> double {
      const double a = std::abs(th);
      const std::complex<double> fh = f.fourier(std::span<const double>(&th, 1));
      return (fh * std::exp(std::complex<double>(0.0, x[0] * th))).real() *
             std::pow(a, -alpha);
    };
    auto pos = [&](double r) { return g(r) + g(-r); };
    return integrate_graded(pos, 0.0, cutoff, 45, 4) / (2.0 * M_PI);
  }
  if (!f.isotropic()) {
    throw std::invalid_argument("integrated_semigroup_limit: non-isotropic f requires dim 1");
  }
  auto h = [&](double r) { return f.fourier_radial(r) * std::pow(r, -alpha); };
  // Graded toward 0 to resolve r^{d-1-alpha}; the oscillatory factor is
  // handled by the panel density of the outer layers.
  switch (params.dim) {
    case 2: {
      auto g = [&](double r) { return h(r) * std::cyl_bessel_j(0.0, r * s) * r; };
      return integrate_graded(g, 0.0, cutoff, 45, std::max(4, static_cast<int>(cutoff * s / 8.0) + 4)) /
             (2.0 * M_PI);
    }
    case 3: {
      if (s == 0.0) {
        auto g = [&](double r) { return h(r) * r * r; };
        return integrate_graded(g, 0.0, cutoff, 45, 4) / (2.0 * M_PI * M_PI);
      }
      auto g = [&](double r) { return h(r) * std::sin(r * s) * r; };
      return integrate_graded(g, 0.0, cutoff, 45, std::max(4, static_cast<int>(cutoff * s / 8.0) + 4)) /
             (2.0 * M_PI * M_PI * s);
    }
    default:
      throw std::invalid_argument("integrated_semigroup_limit: dim 1..3");
  }
}

double gamma_d(const StableParams& params, double t) {
  params.validate();
  if (t < 0.0) throw std::invalid_argument("gamma_d: t must be >= 0");
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  const double d = static_cast<double>(params.dim);
  if (d < alpha) return std::pow(t, 1.0 - d / alpha);
  if (d == alpha) return std::log(std::max(t, 1.0));
  return 1.0;
}

double kappa_d(const StableParams& params) {
  params.validate();
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  const double d = static_cast<double>(params.dim);
  if (d > alpha) {
    throw std::invalid_argument("kappa_d: undefined for d > alpha");
  }
  // (2 pi)^{-d} int exp(-|theta|^alpha) dtheta = theta_const at k = 0.
  const double base = theta_const(params, MultiIndex(std::vector<int>(params.dim, 0)));
  if (d == alpha) return base;
  return alpha / (alpha - d) * base;
}

double norm_Nd(const StableParams& params, const TestFunction& f, const QuadratureSpec& spec) {
  params.validate();
  spec.validate();
  if (f.dim() != params.dim) throw std::invalid_argument("norm_Nd: dimension mismatch");
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  const double d = static_cast<double>(params.dim);
  if (d < alpha) return f.l1_norm();

  // int |fhat(theta)| |theta|^{-alpha} dtheta. At the critical dimension the
  // integrand behaves like |fhat(0)| r^{-1} near zero, which diverges
  // logarithmically unless fhat(0) = 0.
  double fhat0;
  if (f.isotropic()) {
    fhat0 = std::abs(f.fourier_radial(0.0));
  } else {
    std::vector<double> zero(params.dim, 0.0);
    fhat0 = std::abs(f.fourier(zero));
  }
  const double scale = std::isfinite(f.l1_norm()) ? f.l1_norm() : 1.0;
  if (d == alpha && fhat0 > 1e-12 * (1.0 + scale)) return kInf;

  const double cutoff = std::min(f.fourier_extent(1e-4 * spec.tolerance), 1e6);
  double integral;
  if (params.dim == 1) {
    auto g = [&](double r) -> double {
      double plus, minus;
      {
        const double th = r;
        plus = std::abs(f.fourier(std::span<const double>(&th, 1)));
      }
      {
        const double th = -r;
        minus = std::abs(f.fourier(std::span<const double>(&th, 1)));
      }
      return (plus + minus) * std::pow(r, -alpha);
    };
    integral = integrate_graded(g, 0.0, cutoff, 45, 4);
  } else {
    if (!f.isotropic()) {
      throw std::invalid_argument("norm_Nd: non-isotropic f requires dim 1");
    }
    auto g = [&](double r) {
      return std::abs(f.fourier_radial(r)) * std::pow(r, d - 1.0 - alpha);
    };
    integral = sphere_surface(params.dim) * integrate_graded(g, 0.0, cutoff, 45, 4);
  }
  if (d == alpha) return f.l1_norm() + integral;
  return integral;
}

const char* to_string(IntegrabilityVerdict v) {
  switch (v) {
    case IntegrabilityVerdict::Pass:
      return "pass";
    case IntegrabilityVerdict::Fail:
      return "fail";
    default:
      return "inconclusive";
  }
}

IntegrabilityVerdict check_phi_integrability(const SamplingSchedule& schedule, double p,
                                             double eps) {
  const double a = p + 1.0 + eps;
  if (a < 0.0) {
    throw std::invalid_argument("check_phi_integrability: p + 1 + eps must be >= 0");
  }
  auto integrand = [&](double s) -> double {
    const double phi = schedule.evaluate(s);
    if (!(phi > 0.0)) {
      throw std::invalid_argument("check_phi_integrability: phi must be positive");
    }
    if (s == 0.0) return a == 0.0 ? 1.0 / phi : 0.0;
    // Evaluate in log space so very large s / phi do not produce NaN.
    const double log_val = a * std::log(s) - std::log(phi);
    return std::exp(log_val);
  };

  // Dyadic blocks [2^k, 2^{k+1}] up to 2^40, plus the head [0, 1].
  constexpr int kMaxLevel = 40;
  std::vector<double> blocks;
  blocks.push_back(integrate_panels(integrand, 0.0, 1.0, 8));
  for (int k = 0; k < kMaxLevel; ++k) {
    const double lo = std::ldexp(1.0, k);
    blocks.push_back(integrate_panels(integrand, lo, 2.0 * lo, 8));
  }

  // Tail ratio analysis over the final decade of blocks.
  std::vector<double> ratios;
  for (std::size_t i = blocks.size() - 11; i + 1 < blocks.size(); ++i) {
    const double b0 = blocks[i];
    const double b1 = blocks[i + 1];
    if (b0 == 0.0 && b1 == 0.0) continue;  // underflowed tail: treat as decayed
    if (b0 == 0.0) return IntegrabilityVerdict::Inconclusive;
    ratios.push_back(b1 / b0);
  }
  if (ratios.empty()) return IntegrabilityVerdict::Pass;  // integrand vanished
  const double rmax = *std::max_element(ratios.begin(), ratios.end());
  const double rmin = *std::min_element(ratios.begin(), ratios.end());
  if (rmax <= 0.97) return IntegrabilityVerdict::Pass;
  if (rmin >= 0.999) return IntegrabilityVerdict::Fail;
  return IntegrabilityVerdict::Inconclusive;
}

void emit_constants_csv(std::ostream& out, const StableParams& params, int max_order,
                        std::span<const double> gamma_times) {
  params.validate();
  out << "d,alpha,k,value\n";
  out.precision(17);
  for (const MultiIndex& k : enumerate_multi_indices(params.dim, max_order)) {
    out << params.dim << "," << params.alpha << ",";
    for (int i = 0; i < k.dim(); ++i) {
      if (i) out << ";";
      out << k.k[i];
    }
    out << "," << theta_const(params, k) << "\n";
  }
  const double alpha = params.is_gaussian() ? 2.0 : params.alpha;
  if (params.dim <= alpha) {
    out << params.dim << "," << params.alpha << ",kappa," << kappa_d(params) << "\n";
  } else {
    out << params.dim << "," << params.alpha << ",kappa,undefined\n";
  }
  for (double t : gamma_times) {
    out << params.dim << "," << params.alpha << ",gamma@" << t << "," << gamma_d(params, t)
        << "\n";
  }
}

}  // namespace fvlab
