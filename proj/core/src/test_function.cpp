#include "fvlab/test_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "fvlab/fft.hpp"
#include "fvlab/quadrature.hpp"

namespace fvlab {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// (m-1)!! for even m >= 0.
double double_factorial_even(int m) {
  double r = 1.0;
  for (int j = m - 1; j >= 1; j -= 2) r *= j;
  return r;
}

// 1-d Gaussian moment: int y^m exp(-y^2/(2 w^2)) dy.
double gauss_moment_1d(int m, double w) {
  if (m % 2 == 1) return 0.0;
  return std::sqrt(2.0 * M_PI) * std::pow(w, m + 1) * double_factorial_even(m);
}

struct FourierGrid {
  // Cached samples of fourier(theta) on a uniform grid [0, theta_max] for a
  // real-valued transform; Catmull-Rom interpolation between samples.
  double theta_max = 0.0;
  double dtheta = 0.0;
  std::vector<double> values;

  double interpolate(double r) const {
    r = std::abs(r);
    if (r >= theta_max) return 0.0;
    const double u = r / dtheta;
    const std::size_t n = values.size();
    std::size_t i = static_cast<std::size_t>(u);
    if (i + 1 >= n) return values.back();
    const double frac = u - static_cast<double>(i);
    const double p1 = values[i];
    const double p2 = values[i + 1];
    const double p0 = i > 0 ? values[i - 1] : 2.0 * p1 - p2;
    const double p3 = i + 2 < n ? values[i + 2] : 2.0 * p2 - p1;
    const double a = 2.0 * p1;
    const double b = p2 - p0;
    const double c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
    const double d = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
    return 0.5 * (a + b * frac + c * frac * frac + d * frac * frac * frac);
  }
};

}  // namespace

int MultiIndex::order() const {
  int s = 0;
  for (int ki : k) {
    if (ki < 0) throw std::invalid_argument("MultiIndex: negative component");
    s += ki;
  }
  return s;
}

double MultiIndex::log_factorial() const {
  double s = 0.0;
  for (int ki : k) s += std::lgamma(ki + 1.0);
  return s;
}

double MultiIndex::factorial() const { return std::exp(log_factorial()); }

bool MultiIndex::any_odd() const {
  return std::any_of(k.begin(), k.end(), [](int ki) { return ki % 2 == 1; });
}

std::complex<double> TestFunction::fourier(std::span<const double> theta) const {
  if (theta.size() != static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("TestFunction::fourier: wrong dimension");
  }
  return fourier_(theta);
}

double TestFunction::fourier_radial(double r) const {
  if (!fourier_radial_) {
    throw std::logic_error("TestFunction::fourier_radial: function is not isotropic");
  }
  return fourier_radial_(r);
}

double TestFunction::moment(const MultiIndex& k) const {
  if (k.dim() != dim_) throw std::invalid_argument("TestFunction::moment: wrong dimension");
  if (!moment_) throw std::logic_error("TestFunction::moment: no moment data for " + label_);
  return moment_(k);
}

double TestFunction::fourier_extent(double eps) const {
  if (!fourier_extent_) {
    throw std::logic_error("TestFunction::fourier_extent: no tail bound available");
  }
  return fourier_extent_(std::max(eps, 1e-300));
}

TestFunction TestFunction::gaussian_bump(int dim, double width) {
  if (dim < 1 || !(width > 0.0)) throw std::invalid_argument("gaussian_bump: bad parameters");
  TestFunction f;
  f.dim_ = dim;
  f.isotropic_ = true;
  f.compact_support_ = false;
  f.support_radius_ = 10.0 * width;  // exp(-50) below double noise
  const double w = width;
  f.eval_ = [w](std::span<const double> x) {
    const double r = norm2(x);
    return std::exp(-r * r / (2.0 * w * w));
  };
  const double amp = std::pow(2.0 * M_PI * w * w, 0.5 * dim);
  f.fourier_radial_ = [w, amp](double r) { return amp * std::exp(-w * w * r * r / 2.0); };
  f.fourier_ = [f2 = f.fourier_radial_](std::span<const double> th) {
    return std::complex<double>(f2(norm2(th)), 0.0);
  };
  f.moment_ = [w, dim](const MultiIndex& k) {
    if (k.dim() != dim) throw std::invalid_argument("moment: wrong dimension");
    double m = 1.0;
    for (int ki : k.k) m *= gauss_moment_1d(ki, w);
    return m;
  };
  f.l1_ = amp;
  f.l2_ = std::pow(M_PI * w * w, 0.25 * dim);
  f.sup_ = 1.0;
  f.fourier_extent_ = [w, amp](double eps) {
    const double lg = std::log(std::max(amp / eps, 2.0));
    return std::sqrt(2.0 * lg) / w;
  };
  f.label_ = "gaussian-bump(width=" + std::to_string(width) + ")";
  return f;
}

TestFunction TestFunction::indicator_ball(int dim, double radius) {
  if (dim < 1 || dim > 3 || !(radius > 0.0)) {
    throw std::invalid_argument("indicator_ball: dim must be 1..3 and radius > 0");
  }
  TestFunction f;
  f.dim_ = dim;
  f.isotropic_ = true;
  f.compact_support_ = true;
  f.support_radius_ = radius;
  const double rho = radius;
  f.eval_ = [rho](std::span<const double> x) { return norm2(x) <= rho ? 1.0 : 0.0; };
  const double volume = std::pow(M_PI, 0.5 * dim) * std::pow(rho, dim) /
                        std::exp(std::lgamma(0.5 * dim + 1.0));
  f.fourier_radial_ = [rho, dim, volume](double r) -> double {
    const double u = rho * r;
    if (u < 1e-8) return volume;
    switch (dim) {
      case 1:
        return 2.0 * std::sin(u) / r;
      case 2:
        return 2.0 * M_PI * rho * std::cyl_bessel_j(1.0, u) / r;
      default:
        return 4.0 * M_PI * (std::sin(u) - u * std::cos(u)) / (r * r * r);
    }
  };
  f.fourier_ = [fr = f.fourier_radial_](std::span<const double> th) {
    return std::complex<double>(fr(norm2(th)), 0.0);
  };
  f.moment_ = [rho, dim](const MultiIndex& k) {
    if (k.any_odd()) return 0.0;
    const int m = k.order();
    return sphere_monomial_moment(k.k) * std::pow(rho, m + dim) / (m + dim);
  };
  f.l1_ = volume;
  f.l2_ = std::sqrt(volume);
  f.sup_ = 1.0;
  // |fourier| <= c r^{-(d+1)/2} for large r.
  const double tail_c = 4.0 * volume / std::pow(rho, 0.5 * (dim + 1));
  const double tail_q = 0.5 * (dim + 1);
  f.fourier_extent_ = [tail_c, tail_q](double eps) {
    return std::pow(tail_c / eps, 1.0 / tail_q);
  };
  f.label_ = "indicator-ball(radius=" + std::to_string(radius) + ")";
  return f;
}

TestFunction TestFunction::cosine_window(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("cosine_window: radius > 0 required");
  TestFunction f;
  f.dim_ = 1;
  f.isotropic_ = true;  // even in one dimension
  f.compact_support_ = true;
  f.support_radius_ = radius;
  const double rho = radius;
  f.eval_ = [rho](std::span<const double> x) {
    const double r = std::abs(x[0]);
    if (r > rho) return 0.0;
    const double c = std::cos(M_PI * x[0] / (2.0 * rho));
    return c * c;
  };
  f.fourier_radial_ = [rho](double r) -> double {
    // sin(rho r)/r * pi^2 / (pi^2 - rho^2 r^2), removable at r=0 and r=pi/rho.
    const double u = rho * r;
    if (std::abs(u) < 1e-6) return rho * (1.0 - u * u / 6.0);
    const double denom = M_PI * M_PI - u * u;
    if (std::abs(denom) < 1e-6) {
      // Series around u = pi: value rho/2 + O(denom).
      return rho / 2.0 * (1.0 + denom * (1.0 / (M_PI * M_PI) - 0.5 / (M_PI * M_PI)));
    }
    return (std::sin(u) / r) * (M_PI * M_PI / denom);
  };
  f.fourier_ = [fr = f.fourier_radial_](std::span<const double> th) {
    return std::complex<double>(fr(th[0]), 0.0);
  };
  auto eval = f.eval_;
  f.moment_ = [rho, eval](const MultiIndex& k) {
    const int m = k.order();
    if (m % 2 == 1) return 0.0;
    auto integrand = [&](double x) {
      return std::pow(x, m) * std::cos(M_PI * x / (2.0 * rho)) * std::cos(M_PI * x / (2.0 * rho));
    };
    return 2.0 * integrate_panels(integrand, 0.0, rho, 32);
  };
  f.l1_ = rho;
  f.l2_ = std::sqrt(0.75 * rho);
  f.sup_ = 1.0;
  const double tail_c = 8.0 / (rho * rho);  // ~ pi^2 / (rho^2 r^3) scale
  f.fourier_extent_ = [tail_c](double eps) { return std::pow(tail_c / eps, 1.0 / 3.0); };
  f.label_ = "cosine-window(radius=" + std::to_string(radius) + ")";
  return f;
}

TestFunction TestFunction::odd_bump(int dim, double width) {
  if (dim < 1 || !(width > 0.0)) throw std::invalid_argument("odd_bump: bad parameters");
  TestFunction f;
  f.dim_ = dim;
  f.isotropic_ = false;
  f.compact_support_ = false;
  f.support_radius_ = 10.0 * width;
  const double w = width;
  f.eval_ = [w](std::span<const double> x) {
    const double r = norm2(x);
    return x[0] * std::exp(-r * r / (2.0 * w * w));
  };
  const double amp = std::pow(2.0 * M_PI * w * w, 0.5 * dim) * w * w;
  f.fourier_ = [w, amp](std::span<const double> th) {
    const double r = norm2(th);
    // Fourier of x_1 g(x) is i d/dtheta_1 of g-hat.
    return std::complex<double>(0.0, -amp * th[0] * std::exp(-w * w * r * r / 2.0));
  };
  f.moment_ = [w, dim](const MultiIndex& k) {
    if (k.dim() != dim) throw std::invalid_argument("moment: wrong dimension");
    double m = gauss_moment_1d(k.k[0] + 1, w);
    for (int i = 1; i < dim; ++i) m *= gauss_moment_1d(k.k[i], w);
    return m;
  };
  f.l1_ = 2.0 * w * w * std::pow(std::sqrt(2.0 * M_PI) * w, dim - 1);
  f.l2_ = std::sqrt(std::pow(std::sqrt(M_PI) * w, dim) * w * w / 2.0);
  f.sup_ = w * std::exp(-0.5);
  f.fourier_extent_ = [w, amp](double eps) {
    const double lg = std::log(std::max(2.0 * amp / (w * eps), 2.0));
    return std::sqrt(2.0 * lg) / w + 1.0 / w;
  };
  f.label_ = "odd-bump(width=" + std::to_string(width) + ")";
  return f;
}

TestFunction TestFunction::from_evaluate_1d(Eval f, double support_radius, double tolerance,
                                            std::string label) {
  if (!f) throw std::invalid_argument("from_evaluate_1d: evaluator required");
  if (!(support_radius > 0.0)) {
    throw std::invalid_argument("from_evaluate_1d: support radius required for Fourier fallback");
  }
  if (!(tolerance > 0.0)) throw std::invalid_argument("from_evaluate_1d: tolerance must be > 0");

  TestFunction tf;
  tf.dim_ = 1;
  tf.compact_support_ = true;
  tf.support_radius_ = support_radius;
  tf.eval_ = f;

  // Compute the Fourier transform on a grid by FFT. The sample spacing is
  // fixed fine enough to resolve f; each refinement doubles the padded
  // extent (halving the frequency spacing) until two successive grids
  // agree at shared frequencies.
  auto grid = std::make_shared<FourierGrid>();
  auto eval_at = [&f, support_radius](double x) {
    if (std::abs(x) > support_radius) return 0.0;
    return f(std::span<const double>(&x, 1));
  };
  double L = 8.0 * support_radius;
  std::size_t m = 8192;
  std::vector<double> prev;
  for (int refine = 0; refine < 6; ++refine, m *= 2, L *= 2.0) {
    std::vector<std::complex<double>> data(m);
    const double dx = L / static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double x = -0.5 * L + (static_cast<double>(j) + 0.5) * dx;
      data[j] = eval_at(x);
    }
    fft_radix2(data, -1);
    // fhat(theta_j) = dx e^{i theta_j (L - dx)/2} FFT_j with theta_j = 2 pi j / L.
    const double dtheta = 2.0 * M_PI / L;
    std::vector<double> vals(m / 2);
    for (std::size_t j = 0; j < m / 2; ++j) {
      const double theta = dtheta * static_cast<double>(j);
      const std::complex<double> phase =
          std::exp(std::complex<double>(0.0, theta * 0.5 * (L - dx)));
      vals[j] = (dx * phase * data[j]).real();
    }
    bool converged = false;
    if (!prev.empty()) {
      // vals[2j] and prev[j] sit at the same frequency.
      converged = true;
      for (std::size_t j = 0; j < prev.size(); j += std::max<std::size_t>(1, prev.size() / 256)) {
        if (2 * j >= vals.size()) break;
        if (std::abs(prev[j] - vals[2 * j]) > tolerance) {
          converged = false;
          break;
        }
      }
    }
    grid->dtheta = dtheta;
    grid->theta_max = dtheta * static_cast<double>(m / 2 - 1);
    prev = vals;
    grid->values = std::move(vals);
    if (converged) break;
  }

  tf.isotropic_ = false;  // unknown symmetry; treat generically
  tf.fourier_ = [grid](std::span<const double> th) {
    return std::complex<double>(grid->interpolate(th[0]), 0.0);
  };
  tf.fourier_radial_ = [grid](double r) { return grid->interpolate(r); };
  tf.moment_ = [f, support_radius](const MultiIndex& k) {
    const int m2 = k.order();
    auto integrand = [&](double x) {
      return std::pow(x, m2) * f(std::span<const double>(&x, 1));
    };
    return integrate_panels(integrand, -support_radius, support_radius, 64);
  };
  auto abs_f = [f](double x) { return std::abs(f(std::span<const double>(&x, 1))); };
  tf.l1_ = integrate_panels(abs_f, -support_radius, support_radius, 64);
  auto sq_f = [f](double x) {
    const double v = f(std::span<const double>(&x, 1));
    return v * v;
  };
  tf.l2_ = std::sqrt(integrate_panels(sq_f, -support_radius, support_radius, 64));
  double sup = 0.0;
  for (int i = 0; i <= 4096; ++i) {
    const double x = -support_radius + 2.0 * support_radius * i / 4096.0;
    sup = std::max(sup, abs_f(x));
  }
  tf.sup_ = sup;
  const double l1 = tf.l1_;
  tf.fourier_extent_ = [l1](double eps) { return l1 / eps; };
  tf.label_ = std::move(label);
  return tf;
}

TestFunction TestFunction::from_fourier(int dim, bool isotropic, Eval eval, FourierFn fourier,
                                        RadialFourierFn radial,
                                        std::function<double(double)> extent,
                                        std::string label) {
  if (!fourier || !extent) {
    throw std::invalid_argument("from_fourier: fourier and extent closures required");
  }
  if (isotropic && !radial) {
    throw std::invalid_argument("from_fourier: isotropic functions need a radial form");
  }
  TestFunction f;
  f.dim_ = dim;
  f.isotropic_ = isotropic;
  f.compact_support_ = false;
  f.support_radius_ = std::numeric_limits<double>::quiet_NaN();
  f.eval_ = std::move(eval);
  f.fourier_ = std::move(fourier);
  f.fourier_radial_ = std::move(radial);
  f.fourier_extent_ = std::move(extent);
  f.l1_ = f.l2_ = f.sup_ = std::numeric_limits<double>::quiet_NaN();
  f.label_ = std::move(label);
  return f;
}

TestFunction TestFunction::with_moments(TestFunction base, MomentFn moments) {
  base.moment_ = std::move(moments);
  return base;
}

TestFunction TestFunction::with_norms(TestFunction base, double l1, double l2, double sup) {
  base.l1_ = l1;
  base.l2_ = l2;
  base.sup_ = sup;
  return base;
}

namespace {

// Parse "name:key=value,key=value".
std::pair<std::string, std::vector<std::pair<std::string, double>>> parse_spec(
    const std::string& spec) {
  std::string name = spec;
  std::vector<std::pair<std::string, double>> params;
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    name = spec.substr(0, colon);
    std::string rest = spec.substr(colon + 1);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      auto comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      const std::string item = rest.substr(pos, comma - pos);
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("TestFunction::parse: expected key=value in '" + item + "'");
      }
      params.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
      pos = comma + 1;
    }
  }
  return {name, params};
}

double param_or(const std::vector<std::pair<std::string, double>>& kv, const std::string& key,
                double fallback) {
  for (const auto& [k, v] : kv) {
    if (k == key) return v;
  }
  return fallback;
}

}  // namespace

TestFunction TestFunction::parse(const std::string& spec, int dim) {
  const auto [name, kv] = parse_spec(spec);
  if (name == "gaussian-bump") {
    return gaussian_bump(dim, param_or(kv, "width", 1.0 / std::sqrt(2.0)));
  }
  if (name == "indicator-ball") {
    return indicator_ball(dim, param_or(kv, "radius", 1.0));
  }
  if (name == "cosine-window") {
    if (dim != 1) throw std::invalid_argument("cosine-window is one-dimensional");
    return cosine_window(param_or(kv, "radius", 1.0));
  }
  if (name == "odd-bump") {
    return odd_bump(dim, param_or(kv, "width", 1.0 / std::sqrt(2.0)));
  }
  throw std::invalid_argument("unknown test function '" + name + "'");
}

}  // namespace fvlab
