#include "fvlab/stable_motion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fvlab {

namespace {
constexpr double kGaussianAlphaTol = 1e-9;
}

void StableParams::validate() const {
  if (!(alpha > 0.0) || !(alpha <= 2.0)) {
    throw std::invalid_argument("StableParams: alpha must lie in (0, 2], got " +
                                std::to_string(alpha));
  }
  if (dim < 1) throw std::invalid_argument("StableParams: dim must be >= 1");
}

bool StableParams::is_gaussian() const { return std::abs(alpha - 2.0) <= kGaussianAlphaTol; }

double sample_stable_1d(double alpha, RngStream& rng) {
  if (!(alpha > 0.0) || !(alpha > 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument("sample_stable_1d: alpha must lie in (0, 2]");
  }
  if (std::abs(alpha - 2.0) <= kGaussianAlphaTol) {
    // CF exp(-theta^2) means variance 2.
    return std::sqrt(2.0) * rng.normal();
  }
  const double u = rng.uniform(-M_PI / 2.0, M_PI / 2.0);
  if (std::abs(alpha - 1.0) <= 1e-8) {
    return std::tan(u);  // standard Cauchy, CF exp(-|theta|)
  }
  const double w = rng.exponential();
  // Symmetric CMS transform, scale normalized so the CF is exp(-|theta|^alpha).
  const double s = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha);
  const double tail = std::pow(std::cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
  return s * tail;
}

double sample_subordinator(double sigma, double t, RngStream& rng) {
  if (!(sigma > 0.0) || !(sigma < 1.0)) {
    throw std::invalid_argument("sample_subordinator: sigma must lie in (0, 1)");
  }
  if (!(t > 0.0)) throw std::invalid_argument("sample_subordinator: t must be > 0");
  // Kanter's representation: S = (A(U)/W)^{(1-sigma)/sigma} has Laplace
  // transform exp(-u^sigma); time scaling S_t = t^{1/sigma} S.
  const double u = rng.uniform(0.0, M_PI);
  const double w = rng.exponential();
  const double log_a =
      (sigma * std::log(std::sin(sigma * u)) + (1.0 - sigma) * std::log(std::sin((1.0 - sigma) * u)) -
       std::log(std::sin(u))) /
      (1.0 - sigma);
  const double s = std::exp(((1.0 - sigma) / sigma) * (log_a - std::log(w)));
  return std::pow(t, 1.0 / sigma) * s;
}

void add_isotropic_increment(const StableParams& params, double dt, RngStream& rng,
                             double* out) {
  params.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("sample_isotropic_increment: dt must be > 0");
  if (params.is_gaussian()) {
    const double sd = std::sqrt(2.0 * dt);
    for (int i = 0; i < params.dim; ++i) out[i] += sd * rng.normal();
    return;
  }
  if (params.dim == 1) {
    // Direct 1-d draw; the dt scaling uses self-similarity.
    out[0] += std::pow(dt, 1.0 / params.alpha) * sample_stable_1d(params.alpha, rng);
    return;
  }
  // X = B_{2S} with S an (alpha/2)-subordinator at time dt gives
  // E exp(i theta . X) = E exp(-S |theta|^2) = exp(-dt |theta|^alpha).
  const double s = sample_subordinator(params.alpha / 2.0, dt, rng);
  const double sd = std::sqrt(2.0 * s);
  for (int i = 0; i < params.dim; ++i) out[i] += sd * rng.normal();
}

std::vector<double> sample_isotropic_increment(const StableParams& params, double dt,
                                               RngStream& rng) {
  std::vector<double> x(params.dim, 0.0);
  add_isotropic_increment(params, dt, rng, x.data());
  return x;
}

PathGrid simulate_path(const StableParams& params, const std::vector<double>& grid,
                       const std::vector<double>& start, RngStream& rng) {
  params.validate();
  if (grid.empty() || grid.front() != 0.0) {
    throw std::invalid_argument("simulate_path: grid must start at 0");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("simulate_path: grid must be strictly increasing");
    }
  }
  if (start.size() != static_cast<std::size_t>(params.dim)) {
    throw std::invalid_argument("simulate_path: start has wrong dimension");
  }
  PathGrid path;
  path.dim = params.dim;
  path.times = grid;
  path.positions.resize(grid.size() * params.dim);
  for (int i = 0; i < params.dim; ++i) path.positions[i] = start[i];
  for (std::size_t k = 1; k < grid.size(); ++k) {
    double* cur = path.positions.data() + k * params.dim;
    const double* prev = path.positions.data() + (k - 1) * params.dim;
    for (int i = 0; i < params.dim; ++i) cur[i] = prev[i];
    add_isotropic_increment(params, grid[k] - grid[k - 1], rng, cur);
  }
  return path;
}

}  // namespace fvlab
