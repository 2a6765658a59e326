#pragma once

#include <vector>

#include "fvlab/rng.hpp"

namespace fvlab {

// Stability index and spatial dimension of the particle motion.
// The characteristic exponent convention is exactly |theta|^alpha, so
// alpha = 2 means a Gaussian with per-coordinate variance 2t.
struct StableParams {
  double alpha = 2.0;
  int dim = 1;

  void validate() const;
  bool is_gaussian() const;  // alpha within 1e-9 of 2 is treated as 2
};

// A discrete path carrier: strictly increasing times starting at 0 and the
// matching positions (dim coordinates per time, row-major).
struct PathGrid {
  int dim = 1;
  std::vector<double> times;
  std::vector<double> positions;  // times.size() * dim entries

  const double* point(std::size_t i) const { return positions.data() + i * dim; }
};

// One draw of the symmetric alpha-stable law with characteristic function
// exp(-|theta|^alpha). Chambers-Mallows-Stuck transform; alpha = 1 uses the
// Cauchy branch, alpha = 2 routes to a Gaussian with variance 2.
double sample_stable_1d(double alpha, RngStream& rng);

// One draw of the one-sided sigma-stable subordinator at time t, with
// Laplace transform exp(-t u^sigma). Kanter's representation.
double sample_subordinator(double sigma, double t, RngStream& rng);

// Isotropic stable increment over a time step dt: characteristic function
// exp(-dt |theta|^alpha). Gaussian subordination for alpha < 2.
std::vector<double> sample_isotropic_increment(const StableParams& params, double dt,
                                               RngStream& rng);

// In-place variant writing `params.dim` coordinates into out.
void add_isotropic_increment(const StableParams& params, double dt, RngStream& rng,
                             double* out);

// Path on the given grid: positions[0] = start, independent stable
// increments across consecutive grid intervals.
PathGrid simulate_path(const StableParams& params, const std::vector<double>& grid,
                       const std::vector<double>& start, RngStream& rng);

}  // namespace fvlab
