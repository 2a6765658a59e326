#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fvlab {

// Sampling schedule phi: resampling happens at rate proportional to
// 1/phi(t). Built-in families plus a tabulated form with linear
// interpolation (held constant beyond the last knot).
class SamplingSchedule {
 public:
  enum class Kind { Constant, Exponential, Polynomial, Tabulated };

  static SamplingSchedule constant(double c);
  static SamplingSchedule exponential(double beta);  // phi(t) = exp(beta t)
  static SamplingSchedule polynomial(double n);      // phi(t) = 1 + t^n
  static SamplingSchedule tabulated(std::vector<std::pair<double, double>> knots);

  double evaluate(double t) const;
  double operator()(double t) const { return evaluate(t); }

  // Exact minimum of phi over [a, b] (finite horizon).
  double min_on(double a, double b) const;

  // int_a^b ds / phi(s); closed form for constant/exponential kinds.
  double integral_inv(double a, double b) const;

  Kind kind() const { return kind_; }
  bool nondecreasing() const { return nondecreasing_; }
  std::string describe() const;

 private:
  SamplingSchedule() = default;

  Kind kind_ = Kind::Constant;
  double c_ = 1.0;
  double beta_ = 0.0;
  double n_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
  bool nondecreasing_ = true;
};

}  // namespace fvlab
