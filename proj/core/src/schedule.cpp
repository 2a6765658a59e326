#include "fvlab/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fvlab/quadrature.hpp"

namespace fvlab {

SamplingSchedule SamplingSchedule::constant(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("SamplingSchedule: constant must be > 0");
  SamplingSchedule s;
  s.kind_ = Kind::Constant;
  s.c_ = c;
  return s;
}

SamplingSchedule SamplingSchedule::exponential(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("SamplingSchedule: beta must be > 0");
  SamplingSchedule s;
  s.kind_ = Kind::Exponential;
  s.beta_ = beta;
  return s;
}

SamplingSchedule SamplingSchedule::polynomial(double n) {
  if (!(n > 0.0)) throw std::invalid_argument("SamplingSchedule: polynomial degree must be > 0");
  SamplingSchedule s;
  s.kind_ = Kind::Polynomial;
  s.n_ = n;
  return s;
}

SamplingSchedule SamplingSchedule::tabulated(std::vector<std::pair<double, double>> knots) {
  if (knots.size() < 2) throw std::invalid_argument("SamplingSchedule: need at least 2 knots");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!(knots[i].second > 0.0)) {
      throw std::invalid_argument("SamplingSchedule: phi values must be > 0");
    }
    if (i > 0 && !(knots[i].first > knots[i - 1].first)) {
      throw std::invalid_argument("SamplingSchedule: knot times must increase");
    }
  }
  if (knots.front().first != 0.0) {
    throw std::invalid_argument("SamplingSchedule: first knot must be at t = 0");
  }
  SamplingSchedule s;
  s.kind_ = Kind::Tabulated;
  s.nondecreasing_ = true;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i].second < knots[i - 1].second) s.nondecreasing_ = false;
  }
  s.knots_ = std::move(knots);
  return s;
}

double SamplingSchedule::evaluate(double t) const {
  if (t < 0.0) throw std::invalid_argument("SamplingSchedule: t must be >= 0");
  switch (kind_) {
    case Kind::Constant:
      return c_;
    case Kind::Exponential:
      return std::exp(beta_ * t);
    case Kind::Polynomial:
      return 1.0 + std::pow(t, n_);
    case Kind::Tabulated: {
      if (t >= knots_.back().first) return knots_.back().second;
      auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                 [](double v, const auto& kn) { return v < kn.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double w = (t - lo.first) / (hi.first - lo.first);
      return lo.second * (1.0 - w) + hi.second * w;
    }
  }
  return c_;
}

double SamplingSchedule::min_on(double a, double b) const {
  if (!(b >= a)) throw std::invalid_argument("SamplingSchedule::min_on: b < a");
  if (nondecreasing_ && kind_ != Kind::Tabulated) return evaluate(a);
  if (kind_ != Kind::Tabulated) return std::min(evaluate(a), evaluate(b));
  // Piecewise linear: the minimum over [a,b] is attained at an endpoint or
  // an interior knot.
  double m = std::min(evaluate(a), evaluate(b));
  for (const auto& [t, v] : knots_) {
    if (t > a && t < b) m = std::min(m, v);
  }
  return m;
}

double SamplingSchedule::integral_inv(double a, double b) const {
  if (!(b >= a)) throw std::invalid_argument("SamplingSchedule::integral_inv: b < a");
  if (b == a) return 0.0;
  switch (kind_) {
    case Kind::Constant:
      return (b - a) / c_;
    case Kind::Exponential:
      // int e^{-beta s} ds, written to stay accurate for tiny intervals.
      return std::exp(-beta_ * a) * (-std::expm1(-beta_ * (b - a))) / beta_;
    case Kind::Polynomial:
    case Kind::Tabulated: {
      auto g = [this](double s) { return 1.0 / evaluate(s); };
      const int panels = (b - a) < 0.5 ? 2 : std::min(512, 2 + static_cast<int>(4.0 * (b - a)));
      return integrate_panels(g, a, b, panels);
    }
  }
  return 0.0;
}

std::string SamplingSchedule::describe() const {
  switch (kind_) {
    case Kind::Constant:
      return "constant(" + std::to_string(c_) + ")";
    case Kind::Exponential:
      return "exponential(beta=" + std::to_string(beta_) + ")";
    case Kind::Polynomial:
      return "polynomial(n=" + std::to_string(n_) + ")";
    case Kind::Tabulated:
      return "tabulated(" + std::to_string(knots_.size()) + " knots)";
  }
  return "?";
}

}  // namespace fvlab
