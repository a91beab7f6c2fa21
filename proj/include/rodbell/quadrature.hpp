#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "rodbell/error.hpp"

namespace rodbell::quad {

/// n-point Gauss-Legendre rule on [-1, 1].
class GaussLegendre {
 public:
  explicit GaussLegendre(int n) {
    detail::require(n > 0, ErrorCode::NonPositiveEffort, "quadrature node count must be positive");
    const auto zeros = boost::math::legendre_p_zeros<double>(n);
    for (double x : zeros) {
      const double dp = boost::math::legendre_p_prime<double>(n, x);
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes_.push_back(x);
      weights_.push_back(w);
      if (x != 0.0) {
        nodes_.push_back(-x);
        weights_.push_back(w);
      }
    }
  }

  int size() const { return static_cast<int>(nodes_.size()); }

  /// Integral of f over [a, b].
  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(mid + half * nodes_[i]);
    return half * sum;
  }

  /// Composite rule: one panel between each pair of consecutive breakpoints
  /// that fall inside [a, b].
  template <typename F>
  double integrate_panels(F&& f, double a, double b, std::vector<double> breaks) const {
    if (!(b > a)) return 0.0;
    breaks.push_back(a);
    breaks.push_back(b);
    std::erase_if(breaks, [&](double x) { return x < a || x > b; });
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) sum += integrate(f, breaks[i], breaks[i + 1]);
    return sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive 61-point Gauss-Kronrod over [a, b] split at the given breakpoints.
template <typename F>
AdaptiveResult adaptive(F&& f, double a, double b, std::vector<double> breaks,
                        double rel_tol = 1e-11) {
  AdaptiveResult out;
  if (!(b > a)) return out;
  breaks.push_back(a);
  breaks.push_back(b);
  std::erase_if(breaks, [&](double x) { return x < a || x > b; });
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double err = 0.0;
    out.value += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, breaks[i], breaks[i + 1], 12, rel_tol, &err);
    out.error += err;
  }
  return out;
}

}  // namespace rodbell::quad
