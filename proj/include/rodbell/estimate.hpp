#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string_view>

namespace rodbell {

enum class Method { ClosedForm, Quadrature, MonteCarlo };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::ClosedForm: return "closed-form";
    case Method::Quadrature: return "quadrature";
    case Method::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

/// A numeric result with its standard error and the route that produced it.
///
/// Closed-form results always carry std_error == 0. Stochastic or discretised
/// results carry their own error estimate, which may still be 0 when the
/// sampled integrand happens to be constant.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  Method method = Method::ClosedForm;
  std::int64_t effort = 0;  // samples or quadrature nodes

  static Estimate exact(double v) { return {v, 0.0, Method::ClosedForm, 0}; }

  friend std::ostream& operator<<(std::ostream& os, const Estimate& e) {
    return os << e.value << " +- " << e.std_error << " [" << to_string(e.method) << ']';
  }
};

/// Least exact method of the two: closed-form < quadrature < monte-carlo.
constexpr Method combine(Method a, Method b) {
  return static_cast<int>(a) > static_cast<int>(b) ? a : b;
}

/// Linear combination sum_i c_i * e_i of independent estimates.
template <typename... Pairs>
Estimate linear_combination(const Pairs&... terms) {
  Estimate out{0.0, 0.0, Method::ClosedForm, 0};
  double var = 0.0;
  auto add = [&](const auto& term) {
    const auto& [coef, est] = term;
    out.value += coef * est.value;
    var += coef * coef * est.std_error * est.std_error;
    out.method = combine(out.method, est.method);
    out.effort += est.effort;
  };
  (add(terms), ...);
  out.std_error = std::sqrt(var);
  return out;
}

/// First-order propagation for a product of two independent estimates.
inline Estimate product(const Estimate& a, const Estimate& b) {
  const double var = b.value * b.value * a.std_error * a.std_error +
                     a.value * a.value * b.std_error * b.std_error;
  return {a.value * b.value, std::sqrt(var), combine(a.method, b.method),
          a.effort + b.effort};
}

inline Estimate scaled(const Estimate& e, double s) {
  return {e.value * s, e.std_error * std::abs(s), e.method, e.effort};
}

/// |a - b| <= max(abs_floor, k * combined stderr)
inline bool agree(const Estimate& a, const Estimate& b, double abs_floor, double k = 4.0) {
  const double se = std::hypot(a.std_error, b.std_error);
  return std::abs(a.value - b.value) <= std::max(abs_floor, k * se);
}

}  // namespace rodbell
