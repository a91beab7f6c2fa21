#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <variant>

#include "rodbell/error.hpp"
#include "rodbell/random.hpp"
#include "rodbell/vec3.hpp"

namespace rodbell {

/// CODATA 2018 Planck length in metres.
inline constexpr double kPlanckLengthSI = 1.616255e-35;

namespace law {
/// Ideal rods: the reading is the fiducial position.
struct Delta {
  friend bool operator==(const Delta&, const Delta&) = default;
};
/// Distance-independent Gaussian spread.
struct FixedWidth {
  double variance = 1.0;  // D, length^2
  friend bool operator==(const FixedWidth&, const FixedWidth&) = default;
};
/// Gravitationally limited rods: D(X) = lp^{4/3} |X|^{2/3}.
struct NgVanDam {
  double planck_length = 1.0;
  friend bool operator==(const NgVanDam&, const NgVanDam&) = default;
};
}  // namespace law

using DispersionLaw = std::variant<law::Delta, law::FixedWidth, law::NgVanDam>;

//---------------------------------------------------------------------------//
/*!
 * Rod-reading density P_u(X) = (pi D)^{-3/2} exp(-|X - u|^2 / D).
 *
 * The dispersion D is evaluated at the reading X, never at the fiducial
 * point u. Per axis the Gaussian has variance D/2. A zero dispersion (Delta
 * law, or NgVanDam at X = 0 without a floor) is the ideal delta limit.
 */
class SmearingKernel {
 public:
  SmearingKernel() = default;

  explicit SmearingKernel(DispersionLaw law, double dispersion_floor = 0.0)
      : law_(law), floor_(dispersion_floor) {
    detail::require(std::isfinite(floor_) && floor_ >= 0, ErrorCode::InvalidArgument,
                    "dispersion floor must be finite and non-negative");
    if (const auto* fw = std::get_if<law::FixedWidth>(&law_)) {
      detail::require(std::isfinite(fw->variance) && fw->variance > 0,
                      ErrorCode::InvalidArgument, "fixed-width variance must be positive");
    }
    if (const auto* nv = std::get_if<law::NgVanDam>(&law_)) {
      detail::require(std::isfinite(nv->planck_length) && nv->planck_length > 0,
                      ErrorCode::InvalidArgument, "planck length must be positive");
    }
  }

  static SmearingKernel delta() { return SmearingKernel(law::Delta{}); }
  static SmearingKernel fixed_width(double variance) {
    return SmearingKernel(law::FixedWidth{variance});
  }
  static SmearingKernel ng_van_dam(double planck_length, double floor = 0.0) {
    return SmearingKernel(law::NgVanDam{planck_length}, floor);
  }

  const DispersionLaw& law() const { return law_; }
  double dispersion_floor() const { return floor_; }
  bool is_delta_law() const { return std::holds_alternative<law::Delta>(law_); }

  friend bool operator==(const SmearingKernel&, const SmearingKernel&) = default;

 private:
  DispersionLaw law_ = law::Delta{};
  double floor_ = 0.0;
};

inline double dispersion(const SmearingKernel& k, const Vec3& reading) {
  if (const auto* fw = std::get_if<law::FixedWidth>(&k.law())) return fw->variance;
  if (const auto* nv = std::get_if<law::NgVanDam>(&k.law())) {
    const double d = std::cbrt(nv->planck_length * nv->planck_length) *
                     std::cbrt(nv->planck_length * nv->planck_length) *
                     std::cbrt(norm2(reading));
    return std::max(d, k.dispersion_floor());
  }
  return 0.0;
}

/// Per-axis standard deviation sqrt(D/2).
inline double axis_sigma(const SmearingKernel& k, const Vec3& reading) {
  return std::sqrt(dispersion(k, reading) / 2);
}

inline double density(const SmearingKernel& k, const Vec3& u, const Vec3& reading) {
  const double d = dispersion(k, reading);
  detail::require(d > 0, ErrorCode::DeltaKernelHasNoDensity,
                  "zero dispersion has no pointwise density");
  return std::pow(std::numbers::pi * d, -1.5) * std::exp(-norm2(reading - u) / d);
}

/// Draws a fiducial position u given the reading. Advances `rng` only when
/// the dispersion is non-zero.
inline Vec3 sample(const SmearingKernel& k, const Vec3& reading, Rng& rng) {
  const double sigma = axis_sigma(k, reading);
  if (sigma == 0.0) return reading;
  std::normal_distribution<double> gauss(0.0, sigma);
  Vec3 u = reading;
  u.x += gauss(rng);
  u.y += gauss(rng);
  u.z += gauss(rng);
  return u;
}

inline double truncation_radius(const SmearingKernel& k, const Vec3& reading, double n_sigma) {
  detail::require(n_sigma > 0, ErrorCode::InvalidArgument, "n_sigma must be positive");
  return n_sigma * axis_sigma(k, reading);
}

}  // namespace rodbell
