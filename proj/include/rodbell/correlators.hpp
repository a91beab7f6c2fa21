#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "rodbell/error.hpp"
#include "rodbell/estimate.hpp"
#include "rodbell/geometry.hpp"
#include "rodbell/kernel.hpp"
#include "rodbell/quadrature.hpp"
#include "rodbell/random.hpp"

namespace rodbell {

//---------------------------------------------------------------------------//
// Configuration types
//---------------------------------------------------------------------------//

/// Supports v1, v2 of the two particles in (|v1,+;v2,-> + |v1,-;v2,+>)/sqrt(2 V1 V2).
class PairState {
 public:
  PairState(Region v1, Region v2) : v1_(std::move(v1)), v2_(std::move(v2)) {
    detail::require(detail::disjoint(v1_, v2_), ErrorCode::InvalidArgument,
                    "particle regions v1 and v2 must be disjoint");
  }

  const Region& v1() const { return v1_; }
  const Region& v2() const { return v2_; }

 private:
  Region v1_;
  Region v2_;
};

/// A detector: its region shape (centered at the origin) and the rod reading
/// at which it is evaluated.
class DetectorSpec {
 public:
  DetectorSpec(Region tmpl, const Vec3& reading) : template_(std::move(tmpl)), reading_(reading) {
    detail::require(template_.center() == Vec3{}, ErrorCode::InvalidArgument,
                    "detector template must be centered at the origin");
    detail::require(is_finite(reading_), ErrorCode::InvalidArgument,
                    "detector reading must be finite");
  }

  const Region& shape() const { return template_; }
  const Vec3& reading() const { return reading_; }

  /// Detector volume placed at fiducial center `x`.
  Region at(const Vec3& x) const { return translate(template_, x); }

 private:
  Region template_;
  Vec3 reading_;
};

/*!
 * Full two-particle CHSH setup.
 *
 * Geometry (particle regions and readings) is given in the experiment's local
 * frame; `origin_offset` is the position of that frame as seen from the rod
 * origin. Only the dispersion sees the offset: the kernel is evaluated at
 * reading + origin_offset while every overlap is computed locally.
 */
struct ExperimentConfig {
  PairState state;
  DetectorSpec detector_x;
  DetectorSpec detector_y;
  SmearingKernel kernel;
  Vec3 origin_offset{};
};

enum class EngineMethod { Auto, Closed, Quadrature, MonteCarlo };

constexpr std::string_view to_string(EngineMethod m) {
  switch (m) {
    case EngineMethod::Auto: return "auto";
    case EngineMethod::Closed: return "closed";
    case EngineMethod::Quadrature: return "quadrature";
    case EngineMethod::MonteCarlo: return "mc";
  }
  return "unknown";
}

/// Evaluation route and effort for smeared integrals.
struct Engine {
  EngineMethod method = EngineMethod::Auto;
  std::int64_t samples = 100000;  // Monte Carlo samples per integral
  int nodes = 32;                 // Gauss-Legendre nodes per panel
  double n_sigma = 8.0;           // quadrature truncation
  std::uint64_t seed = 0;

  Engine with_seed(std::uint64_t s) const {
    Engine e = *this;
    e.seed = s;
    return e;
  }
  /// Engine for independent sub-integral `k`.
  Engine substream(std::uint64_t k) const { return with_seed(stream_seed(seed, k)); }
};

struct SpinComponent {
  Region region;
  int spin = 1;  // +1 or -1
  double weight = 1.0;
};

/// Single-particle density matrix as a weighted mixture of localized spin states.
class SingleParticleState {
 public:
  explicit SingleParticleState(std::vector<SpinComponent> components)
      : components_(std::move(components)) {
    detail::require(!components_.empty(), ErrorCode::InvalidArgument,
                    "single-particle state needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
      detail::require(c.spin == 1 || c.spin == -1, ErrorCode::InvalidArgument,
                      "component spin must be +1 or -1");
      detail::require(c.weight > 0 && std::isfinite(c.weight), ErrorCode::InvalidArgument,
                      "component weight must be positive");
      total += c.weight;
    }
    detail::require(std::abs(total - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
                    "component weights must sum to 1");
  }

  const std::vector<SpinComponent>& components() const { return components_; }

 private:
  std::vector<SpinComponent> components_;
};

//---------------------------------------------------------------------------//
// One-dimensional building blocks
//---------------------------------------------------------------------------//

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2 * std::numbers::pi));
}

/// Length of [c - a, c + a] intersected with [t0, t1].
inline double window_overlap(double c, double a, double t0, double t1) {
  return std::max(0.0, std::min(c + a, t1) - std::max(c - a, t0));
}

/// H(-|z|) where H(z) = z Phi(z) + phi(z) is the antiderivative of Phi.
inline double gauss_tail_antiderivative(double z) {
  const double az = std::abs(z);
  const double phi = std::exp(-0.5 * az * az) / std::sqrt(2 * std::numbers::pi);
  return phi - az * normal_cdf(-az);
}

/*!
 * E[len([x - a, x + a] intersect [t0, t1])] for x ~ N(mu, sigma^2).
 *
 * The length is the integral over s in [t0, t1] of P(|x - s| < a), and
 * integrating Phi in closed form gives four antiderivative terms. Writing
 * H(z) = max(z, 0) + H(-|z|) splits off the piecewise-linear part, which
 * is exactly the unsmeared overlap, leaving a small Gaussian correction free
 * of cancellation.
 */
inline double smeared_window_overlap(double mu, double a, double sigma, double t0, double t1) {
  const double exact = window_overlap(mu, a, t0, t1);
  if (sigma == 0.0) return exact;
  auto h = [&](double t, double c) { return gauss_tail_antiderivative((t + c - mu) / sigma); };
  const double corr = h(t1, a) - h(t0, a) - h(t1, -a) + h(t0, -a);
  return exact + sigma * corr;
}

/// P(|x - s| < a) for x ~ N(mu, sigma^2); an indicator when sigma == 0.
inline double window_probability(double s, double mu, double a, double sigma) {
  if (sigma == 0.0) return std::abs(s - mu) < a ? 1.0 : 0.0;
  const double z1 = (s + a - mu) / sigma;
  const double z0 = (s - a - mu) / sigma;
  if (z0 > 0) return normal_cdf(-z0) - normal_cdf(-z1);
  return normal_cdf(z1) - normal_cdf(z0);
}

/// One axis of a smeared detector: center mu, half width a, per-axis sigma.
struct AxisWindow {
  double mu = 0.0;
  double half = 0.0;
  double sigma = 0.0;

  double support_lo(double n) const { return mu - half - n * sigma; }
  double support_hi(double n) const { return mu + half + n * sigma; }
};

/*!
 * Integral over s in [t0, t1] of P_x(s) * P_y(s): the one-axis factor of the
 * doubly smeared triple overlap. The integrand is a product of smooth erf
 * differences, so adaptive Gauss-Kronrod converges to rounding level.
 */
inline double triple_window_overlap(AxisWindow wx, AxisWindow wy, double t0, double t1) {
  // Work relative to t0 so a joint shift of all inputs does not move the nodes.
  wx.mu -= t0;
  wy.mu -= t0;
  t1 -= t0;
  t0 = 0.0;
  // Beyond 12 sigma the window probabilities are below 1e-32.
  constexpr double kReach = 12.0;
  const double lo = std::max({t0, wx.support_lo(kReach), wy.support_lo(kReach)});
  const double hi = std::min({t1, wx.support_hi(kReach), wy.support_hi(kReach)});
  if (!(hi > lo)) return 0.0;
  if (wx.sigma == 0.0 && wy.sigma == 0.0) return hi - lo;
  auto f = [&](double s) {
    return window_probability(s, wx.mu, wx.half, wx.sigma) *
           window_probability(s, wy.mu, wy.half, wy.sigma);
  };
  return quad::adaptive(f, lo, hi,
                        {wx.mu - wx.half, wx.mu + wx.half, wy.mu - wy.half, wy.mu + wy.half})
      .value;
}

/// Gauss-Legendre evaluation of E[len] against the raw piecewise-linear
/// integrand, with panels split at its kinks.
inline double quadrature_window_overlap(const AxisWindow& w, double t0, double t1,
                                        double n_sigma, const quad::GaussLegendre& gl) {
  if (w.sigma == 0.0) return window_overlap(w.mu, w.half, t0, t1);
  const double a = w.half;
  const double lo = std::max(w.mu - n_sigma * w.sigma, t0 - a);
  const double hi = std::min(w.mu + n_sigma * w.sigma, t1 + a);
  auto f = [&](double x) { return normal_pdf(x, w.mu, w.sigma) * window_overlap(x, a, t0, t1); };
  return gl.integrate_panels(f, lo, hi, {t0 - a, t0 + a, t1 - a, t1 + a});
}

/// Iterated Gauss-Legendre for the doubly smeared triple overlap on one axis.
inline double quadrature_triple_window_overlap(const AxisWindow& wx, const AxisWindow& wy,
                                               double t0, double t1, double n_sigma,
                                               const quad::GaussLegendre& gl) {
  const double a = wx.half;
  const double b = wy.half;
  // Inner integral over the y detector center for a fixed x center.
  auto inner = [&](double x) {
    const double l = std::max(x - a, t0);
    const double r = std::min(x + a, t1);
    if (!(r > l)) return 0.0;
    if (wy.sigma == 0.0) return window_overlap(wy.mu, b, l, r);
    const double lo = std::max(wy.mu - n_sigma * wy.sigma, l - b);
    const double hi = std::min(wy.mu + n_sigma * wy.sigma, r + b);
    auto g = [&](double y) {
      return normal_pdf(y, wy.mu, wy.sigma) * window_overlap(y, b, l, r);
    };
    return gl.integrate_panels(g, lo, hi, {l - b, l + b, r - b, r + b});
  };
  if (wx.sigma == 0.0) return inner(wx.mu);
  const double lo = std::max(wx.mu - n_sigma * wx.sigma, t0 - a);
  const double hi = std::min(wx.mu + n_sigma * wx.sigma, t1 + a);
  auto f = [&](double x) { return normal_pdf(x, wx.mu, wx.sigma) * inner(x); };
  return gl.integrate_panels(f, lo, hi, {t0 - a, t0 + a, t1 - a, t1 + a});
}

//---------------------------------------------------------------------------//
// Smeared integrals over placed detectors
//---------------------------------------------------------------------------//

/// Detector template placed at a local-frame reading with a fixed per-axis sigma.
struct Placed {
  Region shape;
  Vec3 reading;
  double sigma = 0.0;

  AxisWindow axis(int i) const {
    return {reading[i], shape.as_box().half_extents[i], sigma};
  }
};

inline Vec3 gaussian_offset(double sigma, Rng& rng) {
  if (sigma == 0.0) return {};
  std::normal_distribution<double> g(0.0, sigma);
  Vec3 v;
  v.x = g(rng);
  v.y = g(rng);
  v.z = g(rng);
  return v;
}

enum class Route { Exact, Closed, Quadrature, MonteCarlo };

inline void check_effort(const Engine& e, Route r) {
  if (r == Route::MonteCarlo) {
    require(e.samples > 0, ErrorCode::NonPositiveEffort, "Monte Carlo sample count must be positive");
  }
  if (r == Route::Quadrature) {
    require(e.nodes > 0, ErrorCode::NonPositiveEffort, "quadrature node count must be positive");
    require(e.n_sigma > 0, ErrorCode::InvalidArgument, "n_sigma must be positive");
  }
}

inline Route choose_route(const Engine& e, bool all_box, bool all_delta) {
  if (all_delta) {
    // Unsmeared: a plain overlap volume; only non-analytic shapes need samples.
    return Route::Exact;
  }
  switch (e.method) {
    case EngineMethod::Auto: return all_box ? Route::Closed : Route::MonteCarlo;
    case EngineMethod::Closed:
      require(all_box, ErrorCode::ClosedFormUnavailable,
              "closed form requires box detectors and box targets");
      return Route::Closed;
    case EngineMethod::Quadrature:
      require(all_box, ErrorCode::ClosedFormUnavailable,
              "quadrature requires box detectors and box targets");
      return Route::Quadrature;
    case EngineMethod::MonteCarlo: return Route::MonteCarlo;
  }
  return Route::MonteCarlo;
}

/// Unsmeared overlap, honouring the requested method for non-analytic shapes.
inline Estimate exact_overlap(std::span<const Region> regions, const Engine& e) {
  const auto sorted = canonicalize(regions);
  if (auto v = analytic_overlap(sorted)) return Estimate::exact(*v);
  require(e.method == EngineMethod::Auto || e.method == EngineMethod::MonteCarlo,
          ErrorCode::ClosedFormUnavailable, "region overlap has no analytic rule");
  return overlap_volume(sorted, McSpec{e.samples, e.seed});
}

/// Running mean and variance (Welford).
struct Accumulator {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  Estimate estimate() const {
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n)), Method::MonteCarlo, n};
  }
};

/// Estimate of the quadrature error from a rule with roughly half the nodes.
inline Estimate quadrature_estimate(double fine, double coarse, std::int64_t nodes) {
  return {fine, std::abs(fine - coarse), Method::Quadrature, nodes};
}

/// integral d^3x P(x) V(v_x ∩ target)
inline Estimate smeared_overlap(const Placed& d, const Region& target, const Engine& e) {
  const bool all_box = d.shape.is_box() && target.is_box();
  const Route route = choose_route(e, all_box, d.sigma == 0.0);
  check_effort(e, route);
  switch (route) {
    case Route::Exact: {
      const Region regions[] = {translate(d.shape, d.reading), target};
      return exact_overlap(regions, e);
    }
    case Route::Closed: {
      const Box& t = target.as_box();
      double v = 1.0;
      for (int i = 0; i < 3; ++i) {
        const auto w = d.axis(i);
        v *= smeared_window_overlap(w.mu, w.half, w.sigma, t.lo(i), t.hi(i));
      }
      return Estimate::exact(v);
    }
    case Route::Quadrature: {
      const Box& t = target.as_box();
      const quad::GaussLegendre fine(e.nodes), coarse(std::max(1, e.nodes / 2));
      double vf = 1.0, vc = 1.0;
      for (int i = 0; i < 3; ++i) {
        vf *= quadrature_window_overlap(d.axis(i), t.lo(i), t.hi(i), e.n_sigma, fine);
        vc *= quadrature_window_overlap(d.axis(i), t.lo(i), t.hi(i), e.n_sigma, coarse);
      }
      return quadrature_estimate(vf, vc, e.nodes);
    }
    case Route::MonteCarlo: {
      Rng rng = make_rng(e.seed);
      Accumulator acc;
      for (std::int64_t k = 0; k < e.samples; ++k) {
        const Vec3 x = d.reading + gaussian_offset(d.sigma, rng);
        const Region regions[] = {translate(d.shape, x), target};
        acc.add(overlap_sample(regions, rng));
      }
      return acc.estimate();
    }
  }
  return {};
}

/// integral d^3x d^3y P(x) P(y) V(v_x ∩ v_y ∩ target)
inline Estimate triple_overlap_term(const Placed& dx, const Placed& dy, const Region& target,
                                    const Engine& e) {
  const bool all_box = dx.shape.is_box() && dy.shape.is_box() && target.is_box();
  const Route route = choose_route(e, all_box, dx.sigma == 0.0 && dy.sigma == 0.0);
  check_effort(e, route);
  switch (route) {
    case Route::Exact: {
      const Region regions[] = {translate(dx.shape, dx.reading), translate(dy.shape, dy.reading),
                                target};
      return exact_overlap(regions, e);
    }
    case Route::Closed: {
      const Box& t = target.as_box();
      double v = 1.0;
      for (int i = 0; i < 3 && v != 0.0; ++i) {
        v *= triple_window_overlap(dx.axis(i), dy.axis(i), t.lo(i), t.hi(i));
      }
      return Estimate::exact(v);
    }
    case Route::Quadrature: {
      const Box& t = target.as_box();
      const quad::GaussLegendre fine(e.nodes), coarse(std::max(1, e.nodes / 2));
      double vf = 1.0, vc = 1.0;
      for (int i = 0; i < 3; ++i) {
        vf *= quadrature_triple_window_overlap(dx.axis(i), dy.axis(i), t.lo(i), t.hi(i),
                                               e.n_sigma, fine);
        vc *= quadrature_triple_window_overlap(dx.axis(i), dy.axis(i), t.lo(i), t.hi(i),
                                               e.n_sigma, coarse);
      }
      return quadrature_estimate(vf, vc, e.nodes);
    }
    case Route::MonteCarlo: {
      Rng rng = make_rng(e.seed);
      Accumulator acc;
      for (std::int64_t k = 0; k < e.samples; ++k) {
        const Vec3 x = dx.reading + gaussian_offset(dx.sigma, rng);
        const Vec3 y = dy.reading + gaussian_offset(dy.sigma, rng);
        const Region regions[] = {translate(dx.shape, x), translate(dy.shape, y), target};
        acc.add(overlap_sample(regions, rng));
      }
      return acc.estimate();
    }
  }
  return {};
}

inline Placed place(const DetectorSpec& d, const SmearingKernel& k, const Vec3& origin_offset) {
  return {d.shape(), d.reading(), axis_sigma(k, d.reading() + origin_offset)};
}

}  // namespace detail

//---------------------------------------------------------------------------//
// Public smeared integrals
//---------------------------------------------------------------------------//

/// Expected overlap of the smeared detector with `target`:
/// integral d^3x P_x(X) V(v_x ∩ target).
inline Estimate smeared_overlap(const DetectorSpec& detector, const Region& target,
                                const SmearingKernel& kernel, const Engine& engine) {
  return detail::smeared_overlap(detail::place(detector, kernel, {}), target, engine);
}

/// integral d^3x d^3y P_x(X) P_y(Y) V(v_x ∩ v_y ∩ target)
inline Estimate triple_overlap_term(const DetectorSpec& dx, const DetectorSpec& dy,
                                    const Region& target, const SmearingKernel& kernel,
                                    const Engine& engine) {
  return detail::triple_overlap_term(detail::place(dx, kernel, {}), detail::place(dy, kernel, {}),
                                     target, engine);
}

/// Every smeared overlap entering the two-particle correlators.
struct CorrelatorTerms {
  double v1 = 0.0;
  double v2 = 0.0;
  Estimate sx1, sx2, sy1, sy2;  // single-detector overlaps with v1, v2
  Estimate t1, t2;              // joint x, y overlaps inside v1, v2

  /// (S(x;v1) S(y;v2) + S(x;v2) S(y;v1)) / (V1 V2)
  Estimate cross() const {
    return scaled(linear_combination(std::pair{1.0, product(sx1, sy2)},
                                     std::pair{1.0, product(sx2, sy1)}),
                  1.0 / (v1 * v2));
  }
  /// T(v1)/V1 + T(v2)/V2
  Estimate diagonal() const {
    return linear_combination(std::pair{1.0 / v1, t1}, std::pair{1.0 / v2, t2});
  }
};

/// Sub-integral k uses engine.substream(k), so the six estimates are independent.
inline CorrelatorTerms correlator_terms(const ExperimentConfig& cfg, const Engine& engine,
                                        bool with_triple = true) {
  const auto px = detail::place(cfg.detector_x, cfg.kernel, cfg.origin_offset);
  const auto py = detail::place(cfg.detector_y, cfg.kernel, cfg.origin_offset);
  const Region& v1 = cfg.state.v1();
  const Region& v2 = cfg.state.v2();
  CorrelatorTerms t;
  t.v1 = volume(v1);
  t.v2 = volume(v2);
  t.sx1 = detail::smeared_overlap(px, v1, engine.substream(0));
  t.sx2 = detail::smeared_overlap(px, v2, engine.substream(1));
  t.sy1 = detail::smeared_overlap(py, v1, engine.substream(2));
  t.sy2 = detail::smeared_overlap(py, v2, engine.substream(3));
  if (with_triple) {
    t.t1 = detail::triple_overlap_term(px, py, v1, engine.substream(4));
    t.t2 = detail::triple_overlap_term(px, py, v2, engine.substream(5));
  }
  return t;
}

inline Estimate corr_zz(const CorrelatorTerms& t) {
  return linear_combination(std::pair{1.0, t.diagonal()}, std::pair{-1.0, t.cross()});
}

inline Estimate corr_xx(const CorrelatorTerms& t) {
  return linear_combination(std::pair{1.0, t.diagonal()}, std::pair{1.0, t.cross()});
}

/// <sigma^z(X) sigma^z(Y)> in the pair state.
inline Estimate corr_zz(const ExperimentConfig& cfg, const Engine& engine) {
  return corr_zz(correlator_terms(cfg, engine));
}

/// <sigma^x(X) sigma^x(Y)> in the pair state.
inline Estimate corr_xx(const ExperimentConfig& cfg, const Engine& engine) {
  return corr_xx(correlator_terms(cfg, engine));
}

/// <sigma^z(X) sigma^x(Y)>: sigma^z sigma^x maps the pair state onto ++ and
/// -- components orthogonal to it, so this vanishes for every geometry.
inline Estimate corr_zx(const ExperimentConfig&) { return Estimate::exact(0.0); }

/*!
 * Probability that the detector at reading X0 finds spin `epsilon0`:
 *
 *   sum_c w_c [s_c = epsilon0] integral d^3u P_u(X0) V(v_u ∩ region_c) / V(region_c)
 *
 * The kernel is normalized, so no explicit denominator is carried.
 */
inline Estimate conditional_probability(const SingleParticleState& state, int epsilon0,
                                        const DetectorSpec& detector,
                                        const SmearingKernel& kernel, const Engine& engine) {
  detail::require(epsilon0 == 1 || epsilon0 == -1, ErrorCode::InvalidArgument,
                  "epsilon0 must be +1 or -1");
  Estimate total = Estimate::exact(0.0);
  const auto& comps = state.components();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i].spin != epsilon0) continue;
    const auto s = smeared_overlap(detector, comps[i].region, kernel, engine.substream(i));
    total = linear_combination(std::pair{1.0, total},
                               std::pair{comps[i].weight / volume(comps[i].region), s});
  }
  return total;
}

}  // namespace rodbell
