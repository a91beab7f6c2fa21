#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rodbell/correlators.hpp"

namespace rodbell {

/// Tsirelson bound 2 sqrt(2): the largest quantum CHSH value.
inline constexpr double kTsirelson = 2 * std::numbers::sqrt2;

struct ChshResult {
  Estimate qs, rs, rt, qt;
  Estimate corr_zz, corr_xx;
  Estimate chsh;         // sqrt(2) (<xx> - <zz>)
  Estimate chsh_direct;  // (4/sqrt(2)) * cross overlap term
  double deficit = 0.0;  // 2 sqrt(2) - chsh
};

//---------------------------------------------------------------------------//
/*!
 * CHSH combination <QS + RS + RT - QT> with
 *   Q = sigma^z(X), R = sigma^x(X), S = (-sigma^z(Y) + sigma^x(Y))/sqrt(2),
 *   T = (sigma^z(Y) + sigma^x(Y))/sqrt(2).
 *
 * Two routes are evaluated from the same sub-integrals: sqrt(2)(<xx> - <zz>)
 * and the direct cross-term formula in which the triple overlaps never
 * appear. They must agree to max(1e-9, 4 stderr); otherwise the algebra is
 * broken and InternalInconsistency is raised.
 */
inline ChshResult chsh_value(const ExperimentConfig& cfg, const Engine& engine) {
  const CorrelatorTerms terms = correlator_terms(cfg, engine);
  ChshResult r;
  r.corr_zz = corr_zz(terms);
  r.corr_xx = corr_xx(terms);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  r.qs = scaled(r.corr_zz, -inv_sqrt2);
  r.rs = scaled(r.corr_xx, inv_sqrt2);
  r.rt = scaled(r.corr_xx, inv_sqrt2);
  r.qt = scaled(r.corr_zz, inv_sqrt2);

  r.chsh_direct = scaled(terms.cross(), 4.0 * inv_sqrt2);

  // The triple terms cancel exactly, so the uncertainty is that of the cross term.
  r.chsh.value = r.qs.value + r.rs.value + r.rt.value - r.qt.value;
  r.chsh.std_error = r.chsh_direct.std_error;
  r.chsh.method = combine(r.corr_zz.method, r.corr_xx.method);
  r.chsh.effort = r.corr_zz.effort;

  const double tol = std::max(1e-9, 4.0 * r.chsh.std_error);
  detail::require(std::abs(r.chsh.value - r.chsh_direct.value) <= tol,
                  ErrorCode::InternalInconsistency,
                  "CHSH routes disagree: " + std::to_string(r.chsh.value) + " vs " +
                      std::to_string(r.chsh_direct.value));
  r.deficit = kTsirelson - r.chsh.value;
  return r;
}

struct SpacelikeReport {
  bool ok = false;
  double diameter_x = 0.0;
  double diameter_y = 0.0;
  double separation = 0.0;  // |center(v1) - center(v2)|
};

/// Both detector diameters must be smaller than half the particle separation.
inline SpacelikeReport spacelike_check(const ExperimentConfig& cfg) {
  SpacelikeReport rep;
  rep.diameter_x = diameter(cfg.detector_x.shape());
  rep.diameter_y = diameter(cfg.detector_y.shape());
  rep.separation = norm(cfg.state.v1().center() - cfg.state.v2().center());
  rep.ok = rep.diameter_x < rep.separation / 2 && rep.diameter_y < rep.separation / 2;
  return rep;
}

//---------------------------------------------------------------------------//
// Four-particle suppression estimate
//---------------------------------------------------------------------------//

/// Two pairs: intra-pair separation delta, inter-pair separation d.
struct FourPairConfig {
  double delta = 0.0;
  double d = 0.0;
  double planck_length = 1.0;

  void validate() const {
    detail::require(delta > 0 && d > 0 && planck_length > 0 && std::isfinite(delta) &&
                        std::isfinite(d) && std::isfinite(planck_length),
                    ErrorCode::InvalidArgument, "delta, d and planck length must be positive");
    detail::require(d >= delta, ErrorCode::InvalidArgument, "d must be at least delta");
  }
};

/// (delta / (d^{1/3} lp^{2/3}))^2
inline double suppression_exponent(const FourPairConfig& fp) {
  fp.validate();
  const double lp13 = std::cbrt(fp.planck_length);
  const double ratio = fp.delta / (std::cbrt(fp.d) * lp13 * lp13);
  return ratio * ratio;
}

/// exp[-(delta / (d^{1/3} lp^{2/3}))^2]; underflows to 0 for exponents above ~745.
inline double suppression_factor(const FourPairConfig& fp) {
  return std::exp(-suppression_exponent(fp));
}

//---------------------------------------------------------------------------//
// Sweeps
//---------------------------------------------------------------------------//

struct SweepRecord {
  double parameter = 0.0;  // origin distance, or detector scale factor
  Estimate chsh;
  double deficit = 0.0;
  std::uint64_t seed = 0;
  std::optional<std::string> error;  // set when this record failed
};

namespace detail {

/// Runs body(i) for i in [0, n) on `jobs` threads; each index is written once.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
}

inline SweepRecord evaluate_record(double parameter, std::uint64_t seed,
                                   const std::function<ExperimentConfig()>& make_cfg,
                                   const Engine& engine) {
  SweepRecord rec;
  rec.parameter = parameter;
  rec.seed = seed;
  try {
    const auto res = chsh_value(make_cfg(), engine.with_seed(seed));
    rec.chsh = res.chsh;
    rec.deficit = res.deficit;
  } catch (const std::exception& ex) {
    rec.chsh = {std::nan(""), std::nan(""), Method::ClosedForm, 0};
    rec.deficit = std::nan("");
    rec.error = ex.what();
  }
  return rec;
}

}  // namespace detail

/*!
 * CHSH as the rod origin recedes along `direction`.
 *
 * Record i uses origin_offset = distances[i] * direction/|direction| and seed
 * stream_seed(engine.seed, i). Records are independent, so the result does
 * not depend on `jobs`. A failing record carries its error; the rest of the
 * sweep still runs.
 */
inline std::vector<SweepRecord> origin_sweep(const ExperimentConfig& base,
                                             std::span<const double> distances,
                                             const Vec3& direction, const Engine& engine,
                                             int jobs = 1) {
  const double len = norm(direction);
  detail::require(len > 0 && std::isfinite(len), ErrorCode::InvalidArgument,
                  "sweep direction must be non-zero");
  detail::require(std::is_sorted(distances.begin(), distances.end()),
                  ErrorCode::InvalidArgument, "sweep distances must be sorted ascending");
  for (double a : distances) {
    detail::require(a >= 0 && std::isfinite(a), ErrorCode::InvalidArgument,
                    "sweep distances must be non-negative");
  }
  const Vec3 unit = direction * (1.0 / len);
  std::vector<SweepRecord> out(distances.size());
  detail::parallel_for(distances.size(), jobs, [&](std::size_t i) {
    out[i] = detail::evaluate_record(
        distances[i], stream_seed(engine.seed, i),
        [&] {
          ExperimentConfig cfg = base;
          cfg.origin_offset = unit * distances[i];
          return cfg;
        },
        engine);
  });
  return out;
}

/// CHSH with both detector templates scaled isotropically by each factor.
inline std::vector<SweepRecord> detector_size_study(const ExperimentConfig& base,
                                                    std::span<const double> scale_factors,
                                                    const Engine& engine, int jobs = 1) {
  for (double s : scale_factors) {
    detail::require(s > 0 && std::isfinite(s), ErrorCode::InvalidArgument,
                    "scale factors must be positive");
  }
  std::vector<SweepRecord> out(scale_factors.size());
  detail::parallel_for(scale_factors.size(), jobs, [&](std::size_t i) {
    const double s = scale_factors[i];
    out[i] = detail::evaluate_record(
        s, stream_seed(engine.seed, i),
        [&] {
          return ExperimentConfig{
              base.state,
              DetectorSpec(scale(base.detector_x.shape(), s), base.detector_x.reading()),
              DetectorSpec(scale(base.detector_y.shape(), s), base.detector_y.reading()),
              base.kernel, base.origin_offset};
        },
        engine);
  });
  return out;
}

}  // namespace rodbell
