#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "rodbell/error.hpp"
#include "rodbell/estimate.hpp"
#include "rodbell/random.hpp"
#include "rodbell/vec3.hpp"

namespace rodbell {

struct Box {
  Vec3 center;
  Vec3 half_extents;

  double lo(int axis) const { return center[axis] - half_extents[axis]; }
  double hi(int axis) const { return center[axis] + half_extents[axis]; }

  friend auto operator<=>(const Box&, const Box&) = default;
};

struct Sphere {
  Vec3 center;
  double radius = 0.0;

  friend auto operator<=>(const Sphere&, const Sphere&) = default;
};

//---------------------------------------------------------------------------//
/*!
 * A spatial region of strictly positive, finite volume.
 *
 * Particle supports, detector volumes and rod cells are all Regions. The
 * factory functions validate the shape parameters; a Region that exists is
 * always valid.
 */
class Region {
 public:
  using Shape = std::variant<Box, Sphere>;

  static Region box(const Vec3& center, const Vec3& half_extents) {
    detail::require(is_finite(center) && is_finite(half_extents), ErrorCode::InvalidArgument,
                    "box center and half extents must be finite");
    detail::require(half_extents.x > 0 && half_extents.y > 0 && half_extents.z > 0,
                    ErrorCode::InvalidArgument, "box half extents must be positive");
    return Region(Box{center, half_extents});
  }

  static Region sphere(const Vec3& center, double radius) {
    detail::require(is_finite(center) && std::isfinite(radius), ErrorCode::InvalidArgument,
                    "sphere center and radius must be finite");
    detail::require(radius > 0, ErrorCode::InvalidArgument, "sphere radius must be positive");
    return Region(Sphere{center, radius});
  }

  const Shape& shape() const { return shape_; }
  bool is_box() const { return std::holds_alternative<Box>(shape_); }
  bool is_sphere() const { return std::holds_alternative<Sphere>(shape_); }
  const Box& as_box() const { return std::get<Box>(shape_); }
  const Sphere& as_sphere() const { return std::get<Sphere>(shape_); }

  Vec3 center() const {
    return std::visit([](const auto& s) { return s.center; }, shape_);
  }

  friend auto operator<=>(const Region&, const Region&) = default;
  friend bool operator==(const Region&, const Region&) = default;

 private:
  explicit Region(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

inline double volume(const Region& r) {
  if (r.is_box()) {
    const auto& h = r.as_box().half_extents;
    return (2 * h.x) * (2 * h.y) * (2 * h.z);
  }
  const double rad = r.as_sphere().radius;
  return 4.0 / 3.0 * std::numbers::pi * rad * rad * rad;
}

inline Region translate(const Region& r, const Vec3& a) {
  if (r.is_box()) {
    const auto& b = r.as_box();
    return Region::box(b.center + a, b.half_extents);
  }
  const auto& s = r.as_sphere();
  return Region::sphere(s.center + a, s.radius);
}

/// Same shape about the same center, linear size multiplied by `factor`.
inline Region scale(const Region& r, double factor) {
  detail::require(factor > 0 && std::isfinite(factor), ErrorCode::InvalidArgument,
                  "scale factor must be positive");
  if (r.is_box()) {
    const auto& b = r.as_box();
    return Region::box(b.center, b.half_extents * factor);
  }
  const auto& s = r.as_sphere();
  return Region::sphere(s.center, s.radius * factor);
}

/// Euclidean diameter: the space diagonal for boxes.
inline double diameter(const Region& r) {
  if (r.is_box()) return 2 * norm(r.as_box().half_extents);
  return 2 * r.as_sphere().radius;
}

inline Box bounding_box(const Region& r) {
  if (r.is_box()) return r.as_box();
  const auto& s = r.as_sphere();
  return {s.center, {s.radius, s.radius, s.radius}};
}

inline bool contains(const Region& r, const Vec3& p) {
  if (r.is_box()) {
    const auto& b = r.as_box();
    for (int i = 0; i < 3; ++i) {
      if (!(std::abs(p[i] - b.center[i]) < b.half_extents[i])) return false;
    }
    return true;
  }
  const auto& s = r.as_sphere();
  return norm2(p - s.center) < s.radius * s.radius;
}

/// Exact two-sphere intersection volume (lens formula).
inline double lens_volume(double r1, double r2, double d) {
  if (d >= r1 + r2) return 0.0;
  if (d <= std::abs(r1 - r2)) {
    const double r = std::min(r1, r2);
    return 4.0 / 3.0 * std::numbers::pi * r * r * r;
  }
  const double s = r1 + r2 - d;
  const double q = r1 - r2;
  return std::numbers::pi * s * s * (d * d + 2 * d * (r1 + r2) - 3 * q * q) / (12 * d);
}

namespace detail {

inline double squared_distance_to_box(const Vec3& p, const Box& b) {
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double excess = std::abs(p[i] - b.center[i]) - b.half_extents[i];
    if (excess > 0) d2 += excess * excess;
  }
  return d2;
}

/// True when the intersection of a and b has zero measure.
inline bool disjoint(const Region& a, const Region& b) {
  if (a.is_box() && b.is_box()) {
    const auto& p = a.as_box();
    const auto& q = b.as_box();
    for (int i = 0; i < 3; ++i) {
      if (std::min(p.hi(i), q.hi(i)) <= std::max(p.lo(i), q.lo(i))) return true;
    }
    return false;
  }
  if (a.is_sphere() && b.is_sphere()) {
    const auto& p = a.as_sphere();
    const auto& q = b.as_sphere();
    return norm(p.center - q.center) >= p.radius + q.radius;
  }
  const auto& box = a.is_box() ? a.as_box() : b.as_box();
  const auto& sph = a.is_sphere() ? a.as_sphere() : b.as_sphere();
  return squared_distance_to_box(sph.center, box) >= sph.radius * sph.radius;
}

/// True when `inner` lies inside `outer` (up to a null set).
inline bool contained_in(const Region& inner, const Region& outer) {
  if (outer.is_box()) {
    const auto& o = outer.as_box();
    const Box in = bounding_box(inner);
    for (int i = 0; i < 3; ++i) {
      if (in.lo(i) < o.lo(i) || in.hi(i) > o.hi(i)) return false;
    }
    return true;
  }
  const auto& o = outer.as_sphere();
  if (inner.is_sphere()) {
    const auto& s = inner.as_sphere();
    return norm(s.center - o.center) + s.radius <= o.radius;
  }
  // Farthest corner of the box from the sphere center.
  const auto& b = inner.as_box();
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double far = std::abs(b.center[i] - o.center[i]) + b.half_extents[i];
    d2 += far * far;
  }
  return d2 <= o.radius * o.radius;
}

inline int shape_rank(const Region& r) { return r.is_box() ? 0 : 1; }

/// Canonical order: center, then shape, then size. Duplicates removed.
inline std::vector<Region> canonicalize(std::span<const Region> regions) {
  std::vector<Region> out(regions.begin(), regions.end());
  std::sort(out.begin(), out.end(), [](const Region& a, const Region& b) {
    if (a.center() != b.center()) return a.center() < b.center();
    if (shape_rank(a) != shape_rank(b)) return shape_rank(a) < shape_rank(b);
    return a < b;
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline double box_overlap(std::span<const Region> boxes) {
  double v = 1.0;
  for (int i = 0; i < 3; ++i) {
    double lo = boxes.front().as_box().lo(i);
    double hi = boxes.front().as_box().hi(i);
    for (const auto& r : boxes.subspan(1)) {
      lo = std::max(lo, r.as_box().lo(i));
      hi = std::min(hi, r.as_box().hi(i));
    }
    if (hi <= lo) return 0.0;
    v *= hi - lo;
  }
  return v;
}

/// Exact overlap of a canonicalized list, when one of the analytic rules applies.
inline std::optional<double> analytic_overlap(std::span<const Region> regions) {
  if (regions.size() == 1) return volume(regions.front());
  if (std::all_of(regions.begin(), regions.end(), [](const Region& r) { return r.is_box(); })) {
    return box_overlap(regions);
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      if (disjoint(regions[i], regions[j])) return 0.0;
    }
  }
  if (regions.size() == 2 && regions[0].is_sphere() && regions[1].is_sphere()) {
    const auto& p = regions[0].as_sphere();
    const auto& q = regions[1].as_sphere();
    return lens_volume(p.radius, q.radius, norm(p.center - q.center));
  }
  // One region inside all others.
  for (const auto& inner : regions) {
    bool inside_all = true;
    for (const auto& outer : regions) {
      if (&inner != &outer && !contained_in(inner, outer)) {
        inside_all = false;
        break;
      }
    }
    if (inside_all) return volume(inner);
  }
  return std::nullopt;
}

/// Intersection of all bounding boxes, or nullopt when it is empty.
inline std::optional<Box> proposal_box(std::span<const Region> regions) {
  Vec3 lo, hi;
  for (int i = 0; i < 3; ++i) {
    lo[i] = bounding_box(regions.front()).lo(i);
    hi[i] = bounding_box(regions.front()).hi(i);
    for (const auto& r : regions.subspan(1)) {
      lo[i] = std::max(lo[i], bounding_box(r).lo(i));
      hi[i] = std::min(hi[i], bounding_box(r).hi(i));
    }
    if (hi[i] <= lo[i]) return std::nullopt;
  }
  return Box{(lo + hi) * 0.5, (hi - lo) * 0.5};
}

inline Vec3 uniform_point(const Box& b, Rng& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vec3 p;
  for (int i = 0; i < 3; ++i) p[i] = b.center[i] + b.half_extents[i] * unit(rng);
  return p;
}

inline bool inside_all(std::span<const Region> regions, const Vec3& p) {
  return std::all_of(regions.begin(), regions.end(),
                     [&](const Region& r) { return contains(r, p); });
}

/// One unbiased sample of the overlap volume: exact where analytic,
/// otherwise proposal volume times a single hit indicator.
inline double overlap_sample(std::span<const Region> regions, Rng& rng) {
  const auto sorted = canonicalize(regions);
  if (auto exact = analytic_overlap(sorted)) return *exact;
  const auto prop = proposal_box(sorted);
  if (!prop) return 0.0;
  const Box b = *prop;
  const double vprop = 8 * b.half_extents.x * b.half_extents.y * b.half_extents.z;
  return inside_all(sorted, uniform_point(b, rng)) ? vprop : 0.0;
}

}  // namespace detail

/// Monte Carlo effort for overlap configurations without an analytic rule.
struct McSpec {
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Hit-sampling estimate of the overlap volume, whatever the shapes: uniform
/// points in the intersection of the bounding boxes, binomial standard error.
inline Estimate overlap_volume_mc(std::span<const Region> regions, const McSpec& mc) {
  detail::require(!regions.empty(), ErrorCode::EmptyRegionList,
                  "overlap_volume needs at least one region");
  detail::require(mc.samples > 0, ErrorCode::NonPositiveEffort,
                  "Monte Carlo sample count must be positive");
  const auto sorted = detail::canonicalize(regions);
  const auto prop = detail::proposal_box(sorted);
  if (!prop) return {0.0, 0.0, Method::MonteCarlo, mc.samples};
  const Box b = *prop;
  const double vprop = 8 * b.half_extents.x * b.half_extents.y * b.half_extents.z;

  Rng rng = make_rng(mc.seed);
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < mc.samples; ++i) {
    if (detail::inside_all(sorted, detail::uniform_point(b, rng))) ++hits;
  }
  const double n = static_cast<double>(mc.samples);
  const double p = static_cast<double>(hits) / n;
  return {vprop * p, vprop * std::sqrt(p * (1 - p) / n), Method::MonteCarlo, mc.samples};
}

//---------------------------------------------------------------------------//
/*!
 * Volume of the intersection of all regions in the list.
 *
 * Exact rules: any all-box list (per-axis interval product), a single region,
 * two spheres (lens formula), any list containing an exactly-disjoint pair,
 * and any list where one member lies inside all the others. Everything else
 * (sphere triples, generic box/sphere mixtures) is estimated by uniform hit
 * sampling in the intersection of the bounding boxes; the standard error is
 * the binomial one.
 */
inline Estimate overlap_volume(std::span<const Region> regions,
                               std::optional<McSpec> mc = std::nullopt) {
  detail::require(!regions.empty(), ErrorCode::EmptyRegionList,
                  "overlap_volume needs at least one region");
  const auto sorted = detail::canonicalize(regions);
  if (auto exact = detail::analytic_overlap(sorted)) return Estimate::exact(*exact);

  detail::require(mc.has_value(), ErrorCode::MissingMonteCarloParams,
                  "no analytic rule for this region list; Monte Carlo parameters required");
  return overlap_volume_mc(sorted, *mc);
}

inline Estimate overlap_volume(std::initializer_list<Region> regions,
                               std::optional<McSpec> mc = std::nullopt) {
  return overlap_volume(std::span<const Region>(regions.begin(), regions.size()), mc);
}

}  // namespace rodbell
