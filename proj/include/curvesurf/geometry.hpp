#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvesurf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

/// Base error for anything the library refuses to process.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file (bad JSON, bad CSV row, bad OBJ line).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

/// Structurally well-formed data violating a domain invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Linear solver failed to reach the requested residual.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(what) {}
};

struct Aabb {
  Vec3 lo{Vec3::Constant(std::numeric_limits<double>::max())};
  Vec3 hi{Vec3::Constant(std::numeric_limits<double>::lowest())};

  void expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
  bool valid() const { return (lo.array() <= hi.array()).all(); }
  double distance2(const Vec3& p) const {
    Vec3 d = (lo - p).cwiseMax(0.0).cwiseMax(p - hi);
    return d.squaredNorm();
  }
};

inline Vec3 closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double denom = ab.squaredNorm();
  if (denom <= 0.0) return a;
  double t = std::clamp((p - a).dot(ab) / denom, 0.0, 1.0);
  return a + t * ab;
}

/// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Distance from p to an open or closed polyline.
double point_polyline_distance(const Vec3& p, std::span<const Vec3> pts, bool closed);

/// Moller 1997 interval-overlap test; shared vertices count as intersecting,
/// callers filter adjacency themselves.
bool tri_tri_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                       const Vec3& b0, const Vec3& b1, const Vec3& b2);

double polyline_length(std::span<const Vec3> pts, bool closed);

/// Unsigned angle between two vectors in [0, pi].
inline double angle_between(const Vec3& a, const Vec3& b) {
  double c = a.dot(b);
  double s = a.cross(b).norm();
  return std::atan2(s, c);
}

}  // namespace curvesurf
