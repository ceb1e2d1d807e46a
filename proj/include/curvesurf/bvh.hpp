#pragma once

#include "curvesurf/curve_graph.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace curvesurf {

/// Watertight segment/triangle intersection state for one segment
/// (Woop, Benthin, Wald 2013). Parameter t is in [0,1] along org -> dest.
struct SegmentQuery {
  Vec3 org;
  Vec3 dir;  // dest - org
  int kx, ky, kz;
  double sx, sy, sz;

  SegmentQuery(const Vec3& origin, const Vec3& dest);

  /// Intersection parameter if the segment crosses the triangle.
  std::optional<double> hit(const Vec3& a, const Vec3& b, const Vec3& c) const;
};

struct TriRef {
  std::array<Vec3, 3> v;
  int payload = 0;  // caller-defined (hypothesis id, triangle index, ...)
};

/// Binary AABB tree over a triangle soup. Median split on the widest
/// centroid axis, built once, immutable afterwards.
class Bvh {
 public:
  Bvh() = default;
  explicit Bvh(std::vector<TriRef> tris);

  bool empty() const { return tris_.empty(); }
  const std::vector<TriRef>& triangles() const { return tris_; }
  Aabb bounds() const { return nodes_.empty() ? Aabb{} : nodes_[0].box; }

  /// True if any triangle with accept(payload)==true intersects the open
  /// segment at t in (t_min, t_max).
  bool any_hit(const Vec3& org, const Vec3& dest, double t_min, double t_max,
               const std::function<bool(int)>& accept = {}) const;

  /// Distance from p to the nearest triangle (clamped search, exact within
  /// floating tolerance). Returns +inf for an empty tree.
  double nearest_distance(const Vec3& p) const;

 private:
  struct Node {
    Aabb box;
    int left = -1;   // internal: child index; leaf: first triangle
    int right = -1;  // internal: child index; leaf: -1
    int count = 0;   // leaf triangle count, 0 for internal nodes
  };

  int build(std::vector<int>& order, int begin, int end);

  std::vector<TriRef> tris_;
  std::vector<Node> nodes_;
};

/// Serial reference: tests every triangle. Kept as the oracle the BVH is
/// validated against and as the baseline in the benchmark tool.
bool any_hit_linear(const std::vector<TriRef>& tris, const Vec3& org, const Vec3& dest,
                    double t_min, double t_max, const std::function<bool(int)>& accept = {});

enum class TraceBackend { bvh, linear };

std::vector<TriRef> to_tri_refs(const TriMesh& mesh, int payload = 0);

}  // namespace curvesurf
