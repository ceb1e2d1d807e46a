#include "curvesurf/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace curvesurf {

SegmentQuery::SegmentQuery(const Vec3& origin, const Vec3& dest) : org(origin), dir(dest - origin) {
  Vec3 ad = dir.cwiseAbs();
  kz = 0;
  if (ad[1] > ad[kz]) kz = 1;
  if (ad[2] > ad[kz]) kz = 2;
  kx = (kz + 1) % 3;
  ky = (kz + 2) % 3;
  if (dir[kz] < 0.0) std::swap(kx, ky);
  sx = dir[kx] / dir[kz];
  sy = dir[ky] / dir[kz];
  sz = 1.0 / dir[kz];
}

std::optional<double> SegmentQuery::hit(const Vec3& a, const Vec3& b, const Vec3& c) const {
  const Vec3 A = a - org, B = b - org, C = c - org;

  const double ax = A[kx] - sx * A[kz], ay = A[ky] - sy * A[kz];
  const double bx = B[kx] - sx * B[kz], by = B[ky] - sy * B[kz];
  const double cx = C[kx] - sx * C[kz], cy = C[ky] - sy * C[kz];

  double u = cx * by - cy * bx;
  double v = ax * cy - ay * cx;
  double w = bx * ay - by * ax;

  // Double-precision edge tests are already the fallback tier of the float
  // scheme; recompute near-zero terms in long double to keep watertightness.
  if (u == 0.0 || v == 0.0 || w == 0.0) {
    u = static_cast<double>(static_cast<long double>(cx) * by - static_cast<long double>(cy) * bx);
    v = static_cast<double>(static_cast<long double>(ax) * cy - static_cast<long double>(ay) * cx);
    w = static_cast<double>(static_cast<long double>(bx) * ay - static_cast<long double>(by) * ax);
  }

  if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return std::nullopt;

  double det = u + v + w;
  if (det == 0.0) return std::nullopt;

  const double az = sz * A[kz], bz = sz * B[kz], cz = sz * C[kz];
  const double t_scaled = u * az + v * bz + w * cz;
  double t = t_scaled / det;
  if (!std::isfinite(t)) return std::nullopt;
  return t;
}

std::vector<TriRef> to_tri_refs(const TriMesh& mesh, int payload) {
  std::vector<TriRef> out;
  out.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces)
    out.push_back({{mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]}, payload});
  return out;
}

namespace {

Aabb tri_bounds(const TriRef& t) {
  Aabb b;
  b.expand(t.v[0]);
  b.expand(t.v[1]);
  b.expand(t.v[2]);
  return b;
}

constexpr int kLeafSize = 4;

// Conservative slab test with an inflation factor so rounding in the
// reciprocal direction cannot cull true hits (Ize 2013).
constexpr double kSlabPad = 1.0 + 6e-16;

bool segment_hits_box(const Aabb& box, const Vec3& org, const Vec3& inv_dir, double t_min,
                      double t_max) {
  double t0 = t_min, t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    double near = (box.lo[a] - org[a]) * inv_dir[a];
    double far = (box.hi[a] - org[a]) * inv_dir[a];
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far * kSlabPad);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

Bvh::Bvh(std::vector<TriRef> tris) : tris_(std::move(tris)) {
  if (tris_.empty()) return;
  std::vector<int> order(tris_.size());
  std::iota(order.begin(), order.end(), 0);
  nodes_.reserve(2 * tris_.size());
  build(order, 0, static_cast<int>(order.size()));
  // Reorder triangles to leaf order for contiguous leaves.
  std::vector<TriRef> sorted;
  sorted.reserve(tris_.size());
  for (int i : order) sorted.push_back(tris_[i]);
  tris_ = std::move(sorted);
}

int Bvh::build(std::vector<int>& order, int begin, int end) {
  int node_index = static_cast<int>(nodes_.size());
  nodes_.push_back({});

  Aabb box, centroid_box;
  for (int i = begin; i < end; ++i) {
    box.expand(tri_bounds(tris_[order[i]]));
    centroid_box.expand(tri_bounds(tris_[order[i]]).center());
  }
  nodes_[node_index].box = box;

  int count = end - begin;
  Vec3 ext = centroid_box.extent();
  int axis = 0;
  if (ext[1] > ext[axis]) axis = 1;
  if (ext[2] > ext[axis]) axis = 2;

  if (count <= kLeafSize || ext[axis] <= 0.0) {
    nodes_[node_index].left = begin;
    nodes_[node_index].count = count;
    return node_index;
  }

  int mid = begin + count / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](int a, int b) {
                     return tri_bounds(tris_[a]).center()[axis] < tri_bounds(tris_[b]).center()[axis];
                   });

  int left = build(order, begin, mid);
  int right = build(order, mid, end);
  nodes_[node_index].left = left;
  nodes_[node_index].right = right;
  return node_index;
}

bool Bvh::any_hit(const Vec3& org, const Vec3& dest, double t_min, double t_max,
                  const std::function<bool(int)>& accept) const {
  if (tris_.empty()) return false;
  SegmentQuery query(org, dest);
  Vec3 inv_dir = query.dir.cwiseInverse();

  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!segment_hits_box(node.box, org, inv_dir, t_min, t_max)) continue;
    if (node.count > 0) {
      for (int i = node.left; i < node.left + node.count; ++i) {
        if (accept && !accept(tris_[i].payload)) continue;
        auto t = query.hit(tris_[i].v[0], tris_[i].v[1], tris_[i].v[2]);
        if (t && *t > t_min && *t < t_max) return true;
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return false;
}

double Bvh::nearest_distance(const Vec3& p) const {
  if (tris_.empty()) return std::numeric_limits<double>::infinity();
  double best2 = std::numeric_limits<double>::max();

  struct Entry {
    int node;
    double dist2;
  };
  Entry stack[64];
  int top = 0;
  stack[top++] = {0, nodes_[0].box.distance2(p)};
  while (top > 0) {
    Entry e = stack[--top];
    if (e.dist2 >= best2) continue;
    const Node& node = nodes_[e.node];
    if (node.count > 0) {
      for (int i = node.left; i < node.left + node.count; ++i) {
        Vec3 q = closest_point_on_triangle(p, tris_[i].v[0], tris_[i].v[1], tris_[i].v[2]);
        best2 = std::min(best2, (p - q).squaredNorm());
      }
    } else {
      Entry l{node.left, nodes_[node.left].box.distance2(p)};
      Entry r{node.right, nodes_[node.right].box.distance2(p)};
      // Push the farther child first so the nearer is explored next.
      if (l.dist2 > r.dist2) std::swap(l, r);
      if (r.dist2 < best2) stack[top++] = r;
      if (l.dist2 < best2) stack[top++] = l;
    }
  }
  return std::sqrt(best2);
}

bool any_hit_linear(const std::vector<TriRef>& tris, const Vec3& org, const Vec3& dest,
                    double t_min, double t_max, const std::function<bool(int)>& accept) {
  SegmentQuery query(org, dest);
  for (const auto& tri : tris) {
    if (accept && !accept(tri.payload)) continue;
    auto t = query.hit(tri.v[0], tri.v[1], tri.v[2]);
    if (t && *t > t_min && *t < t_max) return true;
  }
  return false;
}

}  // namespace curvesurf
