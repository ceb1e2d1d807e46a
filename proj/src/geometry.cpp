#include "curvesurf/geometry.hpp"

namespace curvesurf {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  Vec3 bp = p - b;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  Vec3 cp = p - c;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  double denom = 1.0 / (va + vb + vc);
  double v = vb * denom, w = vc * denom;
  return a + v * ab + w * ac;
}

double point_polyline_distance(const Vec3& p, std::span<const Vec3> pts, bool closed) {
  if (pts.empty()) return std::numeric_limits<double>::infinity();
  if (pts.size() == 1) return (p - pts[0]).norm();
  double best = std::numeric_limits<double>::max();
  size_t n = pts.size();
  size_t nseg = closed ? n : n - 1;
  for (size_t i = 0; i < nseg; ++i) {
    Vec3 q = closest_point_on_segment(p, pts[i], pts[(i + 1) % n]);
    best = std::min(best, (p - q).squaredNorm());
  }
  return std::sqrt(best);
}

double polyline_length(std::span<const Vec3> pts, bool closed) {
  if (pts.size() < 2) return 0.0;
  double len = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) len += (pts[i + 1] - pts[i]).norm();
  if (closed) len += (pts.front() - pts.back()).norm();
  return len;
}

namespace {

// Edge-edge and point-in-triangle helpers from Moller's public-domain code,
// rewritten for Eigen.

bool coplanar_tri_tri(const Vec3& n, const Vec3& v0, const Vec3& v1, const Vec3& v2,
                      const Vec3& u0, const Vec3& u1, const Vec3& u2) {
  // Project onto the dominant axis plane.
  Vec3 a = n.cwiseAbs();
  int i0, i1;
  if (a[0] > a[1]) {
    if (a[0] > a[2]) { i0 = 1; i1 = 2; }
    else             { i0 = 0; i1 = 1; }
  } else {
    if (a[2] > a[1]) { i0 = 0; i1 = 1; }
    else             { i0 = 0; i1 = 2; }
  }

  auto edge_edge = [&](const Vec3& p, const Vec3& q, const Vec3& r, const Vec3& s) {
    double ax = q[i0] - p[i0], ay = q[i1] - p[i1];
    double bx = r[i0] - s[i0], by = r[i1] - s[i1];
    double cx = p[i0] - r[i0], cy = p[i1] - r[i1];
    double f = ay * bx - ax * by;
    double d = by * cx - bx * cy;
    if ((f > 0 && d >= 0 && d <= f) || (f < 0 && d <= 0 && d >= f)) {
      double e = ax * cy - ay * cx;
      if (f > 0) { if (e >= 0 && e <= f) return true; }
      else       { if (e <= 0 && e >= f) return true; }
    }
    return false;
  };
  auto edge_against_tri = [&](const Vec3& p, const Vec3& q) {
    return edge_edge(p, q, u0, u1) || edge_edge(p, q, u1, u2) || edge_edge(p, q, u2, u0);
  };
  if (edge_against_tri(v0, v1) || edge_against_tri(v1, v2) || edge_against_tri(v2, v0)) return true;

  auto point_in_tri = [&](const Vec3& p, const Vec3& t0, const Vec3& t1, const Vec3& t2) {
    double d0 = (t1[i0] - t0[i0]) * (p[i1] - t0[i1]) - (t1[i1] - t0[i1]) * (p[i0] - t0[i0]);
    double d1 = (t2[i0] - t1[i0]) * (p[i1] - t1[i1]) - (t2[i1] - t1[i1]) * (p[i0] - t1[i0]);
    double d2 = (t0[i0] - t2[i0]) * (p[i1] - t2[i1]) - (t0[i1] - t2[i1]) * (p[i0] - t2[i0]);
    return (d0 >= 0 && d1 >= 0 && d2 >= 0) || (d0 <= 0 && d1 <= 0 && d2 <= 0);
  };
  return point_in_tri(v0, u0, u1, u2) || point_in_tri(u0, v0, v1, v2);
}

}  // namespace

bool tri_tri_intersect(const Vec3& v0, const Vec3& v1, const Vec3& v2,
                       const Vec3& u0, const Vec3& u1, const Vec3& u2) {
  Vec3 e1 = v1 - v0, e2 = v2 - v0;
  Vec3 n1 = e1.cross(e2);
  double d1 = -n1.dot(v0);

  double du0 = n1.dot(u0) + d1;
  double du1 = n1.dot(u1) + d1;
  double du2 = n1.dot(u2) + d1;

  const double eps = 1e-12 * n1.norm();
  if (std::abs(du0) < eps) du0 = 0.0;
  if (std::abs(du1) < eps) du1 = 0.0;
  if (std::abs(du2) < eps) du2 = 0.0;

  double du01 = du0 * du1, du02 = du0 * du2;
  if (du01 > 0.0 && du02 > 0.0) return false;

  e1 = u1 - u0;
  e2 = u2 - u0;
  Vec3 n2 = e1.cross(e2);
  double d2 = -n2.dot(u0);

  double dv0 = n2.dot(v0) + d2;
  double dv1 = n2.dot(v1) + d2;
  double dv2 = n2.dot(v2) + d2;

  const double eps2 = 1e-12 * n2.norm();
  if (std::abs(dv0) < eps2) dv0 = 0.0;
  if (std::abs(dv1) < eps2) dv1 = 0.0;
  if (std::abs(dv2) < eps2) dv2 = 0.0;

  double dv01 = dv0 * dv1, dv02 = dv0 * dv2;
  if (dv01 > 0.0 && dv02 > 0.0) return false;

  Vec3 dir = n1.cross(n2);
  double max = std::abs(dir[0]);
  int index = 0;
  if (std::abs(dir[1]) > max) { max = std::abs(dir[1]); index = 1; }
  if (std::abs(dir[2]) > max) { index = 2; }

  if (max < 1e-16) {
    // Coplanar (or degenerate normals).
    return coplanar_tri_tri(n1, v0, v1, v2, u0, u1, u2);
  }

  double vp0 = v0[index], vp1 = v1[index], vp2 = v2[index];
  double up0 = u0[index], up1 = u1[index], up2 = u2[index];

  auto compute_intervals = [](double p0, double p1, double p2, double s0, double s1, double s2,
                              double s01, double s02, double* isect0, double* isect1) -> bool {
    if (s01 > 0.0) {
      *isect0 = p2 + (p0 - p2) * s2 / (s2 - s0);
      *isect1 = p2 + (p1 - p2) * s2 / (s2 - s1);
    } else if (s02 > 0.0) {
      *isect0 = p1 + (p0 - p1) * s1 / (s1 - s0);
      *isect1 = p1 + (p2 - p1) * s1 / (s1 - s2);
    } else if (s1 * s2 > 0.0 || s0 != 0.0) {
      *isect0 = p0 + (p1 - p0) * s0 / (s0 - s1);
      *isect1 = p0 + (p2 - p0) * s0 / (s0 - s2);
    } else if (s1 != 0.0) {
      *isect0 = p1 + (p0 - p1) * s1 / (s1 - s0);
      *isect1 = p1 + (p2 - p1) * s1 / (s1 - s2);
    } else if (s2 != 0.0) {
      *isect0 = p2 + (p0 - p2) * s2 / (s2 - s0);
      *isect1 = p2 + (p1 - p2) * s2 / (s2 - s1);
    } else {
      return false;  // coplanar
    }
    return true;
  };

  double i0a, i1a, i0b, i1b;
  if (!compute_intervals(vp0, vp1, vp2, dv0, dv1, dv2, dv01, dv02, &i0a, &i1a))
    return coplanar_tri_tri(n1, v0, v1, v2, u0, u1, u2);
  if (!compute_intervals(up0, up1, up2, du0, du1, du2, du01, du02, &i0b, &i1b))
    return coplanar_tri_tri(n1, v0, v1, v2, u0, u1, u2);

  if (i0a > i1a) std::swap(i0a, i1a);
  if (i0b > i1b) std::swap(i0b, i1b);
  return !(i1a < i0b || i1b < i0a);
}

}  // namespace curvesurf
