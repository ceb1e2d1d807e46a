#include "curvesurf/curve_graph.hpp"

#include <Eigen/Dense>

#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace curvesurf {

double arclength(const CurveFragment& fragment) {
  return polyline_length(fragment.points, fragment.closed);
}

Vec3 endpoint_tangent(const CurveFragment& fragment, bool at_end) {
  const auto& p = fragment.points;
  size_t n = p.size();
  Vec3 d;
  if (at_end) {
    d = p[n - 1] - p[n >= 3 ? n - 3 : 0];
  } else {
    d = p[0] - p[n >= 3 ? 2 : n - 1];
  }
  double len = d.norm();
  if (len < kMinPointSeparation) {
    // Adjacent fallback when the 3-sample chord degenerates.
    d = at_end ? Vec3(p[n - 1] - p[n - 2]) : Vec3(p[0] - p[1]);
    len = d.norm();
  }
  return d / len;
}

const CurveFragment* CurveDrawing::find(int id) const {
  for (const auto& f : fragments)
    if (f.id == id) return &f;
  return nullptr;
}

int CurveDrawing::max_fragment_id() const {
  int m = -1;
  for (const auto& f : fragments) m = std::max(m, f.id);
  return m;
}

void CurveDrawing::rebuild_nodes(double tol) {
  nodes.clear();
  struct Endpoint {
    Vec3 p;
    NodeIncidence inc;
  };
  std::vector<Endpoint> eps;
  for (const auto& f : fragments) {
    if (f.closed) continue;
    eps.push_back({f.points.front(), {f.id, false}});
    eps.push_back({f.points.back(), {f.id, true}});
  }
  std::vector<int> assignment(eps.size(), -1);
  for (size_t i = 0; i < eps.size(); ++i) {
    if (assignment[i] >= 0) continue;
    GraphNode node;
    node.point = eps[i].p;
    node.incident.push_back(eps[i].inc);
    assignment[i] = static_cast<int>(nodes.size());
    for (size_t j = i + 1; j < eps.size(); ++j) {
      if (assignment[j] >= 0) continue;
      if ((eps[j].p - node.point).norm() <= tol) {
        node.incident.push_back(eps[j].inc);
        assignment[j] = assignment[i];
      }
    }
    if (node.incident.size() >= 2) nodes.push_back(std::move(node));
  }
}

void validate(const CurveFragment& fragment) {
  std::ostringstream id;
  id << "fragment " << fragment.id;
  if (fragment.points.size() < 2)
    throw ValidationError(id.str() + ": needs at least 2 points, has " +
                          std::to_string(fragment.points.size()));
  for (size_t i = 0; i + 1 < fragment.points.size(); ++i) {
    if ((fragment.points[i + 1] - fragment.points[i]).norm() <= kMinPointSeparation)
      throw ValidationError(id.str() + ": consecutive points " + std::to_string(i) + "," +
                            std::to_string(i + 1) + " coincide");
  }
  if (fragment.closed &&
      (fragment.points.front() - fragment.points.back()).norm() <= kMinPointSeparation)
    throw ValidationError(id.str() + ": closed fragment duplicates its first point");
  for (const auto& p : fragment.points)
    if (!p.allFinite()) throw ValidationError(id.str() + ": non-finite point");
}

void validate(const CurveDrawing& drawing) {
  std::set<int> ids;
  for (const auto& f : drawing.fragments) {
    validate(f);
    if (!ids.insert(f.id).second)
      throw ValidationError("duplicate fragment id " + std::to_string(f.id));
  }
  for (const auto& node : drawing.nodes) {
    for (const auto& inc : node.incident) {
      const CurveFragment* f = drawing.find(inc.fragment_id);
      if (!f)
        throw ValidationError("node references missing fragment " +
                              std::to_string(inc.fragment_id));
      if (f->closed)
        throw ValidationError("node references closed fragment " +
                              std::to_string(inc.fragment_id));
      const Vec3& ep = inc.at_end ? f->points.back() : f->points.front();
      if ((ep - node.point).norm() > kNodeMergeTol)
        throw ValidationError("node incidence for fragment " + std::to_string(inc.fragment_id) +
                              " lies outside the merge tolerance");
    }
  }
}

double normalize_orientation(double theta) {
  constexpr double pi = std::numbers::pi;
  theta = std::fmod(theta, pi);
  if (theta < 0.0) theta += pi;
  if (theta >= pi) theta = 0.0;
  return theta;
}

double orientation_distance(double a, double b) {
  constexpr double pi = std::numbers::pi;
  double d = std::abs(normalize_orientation(a) - normalize_orientation(b));
  return std::min(d, pi - d);
}

CameraView make_view(int id, const Mat34& projection, int width, int height) {
  CameraView view;
  view.id = id;
  view.projection = projection;
  view.width = width;
  view.height = height;
  Eigen::Matrix3d m = projection.leftCols<3>();
  Eigen::Vector3d p4 = projection.col(3);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
  if (!lu.isInvertible()) {
    // Camera at infinity; fall back to the SVD null space of P.
    Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(projection, Eigen::ComputeFullV);
    Eigen::Vector4d c = svd.matrixV().col(3);
    if (std::abs(c[3]) < 1e-14)
      throw ValidationError("view " + std::to_string(id) + ": camera center at infinity");
    view.camera_center = c.head<3>() / c[3];
  } else {
    view.camera_center = -lu.solve(p4);
  }
  return view;
}

void validate(const CameraView& view) {
  Eigen::Vector4d c;
  c << view.camera_center, 1.0;
  double residual = (view.projection * c).norm();
  double scale = view.projection.norm() * std::max(1.0, c.norm());
  if (residual > 1e-8 * scale)
    throw ValidationError("view " + std::to_string(view.id) +
                          ": camera_center is not the null space of P");
  if (view.width <= 0 || view.height <= 0)
    throw ValidationError("view " + std::to_string(view.id) + ": non-positive image size");
  for (const auto& e : view.edges)
    if (e.orientation < 0.0 || e.orientation >= std::numbers::pi || e.strength < 0.0)
      throw ValidationError("view " + std::to_string(view.id) + ": edge element out of range");
}

double view_depth(const CameraView& view, const Vec3& x) {
  return view.projection.row(2).head<3>().dot(x) + view.projection(2, 3);
}

Vec2 project_point(const CameraView& view, const Vec3& x) {
  Eigen::Vector4d xh;
  xh << x, 1.0;
  Eigen::Vector3d h = view.projection * xh;
  return Vec2(h[0] / h[2], h[1] / h[2]);
}

ProjectedCurve project_curve(const CurveFragment& fragment, const CameraView& view) {
  ProjectedCurve out;
  int chunk_begin = -1;
  double s = 0.0;
  auto close_chunk = [&](int end) {
    if (chunk_begin >= 0 && end > chunk_begin) out.chunks.emplace_back(chunk_begin, end);
    chunk_begin = -1;
  };
  for (size_t i = 0; i < fragment.points.size(); ++i) {
    if (view_depth(view, fragment.points[i]) <= 0.0) {
      close_chunk(static_cast<int>(out.samples.size()));
      continue;
    }
    Vec2 px = project_point(view, fragment.points[i]);
    if (chunk_begin < 0) {
      chunk_begin = static_cast<int>(out.samples.size());
    } else {
      s += (px - out.samples.back().px).norm();
    }
    out.samples.push_back({px, s, static_cast<int>(i)});
  }
  close_chunk(static_cast<int>(out.samples.size()));
  return out;
}

TriMesh triangulate(const QuadMesh& mesh) {
  TriMesh tri;
  tri.vertices = mesh.vertices;
  tri.faces.reserve(mesh.faces.size() * 2);
  for (const auto& f : mesh.faces) {
    tri.faces.push_back({f[0], f[1], f[2]});
    tri.faces.push_back({f[0], f[2], f[3]});
  }
  return tri;
}

double surface_area(const TriMesh& mesh) {
  double area = 0.0;
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    area += 0.5 * (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a).norm();
  }
  return area;
}

void validate(const QuadMesh& mesh) {
  int n = static_cast<int>(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (int k : f)
      if (k < 0 || k >= n) throw ValidationError("quad face index out of range");
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        if (f[a] == f[b]) throw ValidationError("degenerate quad face (repeated vertex)");
  }
  if (!mesh.boundary_tags.empty() && mesh.boundary_tags.size() != mesh.vertices.size())
    throw ValidationError("boundary_tags size mismatch");
  // Manifold-with-boundary: each undirected edge borders at most 2 faces.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& f : mesh.faces)
    for (int k = 0; k < 4; ++k) {
      int a = f[k], b = f[(k + 1) % 4];
      edge_count[{std::min(a, b), std::max(a, b)}]++;
    }
  for (const auto& [e, c] : edge_count)
    if (c > 2) throw ValidationError("non-manifold edge in quad mesh");
}

void validate(const TriMesh& mesh) {
  int n = static_cast<int>(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (int k : f)
      if (k < 0 || k >= n) throw ValidationError("tri face index out of range");
    const Vec3& a = mesh.vertices[f[0]];
    double area = 0.5 * (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a).norm();
    if (area <= 1e-12) throw ValidationError("zero-area triangle");
  }
}

std::vector<uint8_t> boundary_vertex_mask(const QuadMesh& mesh) {
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& f : mesh.faces)
    for (int k = 0; k < 4; ++k) {
      int a = f[k], b = f[(k + 1) % 4];
      edge_count[{std::min(a, b), std::max(a, b)}]++;
    }
  std::vector<uint8_t> mask(mesh.vertices.size(), 0);
  for (const auto& [e, c] : edge_count)
    if (c == 1) {
      mask[e.first] = 1;
      mask[e.second] = 1;
    }
  return mask;
}

}  // namespace curvesurf
