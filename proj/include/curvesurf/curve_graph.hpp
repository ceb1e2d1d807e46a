#pragma once

#include "curvesurf/geometry.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace curvesurf {

// World units are meters throughout.
inline constexpr double kMinPointSeparation = 1e-9;
inline constexpr double kNodeMergeTol = 1e-6;

/// One 3D polyline link of the drawing graph. For closed fragments the
/// closing segment is implicit; first and last points are distinct.
struct CurveFragment {
  int id = -1;
  std::vector<Vec3> points;
  bool closed = false;

  const Vec3& front() const { return points.front(); }
  const Vec3& back() const { return points.back(); }
  size_t size() const { return points.size(); }
};

/// Total polyline length, including the closing segment when closed.
double arclength(const CurveFragment& fragment);

/// Travel direction at an endpoint, estimated from the last 3 samples and
/// pointing out of the curve (for `at_end` false the reversed start tangent).
Vec3 endpoint_tangent(const CurveFragment& fragment, bool at_end);

struct NodeIncidence {
  int fragment_id = -1;
  bool at_end = false;  // false: fragment start, true: fragment end

  friend bool operator==(const NodeIncidence&, const NodeIncidence&) = default;
};

struct GraphNode {
  Vec3 point = Vec3::Zero();
  std::vector<NodeIncidence> incident;
};

/// Graph of curve fragments; nodes mark junctions where open-fragment
/// endpoints coincide within kNodeMergeTol.
struct CurveDrawing {
  std::vector<CurveFragment> fragments;
  std::vector<GraphNode> nodes;

  const CurveFragment* find(int id) const;
  int max_fragment_id() const;

  /// Recluster open-fragment endpoints into junction nodes.
  void rebuild_nodes(double tol = kNodeMergeTol);
};

void validate(const CurveFragment& fragment);
void validate(const CurveDrawing& drawing);

/// Oriented 2D image edge; orientation is an undirected line angle in [0, pi).
struct EdgeElement {
  Vec2 position = Vec2::Zero();
  double orientation = 0.0;
  double strength = 0.0;
};

/// Wrap any angle to the undirected line range [0, pi).
double normalize_orientation(double theta);

/// Absolute difference of two line orientations, in [0, pi/2].
double orientation_distance(double a, double b);

struct CameraView {
  int id = -1;
  Mat34 projection = Mat34::Zero();
  int width = 0;
  int height = 0;
  Vec3 camera_center = Vec3::Zero();
  std::vector<EdgeElement> edges;
};

/// Builds a view and derives camera_center as the right null space of P.
CameraView make_view(int id, const Mat34& projection, int width, int height);

void validate(const CameraView& view);

/// Projective depth of a world point in a view (positive in front).
double view_depth(const CameraView& view, const Vec3& x);

/// Pixel coordinates of a world point; requires positive depth.
Vec2 project_point(const CameraView& view, const Vec3& x);

/// A projected fragment: positive-depth samples with cumulative pixel
/// arclength; clipped stretches split the samples into chunks. Chunk
/// arclengths are concatenated so s stays within [0, length()].
struct ProjectedCurve {
  struct Sample {
    Vec2 px = Vec2::Zero();
    double s = 0.0;   // pixel arclength
    int src = -1;     // index of the originating 3D sample
  };
  std::vector<Sample> samples;
  std::vector<std::pair<int, int>> chunks;  // [begin, end) into samples

  bool empty() const { return samples.empty(); }
  double length() const { return samples.empty() ? 0.0 : samples.back().s; }
};

/// Projects fragment samples into a view, clipping non-positive depth.
ProjectedCurve project_curve(const CurveFragment& fragment, const CameraView& view);

struct QuadMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> faces;
  std::vector<uint8_t> boundary_tags;  // 1: on input curve, 0: interior

  bool empty() const { return faces.empty(); }
};

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  bool empty() const { return faces.empty(); }
};

/// Splits each quad along its (0,2) diagonal.
TriMesh triangulate(const QuadMesh& mesh);

double surface_area(const TriMesh& mesh);

void validate(const QuadMesh& mesh);
void validate(const TriMesh& mesh);

/// Vertex indices on the topological boundary (edges with one incident face).
std::vector<uint8_t> boundary_vertex_mask(const QuadMesh& mesh);

}  // namespace curvesurf
