#pragma once

#include "curvesurf/curve_graph.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace curvesurf {

/// Drawing file: { "fragments": [{ "id", "closed", "points": [[x,y,z],...] }],
/// "nodes": optional }. Numbers round-trip bit-exactly (shortest decimal form).
CurveDrawing load_drawing(const std::filesystem::path& path);
void save_drawing(const CurveDrawing& drawing, const std::filesystem::path& path);

/// Camera file: { "views": [{ "id", "P": 3x4, "width", "height", "edges_path" }] }.
/// edges_path is resolved relative to the camera file's directory.
std::vector<CameraView> load_cameras(const std::filesystem::path& path);
void save_cameras(const std::vector<CameraView>& views, const std::filesystem::path& path,
                  const std::string& edges_prefix = "edges_view_");

/// Edge map CSV: `x,y,theta,strength` header plus one row per element.
std::vector<EdgeElement> load_edges_csv(const std::filesystem::path& path);
void save_edges_csv(const std::vector<EdgeElement>& edges, const std::filesystem::path& path);

/// Wavefront OBJ with quad faces.
void save_obj(const QuadMesh& mesh, const std::filesystem::path& path);
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);
/// Loads an OBJ, fanning any polygon faces into triangles.
TriMesh load_obj_tri(const std::filesystem::path& path);

}  // namespace curvesurf
