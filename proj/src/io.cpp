#include "curvesurf/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace curvesurf {

namespace {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

Vec3 to_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ParseError(where + ": expected [x,y,z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json from_vec3(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

// Shortest round-trip decimal form, matching nlohmann's dump of a double.
std::string fmt_double(double v) { return json(v).dump(); }

}  // namespace

CurveDrawing load_drawing(const std::filesystem::path& path) {
  json j = read_json_file(path);
  if (!j.contains("fragments")) throw ParseError(path.string() + ": missing \"fragments\"");
  CurveDrawing drawing;
  for (const auto& jf : j["fragments"]) {
    CurveFragment f;
    if (!jf.contains("id")) throw ParseError(path.string() + ": fragment missing \"id\"");
    f.id = jf["id"].get<int>();
    f.closed = jf.value("closed", false);
    if (!jf.contains("points"))
      throw ParseError(path.string() + ": fragment " + std::to_string(f.id) +
                       " missing \"points\"");
    for (const auto& jp : jf["points"])
      f.points.push_back(to_vec3(jp, "fragment " + std::to_string(f.id)));
    drawing.fragments.push_back(std::move(f));
  }
  if (j.contains("nodes")) {
    for (const auto& jn : j["nodes"]) {
      GraphNode node;
      node.point = to_vec3(jn.at("point"), "node");
      for (const auto& ji : jn.at("incident"))
        node.incident.push_back({ji.at(0).get<int>(), ji.at(1).get<int>() != 0});
      drawing.nodes.push_back(std::move(node));
    }
  } else {
    drawing.rebuild_nodes();
  }
  validate(drawing);
  return drawing;
}

void save_drawing(const CurveDrawing& drawing, const std::filesystem::path& path) {
  json j;
  j["fragments"] = json::array();
  for (const auto& f : drawing.fragments) {
    json jf;
    jf["id"] = f.id;
    jf["closed"] = f.closed;
    json pts = json::array();
    for (const auto& p : f.points) pts.push_back(from_vec3(p));
    jf["points"] = std::move(pts);
    j["fragments"].push_back(std::move(jf));
  }
  json jnodes = json::array();
  for (const auto& node : drawing.nodes) {
    json jn;
    jn["point"] = from_vec3(node.point);
    json inc = json::array();
    for (const auto& i : node.incident) inc.push_back(json::array({i.fragment_id, i.at_end ? 1 : 0}));
    jn["incident"] = std::move(inc);
    jnodes.push_back(std::move(jn));
  }
  j["nodes"] = std::move(jnodes);
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<CameraView> load_cameras(const std::filesystem::path& path) {
  json j = read_json_file(path);
  if (!j.contains("views")) throw ParseError(path.string() + ": missing \"views\"");
  std::vector<CameraView> views;
  for (const auto& jv : j["views"]) {
    Mat34 P;
    const auto& jp = jv.at("P");
    if (!jp.is_array() || jp.size() != 3) throw ParseError(path.string() + ": P must be 3 rows");
    for (int r = 0; r < 3; ++r) {
      if (!jp[r].is_array() || jp[r].size() != 4)
        throw ParseError(path.string() + ": P rows must have 4 entries");
      for (int c = 0; c < 4; ++c) P(r, c) = jp[r][c].get<double>();
    }
    CameraView view = make_view(jv.at("id").get<int>(), P, jv.at("width").get<int>(),
                                jv.at("height").get<int>());
    if (jv.contains("edges_path")) {
      std::filesystem::path ep = jv["edges_path"].get<std::string>();
      if (ep.is_relative()) ep = path.parent_path() / ep;
      view.edges = load_edges_csv(ep);
    }
    validate(view);
    views.push_back(std::move(view));
  }
  return views;
}

void save_cameras(const std::vector<CameraView>& views, const std::filesystem::path& path,
                  const std::string& edges_prefix) {
  json j;
  j["views"] = json::array();
  for (const auto& v : views) {
    json jv;
    jv["id"] = v.id;
    json rows = json::array();
    for (int r = 0; r < 3; ++r) {
      json row = json::array();
      for (int c = 0; c < 4; ++c) row.push_back(v.projection(r, c));
      rows.push_back(std::move(row));
    }
    jv["P"] = std::move(rows);
    jv["width"] = v.width;
    jv["height"] = v.height;
    std::string edges_name = edges_prefix + std::to_string(v.id) + ".csv";
    jv["edges_path"] = edges_name;
    save_edges_csv(v.edges, path.parent_path() / edges_name);
    j["views"].push_back(std::move(jv));
  }
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<EdgeElement> load_edges_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<EdgeElement> edges;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line.rfind("x,y,theta,strength", 0) != 0)
        throw ParseError(path.string() + ":1: expected header x,y,theta,strength");
      continue;
    }
    if (line.empty()) continue;
    EdgeElement e;
    double vals[4];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 4; ++k) {
      auto [next, ec] = std::from_chars(p, end, vals[k]);
      if (ec != std::errc{})
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad number in field " +
                         std::to_string(k + 1));
      p = next;
      if (k < 3) {
        if (p >= end || *p != ',')
          throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected comma");
        ++p;
      }
    }
    e.position = Vec2(vals[0], vals[1]);
    e.orientation = normalize_orientation(vals[2]);
    e.strength = vals[3];
    edges.push_back(e);
  }
  return edges;
}

void save_edges_csv(const std::vector<EdgeElement>& edges, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "x,y,theta,strength\n";
  for (const auto& e : edges)
    out << fmt_double(e.position[0]) << ',' << fmt_double(e.position[1]) << ','
        << fmt_double(e.orientation) << ',' << fmt_double(e.strength) << '\n';
  write_text_file(path, out.str());
}

namespace {

void write_obj_vertices(std::ostringstream& out, const std::vector<Vec3>& vertices) {
  for (const auto& v : vertices)
    out << "v " << fmt_double(v[0]) << ' ' << fmt_double(v[1]) << ' ' << fmt_double(v[2]) << '\n';
}

}  // namespace

void save_obj(const QuadMesh& mesh, const std::filesystem::path& path) {
  std::ostringstream out;
  write_obj_vertices(out, mesh.vertices);
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << ' ' << f[3] + 1 << '\n';
  write_text_file(path, out.str());
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ostringstream out;
  write_obj_vertices(out, mesh.vertices);
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  write_text_file(path, out.str());
}

TriMesh load_obj_tri(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  TriMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p[0] >> p[1] >> p[2]))
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad vertex");
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // Accept v, v/vt, v//vn forms.
        int v = std::stoi(tok.substr(0, tok.find('/')));
        if (v < 0) v = static_cast<int>(mesh.vertices.size()) + v + 1;
        idx.push_back(v - 1);
      }
      if (idx.size() < 3)
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": face with <3 vertices");
      for (size_t k = 1; k + 1 < idx.size(); ++k)
        mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return mesh;
}

}  // namespace curvesurf
