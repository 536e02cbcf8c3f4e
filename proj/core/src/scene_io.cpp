#include "bevkit/scene_io.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bevkit/error.hpp"

namespace bevkit {

using nlohmann::json;

namespace {

std::string edge_name(const EdgeKey& e) {
  return "(" + std::to_string(e.first) + " -> " + std::to_string(e.second) + ")";
}

[[noreturn]] void schema_error(const std::string& pointer, const std::string& what) {
  raise(ErrorKind::kSchemaViolation, pointer + ": " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "/" + key, "missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(path, "expected a finite number");
  return d;
}

double unit_score(const json& v, const std::string& path) {
  const double d = number(v, path);
  if (d < 0.0 || d > 1.0) schema_error(path, "value " + v.dump() + " outside [0, 1]");
  return d;
}

InstanceId identifier(const json& v, const std::string& path) {
  if (!v.is_number_integer()) schema_error(path, "expected an integer id");
  return v.get<InstanceId>();
}

const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array");
  return v;
}

Point3 point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) schema_error(path, "expected [x, y, z]");
  return {number(v[0], path + "/0"), number(v[1], path + "/1"), number(v[2], path + "/2")};
}

json point_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

Polyline3 polyline(const json& v, const std::string& path) {
  array(v, path);
  std::vector<Point3> pts;
  pts.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) pts.push_back(point(v[i], path + "/" + std::to_string(i)));
  try {
    return Polyline3(std::move(pts));
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
}

Centerline centerline(const json& v, const std::string& path, CenterlineSource default_source) {
  const Polyline3 pl = polyline(member(v, "points", path), path + "/points");
  const double conf = v.contains("confidence") ? unit_score(v["confidence"], path + "/confidence") : 1.0;
  CenterlineSource src = default_source;
  if (v.contains("source")) {
    const auto& s = v["source"];
    const auto parsed = s.is_string() ? parse_centerline_source(s.get<std::string>()) : std::nullopt;
    if (!parsed) schema_error(path + "/source", "unknown centerline source");
    src = *parsed;
  }
  return Centerline(pl, conf, src);
}

json centerline_json(const Centerline& c) {
  json pts = json::array();
  for (const auto& p : c.polyline.points()) pts.push_back(point_json(p));
  return {{"points", pts}, {"confidence", c.confidence}, {"source", std::string(to_string(c.source))}};
}

std::map<InstanceId, Centerline> centerlines(const json& v, const std::string& path, CenterlineSource source) {
  array(v, path);
  std::map<InstanceId, Centerline> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    const InstanceId id = identifier(member(v[i], "id", p), p + "/id");
    if (!out.emplace(id, centerline(v[i], p, source)).second) schema_error(p + "/id", "duplicate id " + std::to_string(id));
  }
  return out;
}

std::map<InstanceId, TrafficElement> traffic_elements(const json& v, const std::string& path) {
  array(v, path);
  std::map<InstanceId, TrafficElement> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    const InstanceId id = identifier(member(v[i], "id", p), p + "/id");
    const auto& b = member(v[i], "bbox", p);
    if (!b.is_array() || b.size() != 4) schema_error(p + "/bbox", "expected [x1, y1, x2, y2]");
    TrafficElement te;
    te.bbox = {number(b[0], p + "/bbox/0"), number(b[1], p + "/bbox/1"), number(b[2], p + "/bbox/2"),
               number(b[3], p + "/bbox/3")};
    if (!(te.bbox.x2 > te.bbox.x1) || !(te.bbox.y2 > te.bbox.y1)) schema_error(p + "/bbox", "need x2 > x1 and y2 > y1");
    const auto& a = member(v[i], "attribute", p);
    if (!a.is_number_integer()) schema_error(p + "/attribute", "expected an integer class id");
    te.attribute = a.get<int>();
    if (te.attribute < 0 || te.attribute >= kTrafficElementClasses) {
      schema_error(p + "/attribute", "class id outside [0, " + std::to_string(kTrafficElementClasses) + ")");
    }
    te.confidence = v[i].contains("confidence") ? unit_score(v[i]["confidence"], p + "/confidence") : 1.0;
    if (!out.emplace(id, te).second) schema_error(p + "/id", "duplicate id " + std::to_string(id));
  }
  return out;
}

json traffic_elements_json(const std::map<InstanceId, TrafficElement>& tes) {
  json out = json::array();
  for (const auto& [id, te] : tes) {
    out.push_back({{"id", id},
                   {"bbox", json::array({te.bbox.x1, te.bbox.y1, te.bbox.x2, te.bbox.y2})},
                   {"attribute", te.attribute},
                   {"confidence", te.confidence}});
  }
  return out;
}

template <typename A, typename B>
void check_endpoints(const EdgeKey& e, const std::map<InstanceId, A>& sources, const std::map<InstanceId, B>& targets,
                     const std::string& where) {
  if (!sources.count(e.first)) {
    raise(ErrorKind::kDanglingId, where + ": edge " + edge_name(e) + " references missing source " + std::to_string(e.first));
  }
  if (!targets.count(e.second)) {
    raise(ErrorKind::kDanglingId, where + ": edge " + edge_name(e) + " references missing target " + std::to_string(e.second));
  }
}

template <typename A, typename B>
EdgeSet gt_edges(const json& v, const std::string& path, const std::map<InstanceId, A>& sources,
                 const std::map<InstanceId, B>& targets) {
  array(v, path);
  EdgeSet out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    if (!v[i].is_array() || v[i].size() != 2) schema_error(p, "expected [source, target]");
    const EdgeKey e{identifier(v[i][0], p + "/0"), identifier(v[i][1], p + "/1")};
    check_endpoints(e, sources, targets, p);
    if (!out.insert(e).second) schema_error(p, "duplicate edge " + edge_name(e));
  }
  return out;
}

template <typename A, typename B>
TopologyEdges pred_edges(const json& v, const std::string& path, const std::map<InstanceId, A>& sources,
                         const std::map<InstanceId, B>& targets) {
  array(v, path);
  TopologyEdges out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    const EdgeKey e{identifier(member(v[i], "source", p), p + "/source"),
                    identifier(member(v[i], "target", p), p + "/target")};
    const double score = unit_score(member(v[i], "score", p), p + "/score");
    check_endpoints(e, sources, targets, p);
    if (!out.emplace(e, score).second) schema_error(p, "duplicate edge " + edge_name(e));
  }
  return out;
}

json gt_edges_json(const EdgeSet& edges) {
  json out = json::array();
  for (const auto& [s, t] : edges) out.push_back(json::array({s, t}));
  return out;
}

json pred_edges_json(const TopologyEdges& edges) {
  json out = json::array();
  for (const auto& [e, score] : edges) out.push_back({{"source", e.first}, {"target", e.second}, {"score", score}});
  return out;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    raise(ErrorKind::kMalformedJson, e.what());
  }
}

}  // namespace

void validate_scene(const SceneAnnotation& scene) {
  const std::string frame = "frame '" + scene.frame_id + "'";
  const auto check_lines = [&](const std::map<InstanceId, Centerline>& lines, const char* field) {
    for (const auto& [id, c] : lines) {
      if (!(c.confidence >= 0.0 && c.confidence <= 1.0)) {
        raise(ErrorKind::kSchemaViolation, frame + ": " + field + " " + std::to_string(id) + " confidence outside [0, 1]");
      }
    }
  };
  const auto check_tes = [&](const std::map<InstanceId, TrafficElement>& tes, const char* field) {
    for (const auto& [id, te] : tes) {
      const std::string where = frame + ": " + field + " " + std::to_string(id);
      if (!(te.bbox.x2 > te.bbox.x1) || !(te.bbox.y2 > te.bbox.y1)) raise(ErrorKind::kSchemaViolation, where + " has an empty bbox");
      if (te.attribute < 0 || te.attribute >= kTrafficElementClasses) raise(ErrorKind::kSchemaViolation, where + " has a bad attribute");
      if (!(te.confidence >= 0.0 && te.confidence <= 1.0)) raise(ErrorKind::kSchemaViolation, where + " confidence outside [0, 1]");
    }
  };
  check_lines(scene.gt_centerlines, "gt_centerlines");
  check_lines(scene.pred_centerlines, "pred_centerlines");
  check_tes(scene.gt_traffic_elements, "gt_traffic_elements");
  check_tes(scene.pred_traffic_elements, "pred_traffic_elements");
  for (const auto& e : scene.gt_topology_ll) check_endpoints(e, scene.gt_centerlines, scene.gt_centerlines, frame + " gt_topology_ll");
  for (const auto& e : scene.gt_topology_lt) check_endpoints(e, scene.gt_centerlines, scene.gt_traffic_elements, frame + " gt_topology_lt");
  const auto check_scores = [&](const TopologyEdges& edges, const char* field) {
    for (const auto& [e, s] : edges) {
      if (!(s >= 0.0 && s <= 1.0)) raise(ErrorKind::kSchemaViolation, frame + " " + field + ": edge " + edge_name(e) + " score outside [0, 1]");
    }
  };
  for (const auto& [e, s] : scene.pred_topology_ll) check_endpoints(e, scene.pred_centerlines, scene.pred_centerlines, frame + " pred_topology_ll");
  for (const auto& [e, s] : scene.pred_topology_lt) check_endpoints(e, scene.pred_centerlines, scene.pred_traffic_elements, frame + " pred_topology_lt");
  check_scores(scene.pred_topology_ll, "pred_topology_ll");
  check_scores(scene.pred_topology_lt, "pred_topology_lt");
}

std::string scene_to_json(const SceneAnnotation& scene, int indent) {
  nlohmann::ordered_json j;
  const auto lines = [](const std::map<InstanceId, Centerline>& m) {
    json out = json::array();
    for (const auto& [id, c] : m) {
      json entry = centerline_json(c);
      entry["id"] = id;
      out.push_back(entry);
    }
    return out;
  };
  j["frame_id"] = scene.frame_id;
  j["gt_centerlines"] = lines(scene.gt_centerlines);
  j["gt_topology_ll"] = gt_edges_json(scene.gt_topology_ll);
  j["gt_traffic_elements"] = traffic_elements_json(scene.gt_traffic_elements);
  j["gt_topology_lt"] = gt_edges_json(scene.gt_topology_lt);
  j["pred_centerlines"] = lines(scene.pred_centerlines);
  j["pred_topology_ll"] = pred_edges_json(scene.pred_topology_ll);
  j["pred_traffic_elements"] = traffic_elements_json(scene.pred_traffic_elements);
  j["pred_topology_lt"] = pred_edges_json(scene.pred_topology_lt);
  return j.dump(indent);
}

SceneAnnotation scene_from_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) schema_error("", "scene must be a JSON object");
  SceneAnnotation s;
  const auto& fid = member(j, "frame_id", "");
  if (!fid.is_string()) schema_error("/frame_id", "expected a string");
  s.frame_id = fid.get<std::string>();
  s.gt_centerlines = centerlines(member(j, "gt_centerlines", ""), "/gt_centerlines", CenterlineSource::kGroundTruth);
  s.gt_traffic_elements = traffic_elements(member(j, "gt_traffic_elements", ""), "/gt_traffic_elements");
  s.gt_topology_ll = gt_edges(member(j, "gt_topology_ll", ""), "/gt_topology_ll", s.gt_centerlines, s.gt_centerlines);
  s.gt_topology_lt = gt_edges(member(j, "gt_topology_lt", ""), "/gt_topology_lt", s.gt_centerlines, s.gt_traffic_elements);
  s.pred_centerlines = centerlines(member(j, "pred_centerlines", ""), "/pred_centerlines", CenterlineSource::kMask);
  s.pred_traffic_elements = traffic_elements(member(j, "pred_traffic_elements", ""), "/pred_traffic_elements");
  s.pred_topology_ll = pred_edges(member(j, "pred_topology_ll", ""), "/pred_topology_ll", s.pred_centerlines, s.pred_centerlines);
  s.pred_topology_lt = pred_edges(member(j, "pred_topology_lt", ""), "/pred_topology_lt", s.pred_centerlines, s.pred_traffic_elements);
  return s;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) raise(ErrorKind::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    raise(ErrorKind::kIo, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

void save_scene(const std::filesystem::path& path, const SceneAnnotation& scene) {
  write_file_atomic(path, scene_to_json(scene) + "\n");
}

SceneAnnotation load_scene(const std::filesystem::path& path) {
  try {
    return scene_from_json(read_text_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    const std::string what = e.what();
    const auto colon = what.find(": ");
    throw Error(e.kind(), path.string() + ": " + (colon == std::string::npos ? what : what.substr(colon + 2)));
  }
}

std::vector<std::filesystem::path> list_scene_files(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) raise(ErrorKind::kIo, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string centerline_to_json(const Centerline& line, int indent) { return centerline_json(line).dump(indent); }

Centerline centerline_from_json(const std::string& text) {
  return centerline(parse_json(text), "", CenterlineSource::kMask);
}

std::string bezier_to_json(const BezierCurve& curve, int indent) {
  json cps = json::array();
  for (const auto& p : curve.control_points) cps.push_back(point_json(p));
  return json{{"control_points", cps}, {"confidence", curve.confidence}}.dump(indent);
}

BezierCurve bezier_from_json(const std::string& text) {
  const json j = parse_json(text);
  const auto& cps = member(j, "control_points", "");
  if (!cps.is_array() || cps.size() != 4) schema_error("/control_points", "expected exactly 4 control points");
  BezierCurve c;
  for (std::size_t i = 0; i < 4; ++i) c.control_points[i] = point(cps[i], "/control_points/" + std::to_string(i));
  c.confidence = j.contains("confidence") ? unit_score(j["confidence"], "/confidence") : 1.0;
  return c;
}

}  // namespace bevkit
