#include "parkingtwin/osm.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "parkingtwin/error.hpp"

namespace parkingtwin::osm {

namespace pt = boost::property_tree;

const char* to_string(SemanticClass cls) {
  switch (cls) {
    case SemanticClass::Wall: return "wall";
    case SemanticClass::Pillar: return "pillar";
    case SemanticClass::ParkingArea: return "parking_area";
    case SemanticClass::Road: return "road";
    case SemanticClass::Unknown: return "unknown";
  }
  return "unknown";
}

SemanticClass classify(const std::map<std::string, std::string>& tags) {
  auto value = [&](const char* key) -> const std::string* {
    const auto it = tags.find(key);
    return it == tags.end() ? nullptr : &it->second;
  };
  if (const auto* v = value("barrier"); v && *v == "pillar") return SemanticClass::Pillar;
  if (const auto* v = value("indoor"); v && *v == "column") return SemanticClass::Pillar;
  if (const auto* v = value("building"); v && *v != "no") return SemanticClass::Wall;
  if (const auto* v = value("wall"); v && *v != "no") return SemanticClass::Wall;
  if (const auto* v = value("barrier"); v && *v == "wall") return SemanticClass::Wall;
  if (const auto* v = value("amenity"); v && *v == "parking_space") return SemanticClass::ParkingArea;
  if (value("highway")) return SemanticClass::Road;
  return SemanticClass::Unknown;
}

std::vector<Vec2d> OsmMap::points(const Shape& shape) const {
  std::vector<Vec2d> out;
  out.reserve(shape.refs.size());
  for (NodeId id : shape.refs) out.push_back(nodes.at(id));
  return out;
}

std::size_t OsmMap::count(SemanticClass cls) const {
  std::size_t n = 0;
  for (const auto& s : shapes) n += s.cls == cls;
  return n;
}

std::vector<const Shape*> OsmMap::solids() const {
  std::vector<const Shape*> out;
  for (const auto& s : shapes) {
    if (s.cls == SemanticClass::Wall || s.cls == SemanticClass::Pillar) out.push_back(&s);
  }
  return out;
}

namespace {

double orient(const Vec2d& a, const Vec2d& b, const Vec2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool on_segment(const Vec2d& a, const Vec2d& b, const Vec2d& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Vec2d& p1, const Vec2d& p2, const Vec2d& q1, const Vec2d& q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return (d1 == 0 && on_segment(q1, q2, p1)) || (d2 == 0 && on_segment(q1, q2, p2)) ||
         (d3 == 0 && on_segment(p1, p2, q1)) || (d4 == 0 && on_segment(p1, p2, q2));
}

bool self_intersects(const std::vector<Vec2d>& loop) {
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;  // adjacent edges share a vertex
      if (segments_intersect(loop[i], loop[(i + 1) % n], loop[j], loop[(j + 1) % n])) return true;
    }
  }
  return false;
}

double attr_double(const pt::ptree& attrs, const char* key, const std::string& where) {
  const auto v = attrs.get_optional<std::string>(key);
  if (!v) throw Error(ErrorKind::Parse, where + ": missing attribute '" + key + "'");
  try {
    std::size_t pos = 0;
    const double d = std::stod(*v, &pos);
    if (pos != v->size() || !std::isfinite(d)) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, where + ": attribute '" + key + "' is not a finite number: '" + *v + "'");
  }
}

std::int64_t attr_id(const pt::ptree& attrs, const char* key, const std::string& where) {
  const auto v = attrs.get_optional<std::string>(key);
  if (!v) throw Error(ErrorKind::Parse, where + ": missing attribute '" + key + "'");
  try {
    std::size_t pos = 0;
    const long long id = std::stoll(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return id;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, where + ": attribute '" + key + "' is not an integer id: '" + *v + "'");
  }
}

double parse_height(const std::map<std::string, std::string>& tags, WayId id) {
  const auto it = tags.find("height");
  if (it == tags.end()) return 0.0;
  try {
    std::size_t pos = 0;
    const double h = std::stod(it->second, &pos);
    // Accept a trailing unit of meters ("3.2 m").
    const std::string rest = it->second.substr(pos);
    if (!(rest.empty() || rest == "m" || rest == " m") || !(h > 0.0) || !std::isfinite(h)) {
      throw std::invalid_argument("bad height");
    }
    return h;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Structural, "way " + std::to_string(id) + ": invalid height tag '" + it->second + "'");
  }
}

void build_shapes(OsmMap& map) {
  map.shapes.clear();
  for (const auto& way : map.ways) {
    if (way.cls == SemanticClass::Unknown) continue;
    Shape shape;
    shape.way_id = way.id;
    shape.cls = way.cls;
    shape.height = parse_height(way.tags, way.id);
    shape.closed = way.closed();
    shape.refs = way.refs;
    if (shape.closed) shape.refs.pop_back();

    if (shape.closed) {
      const auto pts = map.points(shape);
      std::set<std::pair<double, double>> distinct;
      for (const auto& p : pts) distinct.emplace(p.x(), p.y());
      if (distinct.size() < 3 || distinct.size() != pts.size()) {
        throw Error(ErrorKind::Structural,
                    "way " + std::to_string(way.id) + ": closed loop needs at least 3 distinct, non-repeated vertices");
      }
      if (self_intersects(pts)) {
        throw Error(ErrorKind::Structural, "way " + std::to_string(way.id) + ": polygon is self-intersecting");
      }
    } else {
      // Only walls (centerlines) and roads are meaningful as open shapes.
      if (way.cls != SemanticClass::Wall && way.cls != SemanticClass::Road) continue;
      if (shape.refs.size() < 2) continue;
    }
    map.shapes.push_back(std::move(shape));
  }
}

}  // namespace

OsmMap parse_osm(std::string_view document) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorKind::Parse, "malformed OSM XML at line " + std::to_string(e.line()) + ": " + e.message());
  }

  const auto root = tree.get_child_optional("osm");
  if (!root) throw Error(ErrorKind::Parse, "malformed OSM XML at line 1: missing <osm> root element");

  OsmMap map;
  const pt::ptree empty;
  for (const auto& [name, child] : *root) {
    const auto& attrs = child.get_child("<xmlattr>", empty);
    if (name == "node") {
      const std::string where = "node";
      const NodeId id = attr_id(attrs, "id", where);
      const double lat = attr_double(attrs, "lat", "node " + std::to_string(id));
      const double lon = attr_double(attrs, "lon", "node " + std::to_string(id));
      map.nodes[id] = Vec2d(lon, lat);
    } else if (name == "way") {
      Way way;
      way.id = attr_id(attrs, "id", "way");
      const std::string where = "way " + std::to_string(way.id);
      for (const auto& [sub, el] : child) {
        const auto& sub_attrs = el.get_child("<xmlattr>", empty);
        if (sub == "nd") {
          way.refs.push_back(attr_id(sub_attrs, "ref", where));
        } else if (sub == "tag") {
          const auto k = sub_attrs.get_optional<std::string>("k");
          const auto v = sub_attrs.get_optional<std::string>("v");
          if (!k || !v) throw Error(ErrorKind::Parse, where + ": <tag> needs k and v attributes");
          way.tags[*k] = *v;
        }
      }
      way.cls = classify(way.tags);
      map.ways.push_back(std::move(way));
    }
    // relations, bounds, metadata are outside the supported subset
  }

  for (const auto& way : map.ways) {
    for (NodeId ref : way.refs) {
      if (!map.nodes.count(ref)) {
        throw Error(ErrorKind::Structural,
                    "way " + std::to_string(way.id) + " references missing node " + std::to_string(ref));
      }
    }
  }
  build_shapes(map);
  return map;
}

OsmMap load_osm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open OSM file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_osm(buf.str());
}

std::string serialize_osm(const OsmMap& map) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"parkingtwin\">\n";
  for (const auto& [id, p] : map.nodes) {
    out << "  <node id=\"" << id << "\" lat=\"" << p.y() << "\" lon=\"" << p.x() << "\"/>\n";
  }
  auto escape = [](const std::string& s) {
    std::string r;
    for (char c : s) {
      switch (c) {
        case '&': r += "&amp;"; break;
        case '<': r += "&lt;"; break;
        case '>': r += "&gt;"; break;
        case '"': r += "&quot;"; break;
        default: r += c;
      }
    }
    return r;
  };
  for (const auto& way : map.ways) {
    out << "  <way id=\"" << way.id << "\">\n";
    for (NodeId ref : way.refs) out << "    <nd ref=\"" << ref << "\"/>\n";
    for (const auto& [k, v] : way.tags) {
      out << "    <tag k=\"" << escape(k) << "\" v=\"" << escape(v) << "\"/>\n";
    }
    out << "  </way>\n";
  }
  out << "</osm>\n";
  return out.str();
}

OsmMap project_to_local(const OsmMap& map, CoordinateMode mode, const Vec2d& origin) {
  if (map.frame.projected) {
    throw Error(ErrorKind::Config, "map is already in a local metric frame; refusing to project twice");
  }
  OsmMap out = map;
  out.frame.mode = mode;
  out.frame.projected = true;
  out.frame.origin = origin;
  if (mode == CoordinateMode::Planar) {
    for (auto& [id, p] : out.nodes) p -= origin;
    return out;
  }
  if (std::abs(origin.y()) > 90.0 || std::abs(origin.x()) > 180.0) {
    throw Error(ErrorKind::Config, "geodetic origin is outside lat/lon range; is osm.coordinate_mode wrong?");
  }
  constexpr double deg = std::numbers::pi / 180.0;
  const double cos_lat0 = std::cos(origin.y() * deg);
  for (auto& [id, p] : out.nodes) {
    if (std::abs(p.y()) > 90.0 || std::abs(p.x()) > 180.0) {
      throw Error(ErrorKind::Config, "node " + std::to_string(id) +
                                         " is not a lat/lon coordinate; input mixes geodetic and planar conventions");
    }
    const double dlon = p.x() - origin.x();
    const double dlat = p.y() - origin.y();
    p = Vec2d(kEarthRadius * dlon * deg * cos_lat0, kEarthRadius * dlat * deg);
  }
  return out;
}

double dominant_angle(const OsmMap& map, double bin_width_deg) {
  if (!(bin_width_deg > 0.0) || bin_width_deg > 90.0) {
    throw Error(ErrorKind::Parameter, "histogram bin width must be in (0, 90] degrees");
  }
  const int bins = std::max(1, static_cast<int>(std::lround(90.0 / bin_width_deg)));
  const double width = 90.0 / bins;
  std::vector<double> mass(bins, 0.0);
  bool any = false;
  for (const Shape* shape : map.solids()) {
    const auto pts = map.points(*shape);
    const std::size_t edges = shape->closed ? pts.size() : pts.size() - 1;
    for (std::size_t i = 0; i < edges; ++i) {
      const Vec2d d = pts[(i + 1) % pts.size()] - pts[i];
      const double len = d.norm();
      if (len <= 0.0) continue;
      double a = std::atan2(d.y(), d.x()) * 180.0 / std::numbers::pi;
      a = std::fmod(a, 90.0);
      if (a < 0.0) a += 90.0;
      const int bin = static_cast<int>(std::lround(a / width)) % bins;
      mass[bin] += len;
      any = true;
    }
  }
  if (!any) throw Error(ErrorKind::Geometry, "empty geometry: no wall or pillar edges to build a direction histogram");
  const auto best = std::max_element(mass.begin(), mass.end()) - mass.begin();
  return static_cast<double>(best) * width;
}

Vec2d node_centroid(const OsmMap& map) {
  Vec2d c = Vec2d::Zero();
  if (map.nodes.empty()) return c;
  for (const auto& [id, p] : map.nodes) c += p;
  return c / static_cast<double>(map.nodes.size());
}

OsmMap rotate_about(const OsmMap& map, double angle_rad, const Vec2d& center) {
  OsmMap out = map;
  const Eigen::Isometry2d step =
      Eigen::Translation2d(center) * Eigen::Rotation2Dd(angle_rad) * Eigen::Translation2d(-center);
  for (auto& [id, p] : out.nodes) p = step * p;
  out.frame.rotation_rad += angle_rad;
  out.frame.alignment = step * out.frame.alignment;
  return out;
}

OsmMap align_axes(const OsmMap& map, double theta_deg) {
  if (theta_deg == 0.0) return map;
  return rotate_about(map, -theta_deg * std::numbers::pi / 180.0, node_centroid(map));
}

}  // namespace parkingtwin::osm
