#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Geometry>

#include "parkingtwin/types.hpp"

namespace parkingtwin::osm {

using NodeId = std::int64_t;
using WayId = std::int64_t;

enum class SemanticClass { Wall, Pillar, ParkingArea, Road, Unknown };

const char* to_string(SemanticClass cls);

// Maps an OSM tag set onto the blueprint vocabulary.
SemanticClass classify(const std::map<std::string, std::string>& tags);

enum class CoordinateMode { Geodetic, Planar };

struct Way {
  WayId id = 0;
  std::vector<NodeId> refs;
  std::map<std::string, std::string> tags;
  SemanticClass cls = SemanticClass::Unknown;

  bool closed() const { return refs.size() >= 4 && refs.front() == refs.back(); }
};

// Classified geometry. Closed loops drop the repeated closing reference;
// open shapes (wall centerlines, roads) keep their polyline order.
struct Shape {
  WayId way_id = 0;
  SemanticClass cls = SemanticClass::Unknown;
  std::vector<NodeId> refs;
  bool closed = false;
  double height = 0.0;  // extrusion height override, 0 = use default
};

struct MapFrame {
  CoordinateMode mode = CoordinateMode::Planar;
  bool projected = false;
  Vec2d origin = Vec2d::Zero();  // (lon0, lat0) in degrees, or planar (x0, y0)
  double rotation_rad = 0.0;     // accumulated rotation applied by align_axes
  Eigen::Isometry2d alignment = Eigen::Isometry2d::Identity();  // local -> aligned
};

// Node coordinates are stored as (x, y); for geodetic input x = lon, y = lat
// until project_to_local converts them to meters.
struct OsmMap {
  std::map<NodeId, Vec2d> nodes;
  std::vector<Way> ways;
  std::vector<Shape> shapes;
  MapFrame frame;

  std::vector<Vec2d> points(const Shape& shape) const;
  std::size_t count(SemanticClass cls) const;
  std::vector<const Shape*> solids() const;  // walls and pillars
};

// Parses the node/way/tag subset of OSM XML v0.6. Throws Error(Parse) with a
// line number for malformed XML and Error(Structural) for dangling node refs
// or invalid loops.
OsmMap parse_osm(std::string_view document);
OsmMap load_osm(const std::string& path);

std::string serialize_osm(const OsmMap& map);

OsmMap project_to_local(const OsmMap& map, CoordinateMode mode, const Vec2d& origin);

inline constexpr double kEarthRadius = 6378137.0;

// Length-weighted histogram of edge directions folded into [0, 90). Returns
// the center of the heaviest bin, in degrees.
double dominant_angle(const OsmMap& map, double bin_width_deg = 1.0);

OsmMap rotate_about(const OsmMap& map, double angle_rad, const Vec2d& center);

// Rotates by -theta about the node centroid and records the transform.
OsmMap align_axes(const OsmMap& map, double theta_deg);

Vec2d node_centroid(const OsmMap& map);

}  // namespace parkingtwin::osm
