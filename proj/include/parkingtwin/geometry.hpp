#pragma once

#include <array>
#include <vector>

#include "parkingtwin/mesh.hpp"
#include "parkingtwin/osm.hpp"
#include "parkingtwin/types.hpp"

namespace parkingtwin::geometry {

struct OccupancyGrid {
  BoolGrid solid;         // rows = y, cols = x
  DoubleGrid top;         // extrusion height per solid cell (m above ground)
  Vec2d origin = Vec2d::Zero();  // center of cell (row 0, col 0)
  double voxel_size = 0.1;

  Eigen::Index nx() const { return solid.cols(); }
  Eigen::Index ny() const { return solid.rows(); }
  Vec2d cell_center(Eigen::Index row, Eigen::Index col) const {
    return origin + voxel_size * Vec2d(static_cast<double>(col), static_cast<double>(row));
  }
};

struct RasterOptions {
  double wall_thickness = 0.2;  // band width around wall centerlines
  double default_height = 3.0;
};

// Cell is solid iff its center lies inside a pillar polygon or a wall band.
OccupancyGrid rasterize_occupancy(const osm::OsmMap& map, double voxel_size, double padding,
                                  const RasterOptions& options = {});

// Squared Euclidean distance (in cells) to the nearest `true` cell, exact.
// Cells with no feature anywhere get +infinity.
DoubleGrid squared_distance_transform(const BoolGrid& features);

// Signed distance in meters: negative inside solid, positive in free space,
// zero crossing halfway between a solid and a free cell center.
// All-free grids give +inf, all-solid grids -inf.
DoubleGrid distance_field_2d(const BoolGrid& solid, double voxel_size);

struct TsdfVolume {
  Vec3d origin = Vec3d::Zero();  // position of sample (0, 0, 0)
  double voxel_size = 0.1;
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  double tau = 0.3;
  std::vector<double> values;  // x fastest, then y, then z

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims.y() + j) * dims.x() + i;
  }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }
  double& at(int i, int j, int k) { return values[index(i, j, k)]; }
  Vec3d position(int i, int j, int k) const { return origin + voxel_size * Vec3d(i, j, k); }
};

struct ExtrudeOptions {
  // Union the field with a one-voxel ground slab under z_g so the floor is
  // part of the extracted surface.
  bool ground = true;
};

// Layer layout along z: sample k sits at z_g + (k - 1.5) * voxel_size.
// k = 0, 1 lie below z_g, k = 2 .. n+1 are the n = round(H / voxel) slab
// layers, k = n+2 is the cap above the slab.
inline constexpr int kLayersBelowGround = 2;

TsdfVolume extrude_tsdf(const DoubleGrid& phi2d, const Vec2d& xy_origin, double height, double tau,
                        double voxel_size, double z_ground, const ExtrudeOptions& options = {});

// Per-cell heights from the occupancy grid (OSM `height` tags).
TsdfVolume extrude_tsdf(const OccupancyGrid& occupancy, double tau, double z_ground,
                        const ExtrudeOptions& options = {});

// Lookup table of the 256 sign configurations. Each entry lists cube-edge
// triples; edges are numbered by `kCubeEdges`.
struct CubeCase {
  std::vector<std::array<int, 3>> triangles;
};
const std::array<CubeCase, 256>& marching_cubes_table();
extern const std::array<std::array<int, 2>, 12> kCubeEdges;

// Zero level set with linear edge interpolation. Vertices are shared per grid
// edge. Faces wind so normals point toward positive values.
TriangleMesh marching_cubes(const TsdfVolume& volume);

struct GeometryParams {
  double voxel_size = 0.1;
  double height = 3.0;
  double tau = 0.3;
  double padding = 1.0;
  double z_ground = 0.0;
  double wall_thickness = 0.2;
  bool ground = true;
  double weld_tolerance = 1e-6;
};

struct GeometryResult {
  OccupancyGrid occupancy;
  TsdfVolume volume;
  TriangleMesh mesh;
  double seconds_rasterize = 0.0;
  double seconds_volume = 0.0;
  double seconds_mesh = 0.0;
};

GeometryResult build_geometry(const osm::OsmMap& map, const GeometryParams& params);

}  // namespace parkingtwin::geometry
