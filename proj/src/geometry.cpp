#include "parkingtwin/geometry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "parkingtwin/error.hpp"

namespace parkingtwin::geometry {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool point_in_polygon(const std::vector<Vec2d>& poly, const Vec2d& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2d& a = poly[i];
    const Vec2d& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

// Half-open rectangle around segment a-b: offset across in [-w/2, w/2),
// along in [-w/2, len + w/2). Extending the ends fills wall corners.
bool in_band(const Vec2d& a, const Vec2d& b, double width, const Vec2d& p) {
  const Vec2d d = b - a;
  const double len = d.norm();
  if (len <= 0.0) return false;
  const Vec2d t = d / len;
  const Vec2d n(-t.y(), t.x());
  const Vec2d r = p - a;
  const double along = r.dot(t);
  const double across = r.dot(n);
  const double h = 0.5 * width;
  return across >= -h && across < h && along >= -h && along < len + h;
}

}  // namespace

OccupancyGrid rasterize_occupancy(const osm::OsmMap& map, double voxel_size, double padding,
                                  const RasterOptions& options) {
  if (!(voxel_size > 0.0)) throw Error(ErrorKind::Parameter, "voxel size must be positive");
  if (padding < 0.0) throw Error(ErrorKind::Parameter, "padding must be non-negative");
  const auto solids = map.solids();
  if (solids.empty()) throw Error(ErrorKind::Geometry, "map has no wall or pillar polygons to rasterize");

  Eigen::AlignedBox2d box;
  for (const auto* s : solids) {
    for (const auto& p : map.points(*s)) box.extend(p);
  }
  const double margin = padding + 0.5 * options.wall_thickness;
  const double x_lo = std::floor((box.min().x() - margin) / voxel_size) * voxel_size;
  const double y_lo = std::floor((box.min().y() - margin) / voxel_size) * voxel_size;
  const auto nx = static_cast<Eigen::Index>(std::ceil((box.max().x() + margin - x_lo) / voxel_size - 1e-9));
  const auto ny = static_cast<Eigen::Index>(std::ceil((box.max().y() + margin - y_lo) / voxel_size - 1e-9));

  OccupancyGrid grid;
  grid.voxel_size = voxel_size;
  grid.origin = Vec2d(x_lo + 0.5 * voxel_size, y_lo + 0.5 * voxel_size);
  grid.solid = BoolGrid::Constant(ny, nx, false);
  grid.top = DoubleGrid::Zero(ny, nx);

  auto cell_range = [&](double lo, double hi, double origin, Eigen::Index n) {
    const auto a = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor((lo - origin) / voxel_size)) - 1);
    const auto b = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::ceil((hi - origin) / voxel_size)) + 1);
    return std::pair{a, b};
  };

  for (const auto* s : solids) {
    const auto pts = map.points(*s);
    const double h = s->height > 0.0 ? s->height : options.default_height;
    Eigen::AlignedBox2d sb;
    for (const auto& p : pts) sb.extend(p);
    const double grow = s->cls == osm::SemanticClass::Wall ? 0.5 * options.wall_thickness : 0.0;
    const auto [c0, c1] = cell_range(sb.min().x() - grow, sb.max().x() + grow, grid.origin.x(), nx);
    const auto [r0, r1] = cell_range(sb.min().y() - grow, sb.max().y() + grow, grid.origin.y(), ny);
    const std::size_t edges = s->closed ? pts.size() : pts.size() - 1;
    for (Eigen::Index r = r0; r <= r1; ++r) {
      for (Eigen::Index c = c0; c <= c1; ++c) {
        const Vec2d p = grid.cell_center(r, c);
        bool hit = false;
        if (s->cls == osm::SemanticClass::Pillar) {
          hit = point_in_polygon(pts, p);
        } else {
          for (std::size_t e = 0; e < edges && !hit; ++e) {
            hit = in_band(pts[e], pts[(e + 1) % pts.size()], options.wall_thickness, p);
          }
        }
        if (hit) {
          grid.solid(r, c) = true;
          grid.top(r, c) = std::max(grid.top(r, c), h);
        }
      }
    }
  }
  return grid;
}

namespace {

// Lower envelope of parabolas; f holds squared distances (kInf for none).
void distance_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  v.resize(n);
  z.resize(n + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d, d + n, kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = static_cast<double>(q - v[j]);
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace

DoubleGrid squared_distance_transform(const BoolGrid& features) {
  const auto rows = static_cast<int>(features.rows());
  const auto cols = static_cast<int>(features.cols());
  DoubleGrid out(rows, cols);
  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> f(std::max(rows, cols)), d(std::max(rows, cols));

  // columns
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) f[r] = features(r, c) ? 0.0 : kInf;
    distance_1d(f.data(), d.data(), rows, v, z);
    for (int r = 0; r < rows; ++r) out(r, c) = d[r];
  }
  // rows
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) f[c] = out(r, c);
    distance_1d(f.data(), d.data(), cols, v, z);
    for (int c = 0; c < cols; ++c) out(r, c) = d[c];
  }
  return out;
}

DoubleGrid distance_field_2d(const BoolGrid& solid, double voxel_size) {
  if (solid.size() == 0) throw Error(ErrorKind::Parameter, "distance field of an empty grid");
  const DoubleGrid to_solid = squared_distance_transform(solid);
  const DoubleGrid to_free = squared_distance_transform(!solid);
  DoubleGrid phi(solid.rows(), solid.cols());
  const double half = 0.5 * voxel_size;
  for (Eigen::Index r = 0; r < solid.rows(); ++r) {
    for (Eigen::Index c = 0; c < solid.cols(); ++c) {
      if (solid(r, c)) {
        const double d2 = to_free(r, c);
        phi(r, c) = d2 == kInf ? -kInf : -(std::sqrt(d2) * voxel_size - half);
      } else {
        const double d2 = to_solid(r, c);
        phi(r, c) = d2 == kInf ? kInf : std::sqrt(d2) * voxel_size - half;
      }
    }
  }
  return phi;
}

namespace {

// Shared extrusion core. `layer_field(j)` returns the 2D signed field of slab
// layer j (j in [0, layers)); anything above the slab is +inf.
template <typename LayerField>
TsdfVolume extrude_layers(Eigen::Index nx, Eigen::Index ny, const Vec2d& xy_origin, int layers, double tau,
                          double voxel, double z_ground, const ExtrudeOptions& options, LayerField&& layer_field) {
  if (!(tau > 0.0)) throw Error(ErrorKind::Parameter, "truncation distance must be positive");
  if (!(voxel > 0.0)) throw Error(ErrorKind::Parameter, "voxel size must be positive");
  if (layers < 1) throw Error(ErrorKind::Parameter, "extrusion height must be at least one voxel");

  TsdfVolume vol;
  vol.voxel_size = voxel;
  vol.tau = tau;
  vol.dims = Eigen::Vector3i(static_cast<int>(nx), static_cast<int>(ny), layers + kLayersBelowGround + 1);
  vol.origin = Vec3d(xy_origin.x(), xy_origin.y(), z_ground - 1.5 * voxel);
  vol.values.assign(static_cast<std::size_t>(vol.dims.prod()), tau);

  const double half = 0.5 * voxel;
  auto lateral = [&](int i, int j) {
    const int ring = std::min({i, j, static_cast<int>(nx) - 1 - i, static_cast<int>(ny) - 1 - j});
    return ring == 0 ? half : -(ring - 0.5) * voxel;
  };
  auto clampv = [&](double x) { return std::clamp(x, -tau, tau); };

  const DoubleGrid* prev = nullptr;
  for (int k = 0; k < vol.dims.z(); ++k) {
    const int j_layer = k - kLayersBelowGround;
    const DoubleGrid* cur = (j_layer >= 0 && j_layer < layers) ? &layer_field(j_layer) : nullptr;
    const DoubleGrid* base = &layer_field(0);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        double prism;
        if (k < kLayersBelowGround) {
          // below the slab: distance to the prism bottom face
          prism = std::max((*base)(j, i), (kLayersBelowGround - k - 0.5) * voxel);
        } else if (cur == nullptr) {
          prism = std::max((*prev)(j, i), half);  // cap above the tallest layer
        } else if (prev == nullptr) {
          prism = (*cur)(j, i);
        } else {
          prism = std::min((*cur)(j, i), std::max((*prev)(j, i), half));
        }
        double value = prism;
        if (options.ground) {
          const double dz = (k - 1.5) * voxel;  // z - z_ground
          const double slab = std::max(dz, -voxel - dz);  // ground slab [z_g - voxel, z_g]
          value = std::min(value, std::max(slab, lateral(i, j)));
        }
        vol.values[vol.index(i, j, k)] = clampv(value);
      }
    }
    if (cur != nullptr) prev = cur;
  }
  return vol;
}

}  // namespace

TsdfVolume extrude_tsdf(const DoubleGrid& phi2d, const Vec2d& xy_origin, double height, double tau,
                        double voxel_size, double z_ground, const ExtrudeOptions& options) {
  if (!(height > 0.0)) throw Error(ErrorKind::Parameter, "extrusion height must be positive");
  if (phi2d.rows() < 2 || phi2d.cols() < 2) throw Error(ErrorKind::Parameter, "2D field must be at least 2x2");
  const int layers = static_cast<int>(std::lround(height / voxel_size));
  return extrude_layers(phi2d.cols(), phi2d.rows(), xy_origin, layers, tau, voxel_size, z_ground, options,
                        [&](int) -> const DoubleGrid& { return phi2d; });
}

TsdfVolume extrude_tsdf(const OccupancyGrid& occ, double tau, double z_ground, const ExtrudeOptions& options) {
  const double v = occ.voxel_size;
  if (occ.nx() < 2 || occ.ny() < 2) throw Error(ErrorKind::Parameter, "occupancy grid must be at least 2x2");
  // per-cell layer counts
  Grid<int> layers_of(occ.ny(), occ.nx());
  int layers = 0;
  for (Eigen::Index r = 0; r < occ.ny(); ++r) {
    for (Eigen::Index c = 0; c < occ.nx(); ++c) {
      layers_of(r, c) = occ.solid(r, c) ? std::max(1, static_cast<int>(std::lround(occ.top(r, c) / v))) : 0;
      layers = std::max(layers, layers_of(r, c));
    }
  }
  if (layers == 0) throw Error(ErrorKind::Geometry, "occupancy grid has no solid cells");

  // Cache one field per distinct layer mask.
  std::map<int, DoubleGrid> fields;
  auto field_for = [&](int j) -> const DoubleGrid& {
    // mask changes only when j reaches a cell's layer count; key by the
    // smallest count exceeding j
    int key = std::numeric_limits<int>::max();
    for (Eigen::Index r = 0; r < occ.ny(); ++r) {
      for (Eigen::Index c = 0; c < occ.nx(); ++c) {
        if (layers_of(r, c) > j) key = std::min(key, layers_of(r, c));
      }
    }
    auto it = fields.find(key);
    if (it == fields.end()) {
      const BoolGrid mask = layers_of > j;
      it = fields.emplace(key, distance_field_2d(mask, v)).first;
    }
    return it->second;
  };
  // Precompute the key per layer so the per-layer scan happens once.
  std::vector<const DoubleGrid*> per_layer(layers);
  for (int j = 0; j < layers; ++j) per_layer[j] = &field_for(j);
  return extrude_layers(occ.nx(), occ.ny(), occ.origin, layers, tau, v, z_ground, options,
                        [&](int j) -> const DoubleGrid& { return *per_layer[j]; });
}

// ---------------------------------------------------------------------------
// Marching cubes

// Corner c sits at offset (c & 1, (c >> 1) & 1, (c >> 2) & 1).
const std::array<std::array<int, 2>, 12> kCubeEdges = {{
    {0, 1}, {2, 3}, {4, 5}, {6, 7},  // along x
    {0, 2}, {1, 3}, {4, 6}, {5, 7},  // along y
    {0, 4}, {1, 5}, {2, 6}, {3, 7},  // along z
}};

namespace {

int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e) {
    if ((kCubeEdges[e][0] == a && kCubeEdges[e][1] == b) || (kCubeEdges[e][0] == b && kCubeEdges[e][1] == a)) return e;
  }
  return -1;
}

Vec3d corner_offset(int c) { return Vec3d(c & 1, (c >> 1) & 1, (c >> 2) & 1); }

// Faces are resolved from their own four corner signs only, so neighbouring
// cubes agree on every shared face and the surface has no cracks. Ambiguous
// faces separate the inside (negative) corners.
CubeCase build_case(int mask) {
  auto inside = [&](int c) { return (mask >> c) & 1; };
  std::vector<std::array<int, 2>> segments;
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const int b = (axis + 1) % 3, d = (axis + 2) % 3;
      std::array<int, 4> q{};
      const int order[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
      for (int t = 0; t < 4; ++t) q[t] = (side << axis) | (order[t][0] << b) | (order[t][1] << d);
      std::array<int, 4> e{};
      int crossings = 0;
      for (int t = 0; t < 4; ++t) {
        e[t] = edge_between(q[t], q[(t + 1) % 4]);
        crossings += inside(q[t]) != inside(q[(t + 1) % 4]);
      }
      if (crossings == 2) {
        std::array<int, 2> seg{};
        int n = 0;
        for (int t = 0; t < 4; ++t) {
          if (inside(q[t]) != inside(q[(t + 1) % 4])) seg[n++] = e[t];
        }
        segments.push_back(seg);
      } else if (crossings == 4) {
        for (int t = 0; t < 4; ++t) {
          if (inside(q[t])) segments.push_back({e[(t + 3) % 4], e[t]});
        }
      }
    }
  }

  CubeCase out;
  std::vector<bool> used(segments.size(), false);
  for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
    if (used[s0]) continue;
    std::vector<int> loop{segments[s0][0], segments[s0][1]};
    used[s0] = true;
    while (true) {
      const int tail = loop.back();
      bool advanced = false;
      for (std::size_t s = 0; s < segments.size(); ++s) {
        if (used[s]) continue;
        if (segments[s][0] == tail || segments[s][1] == tail) {
          const int next = segments[s][0] == tail ? segments[s][1] : segments[s][0];
          used[s] = true;
          advanced = true;
          if (next != loop.front()) loop.push_back(next);
          break;
        }
      }
      if (!advanced) break;
    }
    // Orient the loop so its normal points toward the positive corners.
    Vec3d newell = Vec3d::Zero();
    Vec3d outward = Vec3d::Zero();
    for (std::size_t t = 0; t < loop.size(); ++t) {
      const auto& ea = kCubeEdges[loop[t]];
      const auto& eb = kCubeEdges[loop[(t + 1) % loop.size()]];
      const Vec3d pa = 0.5 * (corner_offset(ea[0]) + corner_offset(ea[1]));
      const Vec3d pb = 0.5 * (corner_offset(eb[0]) + corner_offset(eb[1]));
      newell += pa.cross(pb);
      const int in = inside(ea[0]) ? ea[0] : ea[1];
      const int outc = inside(ea[0]) ? ea[1] : ea[0];
      outward += corner_offset(outc) - corner_offset(in);
    }
    if (newell.dot(outward) < 0.0) std::reverse(loop.begin(), loop.end());
    for (std::size_t t = 1; t + 1 < loop.size(); ++t) out.triangles.push_back({loop[0], loop[t], loop[t + 1]});
  }
  return out;
}

}  // namespace

const std::array<CubeCase, 256>& marching_cubes_table() {
  static const std::array<CubeCase, 256> table = [] {
    std::array<CubeCase, 256> t;
    for (int m = 0; m < 256; ++m) t[m] = build_case(m);
    return t;
  }();
  return table;
}

TriangleMesh marching_cubes(const TsdfVolume& vol) {
  const auto& table = marching_cubes_table();
  const int nx = vol.dims.x(), ny = vol.dims.y(), nz = vol.dims.z();
  TriangleMesh mesh;
  if (nx < 2 || ny < 2 || nz < 2) return mesh;

  std::vector<std::int32_t> edge_vertex(static_cast<std::size_t>(nx) * ny * nz * 3, -1);
  std::vector<Vec3d> positions;
  std::vector<std::array<std::int32_t, 3>> faces;

  auto vertex_on = [&](int i, int j, int k, int cube_edge) -> std::int32_t {
    const int a = kCubeEdges[cube_edge][0];
    const int b = kCubeEdges[cube_edge][1];
    const int ai = i + (a & 1), aj = j + ((a >> 1) & 1), ak = k + ((a >> 2) & 1);
    const int axis = cube_edge / 4;
    const std::size_t key = vol.index(ai, aj, ak) * 3 + axis;
    if (edge_vertex[key] >= 0) return edge_vertex[key];
    const int bi = i + (b & 1), bj = j + ((b >> 1) & 1), bk = k + ((b >> 2) & 1);
    const double va = vol.at(ai, aj, ak);
    const double vb = vol.at(bi, bj, bk);
    const double t = va / (va - vb);
    const Vec3d pa = vol.position(ai, aj, ak);
    const Vec3d pb = vol.position(bi, bj, bk);
    edge_vertex[key] = static_cast<std::int32_t>(positions.size());
    positions.push_back(pa + t * (pb - pa));
    return edge_vertex[key];
  };

  for (int k = 0; k + 1 < nz; ++k) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        int mask = 0;
        for (int c = 0; c < 8; ++c) {
          if (vol.at(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1)) < 0.0) mask |= 1 << c;
        }
        if (mask == 0 || mask == 255) continue;
        for (const auto& tri : table[mask].triangles) {
          faces.push_back({vertex_on(i, j, k, tri[0]), vertex_on(i, j, k, tri[1]), vertex_on(i, j, k, tri[2])});
        }
      }
    }
  }

  mesh.positions.resize(positions.size(), 3);
  for (std::size_t v = 0; v < positions.size(); ++v) mesh.positions.row(v) = positions[v].transpose();
  mesh.faces.resize(faces.size(), 3);
  for (std::size_t f = 0; f < faces.size(); ++f) mesh.faces.row(f) << faces[f][0], faces[f][1], faces[f][2];
  mesh.compute_normals();
  mesh.build_adjacency();
  mesh.reset_colors();
  return mesh;
}

GeometryResult build_geometry(const osm::OsmMap& map, const GeometryParams& params) {
  GeometryResult out;
  auto t0 = std::chrono::steady_clock::now();
  RasterOptions raster;
  raster.wall_thickness = params.wall_thickness;
  raster.default_height = params.height;
  out.occupancy = rasterize_occupancy(map, params.voxel_size, params.padding, raster);
  out.seconds_rasterize = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  ExtrudeOptions ext;
  ext.ground = params.ground;
  out.volume = extrude_tsdf(out.occupancy, params.tau, params.z_ground, ext);
  out.seconds_volume = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  out.mesh = marching_cubes(out.volume);
  if (params.weld_tolerance > 0.0) {
    weld_vertices(out.mesh, params.weld_tolerance);
    out.mesh.compute_normals();
    out.mesh.build_adjacency();
    out.mesh.reset_colors();
  }
  out.seconds_mesh = seconds_since(t0);
  return out;
}

}  // namespace parkingtwin::geometry
