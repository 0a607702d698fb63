#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "parkingtwin/types.hpp"

namespace parkingtwin {

// Explicit triangle mesh with per-vertex colors. Faces are counter-clockwise
// when viewed from the free side, so face normals point away from solid.
struct TriangleMesh {
  Vertices positions;
  Vertices normals;
  Faces faces;

  Vertices lab;                       // fused CIELAB working copy
  ColorsU8 rgb;                       // export copy
  std::vector<std::uint8_t> observed;  // 0 = fallback color

  // Compressed vertex -> incident face lists.
  std::vector<std::int32_t> adjacency_offsets;
  std::vector<std::int32_t> adjacency_faces;

  Eigen::Index vertex_count() const { return positions.rows(); }
  Eigen::Index face_count() const { return faces.rows(); }
  bool empty() const { return faces.rows() == 0; }

  std::span<const std::int32_t> incident_faces(Eigen::Index v) const {
    return {adjacency_faces.data() + adjacency_offsets[v],
            static_cast<std::size_t>(adjacency_offsets[v + 1] - adjacency_offsets[v])};
  }

  void build_adjacency();
  // Area-weighted vertex normals from face cross products.
  void compute_normals();
  // Sizes color buffers to the vertex count with the given fill.
  void reset_colors(const Vec3d& lab_fill = Vec3d(50.0, 0.0, 0.0));

  Vec3d face_barycenter(Eigen::Index f) const {
    return (positions.row(faces(f, 0)) + positions.row(faces(f, 1)) + positions.row(faces(f, 2))).transpose() / 3.0;
  }
};

// Checks index ranges, normal lengths, adjacency consistency and color sizes.
// Returns an empty string when valid, else the first violation.
std::string validate(const TriangleMesh& mesh);

struct ManifoldReport {
  bool closed = false;          // every undirected edge used by exactly 2 faces
  bool consistently_oriented = false;
  std::size_t edges = 0;
  std::size_t boundary_edges = 0;
  std::size_t nonmanifold_edges = 0;
  long euler_characteristic = 0;  // V - E + F
};

ManifoldReport check_manifold(const TriangleMesh& mesh);

double surface_area(const TriangleMesh& mesh);
Eigen::AlignedBox3d bounds(const TriangleMesh& mesh);

// Merges vertices closer than `tolerance` and drops faces that collapse.
void weld_vertices(TriangleMesh& mesh, double tolerance);

// Concatenates meshes; colors are carried when present on every input.
TriangleMesh concatenate(const std::vector<const TriangleMesh*>& parts);

enum class MeshFormat { Ply, Obj };

MeshFormat mesh_format_from_path(const std::string& path);

// PLY: binary little endian, double positions and normals, uchar RGB.
// OBJ: `v x y z r g b` with colors in [0,1], plus `vn` normals.
void export_mesh(const TriangleMesh& mesh, MeshFormat format, const std::string& path);
TriangleMesh import_mesh(const std::string& path);

void write_ply(const TriangleMesh& mesh, const std::string& path);
TriangleMesh read_ply(const std::string& path);
void write_obj(const TriangleMesh& mesh, const std::string& path);
TriangleMesh read_obj(const std::string& path);

}  // namespace parkingtwin
