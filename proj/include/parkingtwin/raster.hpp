#pragma once

#include <cmath>

#include "parkingtwin/camera.hpp"
#include "parkingtwin/mesh.hpp"
#include "parkingtwin/types.hpp"

namespace parkingtwin {

struct RasterOptions {
  bool cull_backfaces = true;  // only valid for closed, outward-wound meshes
  double near_plane = 0.02;    // meters
};

// Per-pixel nearest hit. Barycentrics refer to the original triangle corners
// (weights for corners 1 and 2; corner 0 gets 1 - b1 - b2).
struct RasterBuffers {
  FloatGrid depth;  // camera-frame z, +inf where nothing was hit
  IndexGrid face;   // kNoFace where nothing was hit
  FloatGrid bary1;
  FloatGrid bary2;
};

// Software z-buffer: perspective-correct, near-plane clipped, top-left fill
// rule, depth ties go to the lower face index.
RasterBuffers rasterize(const Vertices& positions, const Faces& faces, const Intrinsics& k, const Pose& camera_to_world,
                        const RasterOptions& options = {});

struct FrameGBuffer {
  FloatGrid ref_depth;         // rendered static depth, +inf where no hit
  RowVectors3<float> ref_normal;  // world-frame unit normals, one row per pixel, NaN where undefined
  IndexGrid face_id;
  FloatGrid grad_mag;          // |grad D| of the observed depth, m/px

  int width() const { return static_cast<int>(ref_depth.cols()); }
  int height() const { return static_cast<int>(ref_depth.rows()); }
};

// Central-difference gradient magnitude: [D(u+1)-D(u-1), D(v+1)-D(v-1)] / 2.
// Any stencil sample that is invalid (<= 0 or NaN) gives +inf. The image
// border replicates edge samples.
FloatGrid depth_gradient_magnitude(const DepthMap& depth);

inline bool depth_valid(float d) { return d > 0.0f && std::isfinite(d); }

FrameGBuffer render_gbuffer(const TriangleMesh& mesh, const Intrinsics& k, const Pose& camera_to_world,
                            const DepthMap& observed_depth, const RasterOptions& options = {});

// Projected vertex lands in frame, the reference depth there is finite and
// within `epsilon` of the vertex depth.
bool vertex_visible(const Vec3d& vertex, const FrameGBuffer& gbuffer, const Intrinsics& k, const Pose& camera_to_world,
                    double epsilon = 0.05);

// Nearest pixel of a continuous coordinate.
inline Eigen::Vector2i nearest_pixel(const Vec2d& u) {
  return Eigen::Vector2i(static_cast<int>(std::floor(u.x() + 0.5)), static_cast<int>(std::floor(u.y() + 0.5)));
}

}  // namespace parkingtwin
