#include "parkingtwin/raster.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace parkingtwin {

namespace {

struct ClipVertex {
  Vec3d p;   // camera frame
  Vec2d b;   // barycentrics (corner 1, corner 2) of the source triangle
};

inline double edge_fn(const Vec2d& a, const Vec2d& b, double px, double py) {
  return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

inline bool top_left(const Vec2d& a, const Vec2d& b) {
  const double dx = b.x() - a.x();
  const double dy = b.y() - a.y();
  return dy < 0.0 || (dy == 0.0 && dx > 0.0);
}

int clip_near(const std::array<ClipVertex, 3>& in, double near, std::array<ClipVertex, 4>& out) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& a = in[i];
    const ClipVertex& b = in[(i + 1) % 3];
    const bool a_in = a.p.z() >= near;
    const bool b_in = b.p.z() >= near;
    if (a_in) out[n++] = a;
    if (a_in != b_in) {
      const double t = (near - a.p.z()) / (b.p.z() - a.p.z());
      out[n++] = ClipVertex{a.p + t * (b.p - a.p), a.b + t * (b.b - a.b)};
    }
  }
  return n;
}

}  // namespace

RasterBuffers rasterize(const Vertices& positions, const Faces& faces, const Intrinsics& k, const Pose& camera_to_world,
                        const RasterOptions& options) {
  const int W = k.width;
  const int H = k.height;
  RasterBuffers buf;
  buf.depth = FloatGrid::Constant(H, W, kInfDepth);
  buf.face = IndexGrid::Constant(H, W, kNoFace);
  buf.bary1 = FloatGrid::Zero(H, W);
  buf.bary2 = FloatGrid::Zero(H, W);
  if (faces.rows() == 0) return buf;

  const Eigen::Matrix3d rt = camera_to_world.linear().transpose();
  const Vec3d t = camera_to_world.translation();
  Vertices cam(positions.rows(), 3);
  for (Eigen::Index v = 0; v < positions.rows(); ++v) {
    cam.row(v) = (rt * (Vec3d(positions.row(v)) - t)).transpose();
  }

  // Working depth in double for tie stability; copied to float at the end.
  DoubleGrid zbuf = DoubleGrid::Constant(H, W, std::numeric_limits<double>::infinity());
  const double near = options.near_plane;

  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    std::array<ClipVertex, 3> tri = {ClipVertex{cam.row(faces(f, 0)), Vec2d(0, 0)},
                                     ClipVertex{cam.row(faces(f, 1)), Vec2d(1, 0)},
                                     ClipVertex{cam.row(faces(f, 2)), Vec2d(0, 1)}};
    if (tri[0].p.z() < near && tri[1].p.z() < near && tri[2].p.z() < near) continue;
    if (options.cull_backfaces) {
      const Vec3d n = (tri[1].p - tri[0].p).cross(tri[2].p - tri[0].p);
      if (n.dot(tri[0].p) >= 0.0) continue;
    }
    std::array<ClipVertex, 4> poly;
    int count = 3;
    if (tri[0].p.z() >= near && tri[1].p.z() >= near && tri[2].p.z() >= near) {
      poly[0] = tri[0];
      poly[1] = tri[1];
      poly[2] = tri[2];
    } else {
      count = clip_near(tri, near, poly);
    }

    for (int fan = 1; fan + 1 < count; ++fan) {
      std::array<const ClipVertex*, 3> sv = {&poly[0], &poly[fan], &poly[fan + 1]};
      std::array<Vec2d, 3> s;
      std::array<double, 3> inv_z;
      for (int i = 0; i < 3; ++i) {
        inv_z[i] = 1.0 / sv[i]->p.z();
        s[i] = Vec2d(k.fx * sv[i]->p.x() * inv_z[i] + k.cx, k.fy * sv[i]->p.y() * inv_z[i] + k.cy);
      }
      double area = edge_fn(s[0], s[1], s[2].x(), s[2].y());
      if (!(std::abs(area) > 1e-12)) continue;
      if (area < 0.0) {
        std::swap(s[1], s[2]);
        std::swap(sv[1], sv[2]);
        std::swap(inv_z[1], inv_z[2]);
        area = -area;
      }
      const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({s[0].x(), s[1].x(), s[2].x()}))));
      const int x1 = std::min(W - 1, static_cast<int>(std::floor(std::max({s[0].x(), s[1].x(), s[2].x()}))));
      const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({s[0].y(), s[1].y(), s[2].y()}))));
      const int y1 = std::min(H - 1, static_cast<int>(std::floor(std::max({s[0].y(), s[1].y(), s[2].y()}))));
      if (x0 > x1 || y0 > y1) continue;
      const bool tl0 = top_left(s[1], s[2]);
      const bool tl1 = top_left(s[2], s[0]);
      const bool tl2 = top_left(s[0], s[1]);
      const double inv_area = 1.0 / area;
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double w0 = edge_fn(s[1], s[2], x, y);
          const double w1 = edge_fn(s[2], s[0], x, y);
          const double w2 = edge_fn(s[0], s[1], x, y);
          if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
          if ((w0 == 0.0 && !tl0) || (w1 == 0.0 && !tl1) || (w2 == 0.0 && !tl2)) continue;
          const double l0 = w0 * inv_area, l1 = w1 * inv_area, l2 = w2 * inv_area;
          const double iz = l0 * inv_z[0] + l1 * inv_z[1] + l2 * inv_z[2];
          const double z = 1.0 / iz;
          if (!(z < zbuf(y, x))) continue;
          zbuf(y, x) = z;
          buf.face(y, x) = static_cast<std::int32_t>(f);
          const Vec2d b = (l0 * inv_z[0] * sv[0]->b + l1 * inv_z[1] * sv[1]->b + l2 * inv_z[2] * sv[2]->b) * z;
          buf.bary1(y, x) = static_cast<float>(b.x());
          buf.bary2(y, x) = static_cast<float>(b.y());
        }
      }
    }
  }
  buf.depth = zbuf.cast<float>();
  return buf;
}

FloatGrid depth_gradient_magnitude(const DepthMap& depth) {
  const int H = static_cast<int>(depth.rows());
  const int W = static_cast<int>(depth.cols());
  FloatGrid g(H, W);
  for (int y = 0; y < H; ++y) {
    const int yu = std::max(y - 1, 0), yd = std::min(y + 1, H - 1);
    for (int x = 0; x < W; ++x) {
      const int xl = std::max(x - 1, 0), xr = std::min(x + 1, W - 1);
      const float c = depth(y, x), l = depth(y, xl), r = depth(y, xr), u = depth(yu, x), d = depth(yd, x);
      if (!depth_valid(c) || !depth_valid(l) || !depth_valid(r) || !depth_valid(u) || !depth_valid(d)) {
        g(y, x) = std::numeric_limits<float>::infinity();
        continue;
      }
      const float gx = 0.5f * (r - l);
      const float gy = 0.5f * (d - u);
      g(y, x) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return g;
}

FrameGBuffer render_gbuffer(const TriangleMesh& mesh, const Intrinsics& k, const Pose& camera_to_world,
                            const DepthMap& observed_depth, const RasterOptions& options) {
  RasterBuffers r = rasterize(mesh.positions, mesh.faces, k, camera_to_world, options);
  FrameGBuffer gb;
  gb.ref_depth = std::move(r.depth);
  gb.face_id = std::move(r.face);
  const auto n_pix = static_cast<Eigen::Index>(k.width) * k.height;
  gb.ref_normal = RowVectors3<float>::Constant(n_pix, 3, std::numeric_limits<float>::quiet_NaN());
  const bool has_normals = mesh.normals.rows() == mesh.vertex_count();
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const std::int32_t f = gb.face_id(y, x);
      if (f == kNoFace) continue;
      Vec3d n;
      if (has_normals) {
        const double b1 = r.bary1(y, x), b2 = r.bary2(y, x);
        n = (1.0 - b1 - b2) * Vec3d(mesh.normals.row(mesh.faces(f, 0))) + b1 * Vec3d(mesh.normals.row(mesh.faces(f, 1))) +
            b2 * Vec3d(mesh.normals.row(mesh.faces(f, 2)));
      } else {
        const Vec3d a = mesh.positions.row(mesh.faces(f, 0));
        n = (Vec3d(mesh.positions.row(mesh.faces(f, 1))) - a).cross(Vec3d(mesh.positions.row(mesh.faces(f, 2))) - a);
      }
      const double len = n.norm();
      if (len > 0.0) gb.ref_normal.row(static_cast<Eigen::Index>(y) * k.width + x) = (n / len).cast<float>().transpose();
    }
  }
  gb.grad_mag = observed_depth.size() > 0 ? depth_gradient_magnitude(observed_depth)
                                          : FloatGrid::Constant(k.height, k.width, 0.0f);
  return gb;
}

bool vertex_visible(const Vec3d& vertex, const FrameGBuffer& gbuffer, const Intrinsics& k, const Pose& camera_to_world,
                    double epsilon) {
  const auto proj = project(k, camera_to_world, vertex);
  if (!proj) return false;
  const Eigen::Vector2i px = nearest_pixel(proj->pixel);
  if (px.x() < 0 || px.y() < 0 || px.x() >= gbuffer.width() || px.y() >= gbuffer.height()) return false;
  const float ref = gbuffer.ref_depth(px.y(), px.x());
  if (!std::isfinite(ref)) return false;
  return std::abs(proj->depth - static_cast<double>(ref)) <= epsilon;
}

}  // namespace parkingtwin
