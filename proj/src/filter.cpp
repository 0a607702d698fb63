#include "parkingtwin/filter.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "parkingtwin/error.hpp"

namespace parkingtwin {

void ConstraintThresholds::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Parameter, "filter: " + m); };
  if (!(theta_g > 0.0 && theta_g < 90.0)) fail("theta_g must be in (0, 90)");
  if (!(h_min < h_max)) fail("h_min must be below h_max");
  if (!(tau_edge > 0.0)) fail("tau_edge must be positive");
  if (!(tau_depth > 0.0)) fail("tau_depth must be positive");
  if (!std::isfinite(z_g)) fail("z_g must be finite");
}

void FilterParams::validate() const {
  thresholds.validate();
  if (normal_window < 3 || normal_window % 2 == 0) {
    throw Error(ErrorKind::Parameter, "filter: normal_window must be odd and >= 3");
  }
}

FilterParams FilterParams::from_config(const Config& cfg, FilterParams p) {
  auto& t = p.thresholds;
  t.theta_g = cfg.get_double("filter.theta_g", t.theta_g);
  t.h_min = cfg.get_double("filter.h_min", t.h_min);
  t.h_max = cfg.get_double("filter.h_max", t.h_max);
  t.tau_edge = cfg.get_double("filter.tau_edge", t.tau_edge);
  t.tau_depth = cfg.get_double("filter.tau_depth", t.tau_depth);
  t.z_g = cfg.get_double("filter.z_g", t.z_g);
  const std::string ns = cfg.get_string("filter.normal_source", p.normal_source == NormalSource::Observed ? "observed" : "mesh");
  if (ns == "observed") {
    p.normal_source = NormalSource::Observed;
  } else if (ns == "mesh") {
    p.normal_source = NormalSource::Mesh;
  } else {
    throw Error(ErrorKind::Config, "filter.normal_source must be observed or mesh, got '" + ns + "'");
  }
  const std::string mode = cfg.get_string("filter.mode", p.mode == FuseMode::Region ? "region" : "pixel");
  if (mode == "region") {
    p.mode = FuseMode::Region;
  } else if (mode == "pixel") {
    p.mode = FuseMode::Pixel;
  } else {
    throw Error(ErrorKind::Config, "filter.mode must be region or pixel, got '" + mode + "'");
  }
  p.closing = cfg.get_bool("filter.closing", p.closing);
  p.normal_window = cfg.get_int("filter.normal_window", p.normal_window);
  return p;
}

BoolGrid normal_field(const RowVectors3<float>& normals, int width, int height, double theta_g_deg) {
  if (normals.rows() != static_cast<Eigen::Index>(width) * height) {
    throw Error(ErrorKind::Structural, "normal_field: normal buffer does not match image size");
  }
  const double c = std::cos(theta_g_deg * std::numbers::pi / 180.0);
  BoolGrid out(height, width);
  for (Eigen::Index i = 0; i < normals.rows(); ++i) {
    const float nz = normals(i, 2);
    out.data()[i] = std::isfinite(nz) && double(nz) > c;  // NaN compares false
  }
  return out;
}

BoolGrid height_field(const DepthMap& depth, const Intrinsics& k, const Pose& pose, double z_g, double h_min,
                      double h_max) {
  BoolGrid out = BoolGrid::Constant(depth.rows(), depth.cols(), false);
  const Eigen::Matrix3d& r = pose.linear();
  const double tz = pose.translation().z();
  for (Eigen::Index y = 0; y < depth.rows(); ++y) {
    for (Eigen::Index x = 0; x < depth.cols(); ++x) {
      const float d = depth(y, x);
      if (!depth_valid(d)) continue;
      const double xc = (double(x) - k.cx) * d / k.fx;
      const double yc = (double(y) - k.cy) * d / k.fy;
      const double h = r(2, 0) * xc + r(2, 1) * yc + r(2, 2) * d + tz - z_g;
      out(y, x) = h >= h_min && h <= h_max;
    }
  }
  return out;
}

BoolGrid edge_field(const FloatGrid& grad_mag, double tau_edge) { return grad_mag > static_cast<float>(tau_edge); }

BoolGrid depth_consistency_field(const DepthMap& ref_depth, const DepthMap& observed, double tau_depth) {
  if (ref_depth.rows() != observed.rows() || ref_depth.cols() != observed.cols()) {
    throw Error(ErrorKind::Structural, "depth_consistency_field: size mismatch");
  }
  BoolGrid out(observed.rows(), observed.cols());
  for (Eigen::Index i = 0; i < observed.size(); ++i) {
    const float dm = ref_depth.data()[i];
    const float d = observed.data()[i];
    out.data()[i] = std::isfinite(dm) && depth_valid(d) && double(dm) - double(d) > tau_depth;
  }
  return out;
}

BoolGrid close3x3(const BoolGrid& g) {
  const Eigen::Index H = g.rows(), W = g.cols();
  auto pass = [&](const BoolGrid& in, bool dilate) {
    BoolGrid out(H, W);
    for (Eigen::Index y = 0; y < H; ++y) {
      for (Eigen::Index x = 0; x < W; ++x) {
        bool v = !dilate;
        for (Eigen::Index dy = -1; dy <= 1; ++dy) {
          for (Eigen::Index dx = -1; dx <= 1; ++dx) {
            const Eigen::Index yy = y + dy, xx = x + dx;
            if (yy < 0 || xx < 0 || yy >= H || xx >= W) continue;
            v = dilate ? (v || in(yy, xx)) : (v && in(yy, xx));
          }
        }
        out(y, x) = v;
      }
    }
    return out;
  };
  return pass(pass(g, true), false);
}

OcclusionMask fuse_masks(const BoolGrid& normal, const BoolGrid& height, const BoolGrid& edge, const BoolGrid& depth,
                         bool closing) {
  for (const BoolGrid* g : {&height, &edge, &depth}) {
    if (g->rows() != normal.rows() || g->cols() != normal.cols()) {
      throw Error(ErrorKind::Structural, "fuse_masks: constraint grids differ in size");
    }
  }
  OcclusionMask m;
  m.mask = normal && height && edge && depth;
  if (closing) m.mask = close3x3(m.mask);
  m.normal = normal;
  m.height = height;
  m.edge = edge;
  m.depth = depth;
  return m;
}

RowVectors3<float> observed_normals(const DepthMap& depth, const Intrinsics& k, const Pose& pose, int window,
                                    const BoolGrid* roi) {
  const int H = static_cast<int>(depth.rows()), W = static_cast<int>(depth.cols());
  const int r = window / 2;
  RowVectors3<float> out =
      RowVectors3<float>::Constant(static_cast<Eigen::Index>(H) * W, 3, std::numeric_limits<float>::quiet_NaN());
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (roi && !(*roi)(y, x)) continue;
      if (!depth_valid(depth(y, x))) continue;
      Vec3d sum = Vec3d::Zero();
      Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
      int n = 0;
      for (int yy = std::max(0, y - r); yy <= std::min(H - 1, y + r); ++yy) {
        for (int xx = std::max(0, x - r); xx <= std::min(W - 1, x + r); ++xx) {
          const float d = depth(yy, xx);
          if (!depth_valid(d)) continue;
          const Vec3d p((xx - k.cx) * d / k.fx, (yy - k.cy) * d / k.fy, d);
          sum += p;
          outer += p * p.transpose();
          ++n;
        }
      }
      if (n < 3) continue;
      const Vec3d mean = sum / n;
      const Eigen::Matrix3d cov = outer / n - mean * mean.transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
      Vec3d nc = es.eigenvectors().col(0);
      // Camera sits at the origin of this frame.
      if (nc.dot(-mean) < 0.0) nc = -nc;
      const Vec3d nw = pose.linear() * nc;
      out.row(static_cast<Eigen::Index>(y) * W + x) = nw.normalized().cast<float>().transpose();
    }
  }
  return out;
}

IndexGrid label_components(const BoolGrid& grid, int& count) {
  const Eigen::Index H = grid.rows(), W = grid.cols();
  IndexGrid labels = IndexGrid::Zero(H, W);
  count = 0;
  std::vector<Eigen::Index> stack;
  for (Eigen::Index y = 0; y < H; ++y) {
    for (Eigen::Index x = 0; x < W; ++x) {
      if (!grid(y, x) || labels(y, x) != 0) continue;
      const std::int32_t id = ++count;
      labels(y, x) = id;
      stack.push_back(y * W + x);
      while (!stack.empty()) {
        const Eigen::Index i = stack.back();
        stack.pop_back();
        const Eigen::Index cy = i / W, cx = i % W;
        for (Eigen::Index dy = -1; dy <= 1; ++dy) {
          for (Eigen::Index dx = -1; dx <= 1; ++dx) {
            const Eigen::Index yy = cy + dy, xx = cx + dx;
            if (yy < 0 || xx < 0 || yy >= H || xx >= W) continue;
            if (!grid(yy, xx) || labels(yy, xx) != 0) continue;
            labels(yy, xx) = id;
            stack.push_back(yy * W + xx);
          }
        }
      }
    }
  }
  return labels;
}

BoolGrid lift_to_regions(const BoolGrid& field, const IndexGrid& labels, int count) {
  std::vector<char> hit(static_cast<std::size_t>(count) + 1, 0);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const std::int32_t l = labels.data()[i];
    if (l > 0 && field.data()[i]) hit[l] = 1;
  }
  BoolGrid out(labels.rows(), labels.cols());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const std::int32_t l = labels.data()[i];
    out.data()[i] = l > 0 && hit[l];
  }
  return out;
}

OcclusionMask compute_occlusion_mask(const FrameGBuffer& gb, const DepthMap& observed, const Intrinsics& k,
                                     const Pose& pose, const FilterParams& p) {
  const auto& t = p.thresholds;
  const BoolGrid depth = depth_consistency_field(gb.ref_depth, observed, t.tau_depth);
  const BoolGrid height = height_field(observed, k, pose, t.z_g, t.h_min, t.h_max);
  const BoolGrid edge = edge_field(gb.grad_mag, t.tau_edge);
  BoolGrid normal;
  if (p.normal_source == NormalSource::Mesh) {
    normal = normal_field(gb.ref_normal, gb.width(), gb.height(), t.theta_g);
  } else {
    const RowVectors3<float> n =
        observed_normals(observed, k, pose, p.normal_window, p.full_diagnostics ? nullptr : &depth);
    normal = normal_field(n, gb.width(), gb.height(), t.theta_g);
  }

  if (p.mode == FuseMode::Pixel) return fuse_masks(normal, height, edge, depth, p.closing);

  int count = 0;
  const IndexGrid labels = label_components(depth, count);
  return fuse_masks(lift_to_regions(normal, labels, count), lift_to_regions(height, labels, count),
                    lift_to_regions(edge, labels, count), depth, p.closing);
}

}  // namespace parkingtwin
