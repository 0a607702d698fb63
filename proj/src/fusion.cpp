#include "parkingtwin/fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "parkingtwin/color.hpp"
#include "parkingtwin/error.hpp"

namespace parkingtwin {

void FusionParams::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Parameter, "fusion: " + m); };
  if (!(theta_knee > 0.0 && theta_knee < theta_max && theta_max < 90.0)) fail("need 0 < theta_knee < theta_max < 90");
  if (!(d0 > 0.0)) fail("d0 must be positive");
  if (!(alpha_q > 0.0)) fail("alpha_q must be positive");
  if (!(g_knee >= 0.0) || !(g_falloff > 0.0)) fail("gradient knee/falloff out of range");
  if (!(gamma_l > 0.0 && gamma_l <= 1.0)) fail("gamma_l must be in (0, 1]");
  if (!(v_ref > 0.0)) fail("v_ref must be positive");
  if (!(eps_vis > 0.0)) fail("eps_vis must be positive");
}

FusionParams FusionParams::from_config(const Config& cfg, FusionParams p) {
  p.theta_knee = cfg.get_double("fusion.theta_knee", p.theta_knee);
  p.theta_max = cfg.get_double("fusion.theta_max", p.theta_max);
  p.d0 = cfg.get_double("fusion.d0", p.d0);
  p.alpha_q = cfg.get_double("fusion.alpha_q", p.alpha_q);
  p.g_knee = cfg.get_double("fusion.g_knee", p.g_knee);
  p.g_falloff = cfg.get_double("fusion.g_falloff", p.g_falloff);
  p.gamma_l = cfg.get_double("fusion.gamma_l", p.gamma_l);
  p.v_ref = cfg.get_double("fusion.v_ref", p.v_ref);
  p.eps_vis = cfg.get_double("fusion.eps_vis", p.eps_vis);
  p.gradient_weight = cfg.get_bool("fusion.gradient_weight", p.gradient_weight);
  const std::string space = cfg.get_string("fusion.space", p.space == ColorSpace::Lab ? "lab" : "rgb");
  if (space == "lab") {
    p.space = ColorSpace::Lab;
  } else if (space == "rgb") {
    p.space = ColorSpace::Rgb;
  } else {
    throw Error(ErrorKind::Config, "fusion.space must be lab or rgb, got '" + space + "'");
  }
  const auto fb = cfg.get_doubles("fusion.fallback_lab", {p.fallback_lab.x(), p.fallback_lab.y(), p.fallback_lab.z()});
  if (fb.size() != 3) throw Error(ErrorKind::Config, "fusion.fallback_lab needs 3 values");
  p.fallback_lab = Vec3d(fb[0], fb[1], fb[2]);
  return p;
}

double angle_weight(double theta_deg, const FusionParams& p) {
  if (theta_deg <= p.theta_knee) return 1.0;
  if (theta_deg >= p.theta_max) return 0.0;
  const double t = (theta_deg - p.theta_knee) / (p.theta_max - p.theta_knee);
  return 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

double distance_weight(double d, const FusionParams& p) {
  const double r = d / p.d0;
  return 1.0 / (1.0 + r * r);
}

double quality_weight(double q, const FusionParams& p) { return std::pow(std::clamp(q, 0.0, 1.0), p.alpha_q); }

double gradient_weight(double g, const FusionParams& p) {
  if (std::isnan(g) || std::isinf(g)) return 0.0;
  if (g < p.g_knee) return 1.0;
  const double e = g - p.g_knee;
  return std::exp(-p.g_falloff * e * e);
}

double combined_weight(double theta_deg, double d, double q, double g, const FusionParams& p) {
  return angle_weight(theta_deg, p) * distance_weight(d, p) * quality_weight(q, p) * gradient_weight(g, p);
}

GrayImage to_gray(const RgbImage& image) {
  GrayImage g(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const auto p = image.pixel(x, y);
      g(y, x) = to_u8(0.299 * p(0) + 0.587 * p(1) + 0.114 * p(2));
    }
  }
  return g;
}

double quality_score(const RgbImage& image, double v_ref) {
  if (image.empty()) throw Error(ErrorKind::Parameter, "quality_score: empty image");
  const GrayImage g = to_gray(image);
  const int H = image.height, W = image.width;

  double sharp = 0.0;
  if (H >= 3 && W >= 3) {
    double sum = 0.0, sum2 = 0.0;
    for (int y = 1; y + 1 < H; ++y) {
      for (int x = 1; x + 1 < W; ++x) {
        const double l = double(g(y - 1, x)) + g(y + 1, x) + g(y, x - 1) + g(y, x + 1) - 4.0 * g(y, x);
        sum += l;
        sum2 += l * l;
      }
    }
    const double n = double(H - 2) * (W - 2);
    const double mean = sum / n;
    sharp = std::clamp((sum2 / n - mean * mean) / v_ref, 0.0, 1.0);
  }

  std::array<std::size_t, 256> hist{};
  for (Eigen::Index i = 0; i < g.size(); ++i) ++hist[g.data()[i]];
  const auto n = static_cast<double>(g.size());
  auto percentile = [&](double frac) {
    const double target = frac * n;
    double cum = 0.0;
    for (int b = 0; b < 256; ++b) {
      cum += static_cast<double>(hist[b]);
      if (cum >= target) return b;
    }
    return 255;
  };
  const double spread = (percentile(0.99) - percentile(0.01)) / 255.0;
  return std::clamp(sharp * spread, 0.0, 1.0);
}

Vec3d sample_bilinear(const RgbImage& image, const Vec2d& u) {
  const double x = std::clamp(u.x(), 0.0, double(image.width - 1));
  const double y = std::clamp(u.y(), 0.0, double(image.height - 1));
  const int x0 = std::min(static_cast<int>(x), image.width - 1);
  const int y0 = std::min(static_cast<int>(y), image.height - 1);
  const int x1 = std::min(x0 + 1, image.width - 1);
  const int y1 = std::min(y0 + 1, image.height - 1);
  const double fx = x - x0, fy = y - y0;
  const Vec3d c00 = image.pixel(x0, y0).cast<double>().transpose();
  const Vec3d c10 = image.pixel(x1, y0).cast<double>().transpose();
  const Vec3d c01 = image.pixel(x0, y1).cast<double>().transpose();
  const Vec3d c11 = image.pixel(x1, y1).cast<double>().transpose();
  return (1 - fy) * ((1 - fx) * c00 + fx * c10) + fy * ((1 - fx) * c01 + fx * c11);
}

VertexAccumulator::VertexAccumulator(Eigen::Index n)
    : s0_(n, 0.0), s1_(n, 0.0), s2_(n, 0.0), s_w_(n, 0.0), s_wg_(n, 0.0), count_(n, 0) {}

void VertexAccumulator::reset() {
  for (auto* v : {&s0_, &s1_, &s2_, &s_w_, &s_wg_}) std::fill(v->begin(), v->end(), 0.0);
  std::fill(count_.begin(), count_.end(), 0u);
}

void VertexAccumulator::add(Eigen::Index v, const Vec3d& c, double w, double gamma) {
  const double wg = gamma == 1.0 ? w : std::pow(w, gamma);
  s0_[v] += wg * c.x();
  s1_[v] += w * c.y();
  s2_[v] += w * c.z();
  s_w_[v] += w;
  s_wg_[v] += wg;
  ++count_[v];
}

void VertexAccumulator::merge(const VertexAccumulator& o) {
  if (o.size() != size()) {
    throw Error(ErrorKind::Structural, "accumulator merge: vertex count " + std::to_string(size()) + " vs " +
                                           std::to_string(o.size()));
  }
  for (std::size_t i = 0; i < count_.size(); ++i) {
    s0_[i] += o.s0_[i];
    s1_[i] += o.s1_[i];
    s2_[i] += o.s2_[i];
    s_w_[i] += o.s_w_[i];
    s_wg_[i] += o.s_wg_[i];
    count_[i] += o.count_[i];
  }
}

bool VertexAccumulator::fused(Eigen::Index v, Vec3d& out) const {
  if (count_[v] == 0 || s_w_[v] <= kMinWeightSum || s_wg_[v] <= kMinWeightSum) return false;
  out = Vec3d(s0_[v] / s_wg_[v], s1_[v] / s_w_[v], s2_[v] / s_w_[v]);
  return true;
}

std::size_t VertexAccumulator::memory_bytes() const {
  return sizeof(*this) + (s0_.capacity() + s1_.capacity() + s2_.capacity() + s_w_.capacity() + s_wg_.capacity()) *
                             sizeof(double) +
         count_.capacity() * sizeof(std::uint32_t);
}

ObserveResult observe_vertex(VertexAccumulator& acc, const TriangleMesh& mesh, Eigen::Index v, const FrameView& f,
                             const FusionParams& p) {
  const Vec3d pos = mesh.positions.row(v);
  const auto proj = project(f.k, f.pose, pos);
  if (!proj) return ObserveResult::NotVisible;
  const Eigen::Vector2i px = nearest_pixel(proj->pixel);
  const FrameGBuffer& gb = *f.gbuffer;
  if (px.x() < 0 || px.y() < 0 || px.x() >= gb.width() || px.y() >= gb.height()) return ObserveResult::NotVisible;
  const float ref = gb.ref_depth(px.y(), px.x());
  if (!std::isfinite(ref) || std::abs(proj->depth - double(ref)) > p.eps_vis) return ObserveResult::NotVisible;
  if (f.mask && (*f.mask)(px.y(), px.x())) return ObserveResult::Masked;

  const Vec3d to_cam = f.pose.translation() - pos;
  const double d = to_cam.norm();
  double theta = 90.0;
  if (d > 0.0 && mesh.normals.rows() == mesh.vertex_count()) {
    const double c = std::clamp(Vec3d(mesh.normals.row(v)).dot(to_cam / d), -1.0, 1.0);
    theta = std::acos(c) * 180.0 / std::numbers::pi;
  }
  const double g = p.gradient_weight ? double(gb.grad_mag(px.y(), px.x())) : 0.0;
  const double w = combined_weight(theta, d, f.quality, g, p);
  if (!(w > 0.0)) return ObserveResult::ZeroWeight;

  const Vec3d rgb = sample_bilinear(*f.rgb, proj->pixel);
  if (p.space == ColorSpace::Lab) {
    acc.add(v, rgb_to_lab(rgb), w, p.gamma_l);
  } else {
    acc.add(v, rgb, w, 1.0);
  }
  return ObserveResult::Accepted;
}

ObserveStats observe_frame(VertexAccumulator& acc, const TriangleMesh& mesh, const FrameView& frame,
                           const FusionParams& p, std::vector<std::uint8_t>* seen) {
  if (acc.size() != mesh.vertex_count()) throw Error(ErrorKind::Structural, "accumulator/mesh vertex count mismatch");
  if (seen && seen->size() != static_cast<std::size_t>(mesh.vertex_count())) {
    throw Error(ErrorKind::Structural, "visibility buffer size mismatch");
  }
  ObserveStats s;
  for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v) {
    const ObserveResult r = observe_vertex(acc, mesh, v, frame, p);
    if (seen && r != ObserveResult::NotVisible) (*seen)[static_cast<std::size_t>(v)] = 1;
    switch (r) {
      case ObserveResult::Accepted: ++s.accepted; break;
      case ObserveResult::Masked: ++s.masked; break;
      case ObserveResult::ZeroWeight: ++s.zero_weight; break;
      case ObserveResult::NotVisible: break;
    }
  }
  return s;
}

void finalize_colors(const VertexAccumulator& acc, TriangleMesh& mesh, const FusionParams& p) {
  if (acc.size() != mesh.vertex_count()) throw Error(ErrorKind::Structural, "accumulator/mesh vertex count mismatch");
  const Eigen::Index n = mesh.vertex_count();
  mesh.lab.resize(n, 3);
  mesh.rgb.resize(n, 3);
  mesh.observed.assign(static_cast<std::size_t>(n), 0);
  const Rgb8 fallback_rgb = lab_to_rgb(p.fallback_lab);
  for (Eigen::Index v = 0; v < n; ++v) {
    Vec3d c;
    if (!acc.fused(v, c)) {
      mesh.lab.row(v) = p.fallback_lab.transpose();
      mesh.rgb.row(v) = fallback_rgb.transpose();
      continue;
    }
    mesh.observed[v] = 1;
    if (p.space == ColorSpace::Lab) {
      mesh.lab.row(v) = c.transpose();
      mesh.rgb.row(v) = lab_to_rgb(c).transpose();
    } else {
      const Rgb8 rgb(to_u8(c.x()), to_u8(c.y()), to_u8(c.z()));
      mesh.rgb.row(v) = rgb.transpose();
      mesh.lab.row(v) = rgb_to_lab(rgb).transpose();
    }
  }
}

}  // namespace parkingtwin
