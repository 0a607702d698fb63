#include "parkingtwin/metrics.hpp"

#include <cmath>

#include "parkingtwin/color.hpp"
#include "parkingtwin/error.hpp"

namespace parkingtwin {

namespace {

void require_same(int wa, int ha, int wb, int hb, const char* what) {
  if (wa != wb || ha != hb) throw Error(ErrorKind::Structural, std::string(what) + ": image dimensions differ");
}

// Separable Gaussian filter, 'valid' region only (no padding).
DoubleGrid blur_valid(const DoubleGrid& in, const Eigen::VectorXd& g) {
  const Eigen::Index r = g.size() / 2;
  const Eigen::Index H = in.rows(), W = in.cols();
  DoubleGrid tmp = DoubleGrid::Zero(H, W - 2 * r);
  for (Eigen::Index y = 0; y < H; ++y) {
    for (Eigen::Index x = 0; x < W - 2 * r; ++x) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < g.size(); ++i) s += g[i] * in(y, x + i);
      tmp(y, x) = s;
    }
  }
  DoubleGrid out = DoubleGrid::Zero(H - 2 * r, W - 2 * r);
  for (Eigen::Index y = 0; y < H - 2 * r; ++y) {
    for (Eigen::Index x = 0; x < W - 2 * r; ++x) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < g.size(); ++i) s += g[i] * tmp(y + i, x);
      out(y, x) = s;
    }
  }
  return out;
}

}  // namespace

double psnr(const RgbImage& a, const RgbImage& b, const BoolGrid* valid) {
  require_same(a.width, a.height, b.width, b.height, "psnr");
  if (a.empty()) throw Error(ErrorKind::Structural, "psnr: empty image");
  double mse = 0.0;
  if (valid) {
    require_same(a.width, a.height, static_cast<int>(valid->cols()), static_cast<int>(valid->rows()), "psnr mask");
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < a.height; ++y) {
      for (int x = 0; x < a.width; ++x) {
        if (!(*valid)(y, x)) continue;
        sum += (a.pixel(x, y).cast<double>() - b.pixel(x, y).cast<double>()).squaredNorm();
        n += 3;
      }
    }
    if (n == 0) throw Error(ErrorKind::Structural, "psnr: empty mask");
    mse = sum / static_cast<double>(n);
  } else {
    mse = (a.pixels.cast<double>() - b.pixels.cast<double>()).array().square().mean();
  }
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

DoubleGrid channel_mean(const RgbImage& image) {
  DoubleGrid g(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) g(y, x) = image.pixel(x, y).cast<double>().sum() / 3.0;
  }
  return g;
}

double ssim(const DoubleGrid& a, const DoubleGrid& b, const BoolGrid* valid) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::Structural, "ssim: image dimensions differ");
  if (valid && (valid->rows() != a.rows() || valid->cols() != a.cols())) {
    throw Error(ErrorKind::Structural, "ssim: mask dimensions differ");
  }
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  if (a.rows() < kWin || a.cols() < kWin) throw Error(ErrorKind::Parameter, "ssim: image smaller than the 11x11 window");
  Eigen::VectorXd g(kWin);
  for (int i = 0; i < kWin; ++i) {
    const double d = i - kWin / 2;
    g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
  }
  g /= g.sum();
  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const DoubleGrid mu_a = blur_valid(a, g), mu_b = blur_valid(b, g);
  const DoubleGrid s_aa = blur_valid(a * a, g) - mu_a * mu_a;
  const DoubleGrid s_bb = blur_valid(b * b, g) - mu_b * mu_b;
  const DoubleGrid s_ab = blur_valid(a * b, g) - mu_a * mu_b;
  const DoubleGrid map = ((2.0 * mu_a * mu_b + c1) * (2.0 * s_ab + c2)) /
                         ((mu_a * mu_a + mu_b * mu_b + c1) * (s_aa + s_bb + c2));
  if (!valid) return map.mean();
  // Window centers sit at an offset of kWin / 2 in the input.
  double sum = 0.0;
  std::size_t n = 0;
  for (Eigen::Index y = 0; y < map.rows(); ++y) {
    for (Eigen::Index x = 0; x < map.cols(); ++x) {
      if (!(*valid)(y + kWin / 2, x + kWin / 2)) continue;
      sum += map(y, x);
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorKind::Structural, "ssim: empty mask");
  return sum / static_cast<double>(n);
}

double ssim(const RgbImage& a, const RgbImage& b, const BoolGrid* valid) {
  require_same(a.width, a.height, b.width, b.height, "ssim");
  return ssim(channel_mean(a), channel_mean(b), valid);
}

RgbImage render_vertex_colors(const TriangleMesh& mesh, const ColorsU8& colors, const Intrinsics& k, const Pose& pose,
                              const Eigen::Matrix<std::uint8_t, 3, 1>& background, BoolGrid* mask) {
  if (colors.rows() != mesh.vertex_count()) throw Error(ErrorKind::Structural, "render: color count mismatch");
  const RasterBuffers rb = rasterize(mesh.positions, mesh.faces, k, pose);
  RgbImage img(k.width, k.height);
  if (mask) *mask = BoolGrid::Constant(k.height, k.width, false);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const std::int32_t f = rb.face(y, x);
      if (f == kNoFace) {
        img.pixel(x, y) = background.transpose();
        continue;
      }
      const double b1 = rb.bary1(y, x), b2 = rb.bary2(y, x);
      const Vec3d c = (1.0 - b1 - b2) * colors.row(mesh.faces(f, 0)).cast<double>().transpose() +
                      b1 * colors.row(mesh.faces(f, 1)).cast<double>().transpose() +
                      b2 * colors.row(mesh.faces(f, 2)).cast<double>().transpose();
      img.pixel(x, y) = Rgb8(to_u8(c.x()), to_u8(c.y()), to_u8(c.z())).transpose();
      if (mask) (*mask)(y, x) = true;
    }
  }
  return img;
}

ViewEvaluation evaluate_views(const TriangleMesh& mesh, const ColorsU8& predicted, const ColorsU8& reference,
                              const Intrinsics& k, const std::vector<Pose>& poses) {
  ViewEvaluation ev;
  for (const Pose& pose : poses) {
    BoolGrid covered;
    const RgbImage a = render_vertex_colors(mesh, predicted, k, pose);
    const RgbImage b = render_vertex_colors(mesh, reference, k, pose, Rgb8::Zero(), &covered);
    if (covered.count() == 0) continue;
    ev.ssim.push_back(ssim(a, b, &covered));
    ev.psnr.push_back(psnr(a, b, &covered));
  }
  if (!ev.ssim.empty()) {
    for (std::size_t i = 0; i < ev.ssim.size(); ++i) {
      ev.ssim_mean += ev.ssim[i];
      ev.psnr_mean += ev.psnr[i];
    }
    ev.ssim_mean /= static_cast<double>(ev.ssim.size());
    ev.psnr_mean /= static_cast<double>(ev.ssim.size());
  }
  return ev;
}

}  // namespace parkingtwin
