#pragma once

#include <vector>

#include "parkingtwin/camera.hpp"
#include "parkingtwin/mesh.hpp"
#include "parkingtwin/raster.hpp"
#include "parkingtwin/types.hpp"

namespace parkingtwin {

inline constexpr double kPsnrCap = 99.0;

// 8-bit PSNR over all channels; identical images give kPsnrCap. `valid`
// restricts the comparison to a pixel subset.
double psnr(const RgbImage& a, const RgbImage& b, const BoolGrid* valid = nullptr);

// Gaussian-window SSIM (11x11, sigma 1.5) on single-channel images in [0,255].
// With `valid`, the SSIM map is averaged over windows centered on valid pixels.
double ssim(const DoubleGrid& a, const DoubleGrid& b, const BoolGrid* valid = nullptr);
// Channel-averaged grayscale SSIM.
double ssim(const RgbImage& a, const RgbImage& b, const BoolGrid* valid = nullptr);

DoubleGrid channel_mean(const RgbImage& image);

// Gouraud-shaded render of per-vertex colors; `mask` (optional) receives the
// covered pixels.
RgbImage render_vertex_colors(const TriangleMesh& mesh, const ColorsU8& colors, const Intrinsics& k, const Pose& pose,
                              const Eigen::Matrix<std::uint8_t, 3, 1>& background = Eigen::Matrix<std::uint8_t, 3, 1>::Zero(), BoolGrid* mask = nullptr);

struct ViewEvaluation {
  std::vector<double> ssim;
  std::vector<double> psnr;
  double ssim_mean = 0.0;
  double psnr_mean = 0.0;
};

// Renders `predicted` and `reference` vertex colors on the same mesh from
// each pose and compares them over mesh-covered pixels. Poses that see no
// geometry are skipped.
ViewEvaluation evaluate_views(const TriangleMesh& mesh, const ColorsU8& predicted, const ColorsU8& reference,
                              const Intrinsics& k, const std::vector<Pose>& poses);

}  // namespace parkingtwin
