#pragma once

#include <cstdint>
#include <vector>

#include "parkingtwin/camera.hpp"
#include "parkingtwin/config.hpp"
#include "parkingtwin/mesh.hpp"
#include "parkingtwin/raster.hpp"
#include "parkingtwin/types.hpp"

namespace parkingtwin {

enum class ColorSpace { Lab, Rgb };

struct FusionParams {
  double theta_knee = 30.0;  // deg
  double theta_max = 75.0;   // deg
  double d0 = 5.0;           // m
  double alpha_q = 1.5;
  double g_knee = 0.5;  // m/px
  double g_falloff = 2.0;
  double gamma_l = 0.5;
  double v_ref = 500.0;  // Laplacian variance giving full sharpness credit
  double eps_vis = 0.05;
  bool gradient_weight = true;
  ColorSpace space = ColorSpace::Lab;
  Vec3d fallback_lab = Vec3d(50.0, 0.0, 0.0);

  void validate() const;
  // Reads `fusion.*` keys.
  static FusionParams from_config(const Config& cfg, FusionParams base);
};

double angle_weight(double theta_deg, const FusionParams& p = {});
double distance_weight(double d, const FusionParams& p = {});
double quality_weight(double q, const FusionParams& p = {});
double gradient_weight(double g, const FusionParams& p = {});
double combined_weight(double theta_deg, double d, double q, double g, const FusionParams& p = {});

// Per-frame sharpness/contrast score in [0,1].
double quality_score(const RgbImage& image, double v_ref = 500.0);
GrayImage to_gray(const RgbImage& image);

// Bilinear RGB sample at a continuous pixel; coordinates are clamped to the image.
Vec3d sample_bilinear(const RgbImage& image, const Vec2d& u);

// Streaming per-vertex sums. Channel 0 (L* or R) is weighted by w^gamma,
// channels 1 and 2 by w. RGB space always uses gamma = 1.
class VertexAccumulator {
 public:
  VertexAccumulator() = default;
  explicit VertexAccumulator(Eigen::Index vertex_count);

  Eigen::Index size() const { return static_cast<Eigen::Index>(count_.size()); }
  void reset();

  // Adds one accepted observation. `c` is in the fusion color space.
  void add(Eigen::Index v, const Vec3d& c, double w, double gamma);
  // Fieldwise sum; throws Error(Structural) on size mismatch.
  void merge(const VertexAccumulator& other);

  std::uint32_t count(Eigen::Index v) const { return count_[v]; }
  double weight_sum(Eigen::Index v) const { return s_w_[v]; }
  double flat_weight_sum(Eigen::Index v) const { return s_wg_[v]; }
  Vec3d sums(Eigen::Index v) const { return Vec3d(s0_[v], s1_[v], s2_[v]); }

  // Fused color in the accumulation space, or nothing when unobserved.
  bool fused(Eigen::Index v, Vec3d& out) const;

  std::size_t memory_bytes() const;
  bool operator==(const VertexAccumulator& o) const = default;

 private:
  std::vector<double> s0_, s1_, s2_, s_w_, s_wg_;
  std::vector<std::uint32_t> count_;
};

inline constexpr double kMinWeightSum = 1e-12;

struct FrameView {
  const RgbImage* rgb = nullptr;
  const FrameGBuffer* gbuffer = nullptr;
  const BoolGrid* mask = nullptr;  // occlusion mask, may be null
  Intrinsics k;
  Pose pose = Pose::Identity();
  double quality = 1.0;
};

enum class ObserveResult { Accepted, NotVisible, Masked, ZeroWeight };

// One vertex against one frame: visibility, mask exclusion, weighting, sample.
ObserveResult observe_vertex(VertexAccumulator& acc, const TriangleMesh& mesh, Eigen::Index v, const FrameView& frame,
                             const FusionParams& p);

struct ObserveStats {
  std::size_t accepted = 0;
  std::size_t masked = 0;
  std::size_t zero_weight = 0;
};

// `seen` (optional, one byte per vertex) is set for every vertex that passed
// the visibility test, accepted or not.
ObserveStats observe_frame(VertexAccumulator& acc, const TriangleMesh& mesh, const FrameView& frame,
                           const FusionParams& p, std::vector<std::uint8_t>* seen = nullptr);

// Writes lab/rgb/observed on the mesh.
void finalize_colors(const VertexAccumulator& acc, TriangleMesh& mesh, const FusionParams& p);

}  // namespace parkingtwin
