#pragma once

#include "parkingtwin/camera.hpp"
#include "parkingtwin/config.hpp"
#include "parkingtwin/raster.hpp"
#include "parkingtwin/types.hpp"

namespace parkingtwin {

struct ConstraintThresholds {
  double theta_g = 20.0;  // deg
  double h_min = 0.5;     // m above ground
  double h_max = 2.5;
  double tau_edge = 1.0;   // m/px
  double tau_depth = 0.3;  // m
  double z_g = 0.0;

  void validate() const;
};

enum class NormalSource { Observed, Mesh };

// Pixel: the four grids are ANDed as computed. Region: candidate regions are
// 8-connected components of the depth-consistency field; each other field is
// lifted to a region (true on the whole region when any of its pixels
// satisfies it) before the AND.
enum class FuseMode { Pixel, Region };

struct FilterParams {
  ConstraintThresholds thresholds;
  NormalSource normal_source = NormalSource::Observed;
  FuseMode mode = FuseMode::Region;
  bool closing = false;
  int normal_window = 5;
  // Evaluate observed normals on every pixel rather than only where the
  // depth field fires; only matters for debug output.
  bool full_diagnostics = false;

  void validate() const;
  // Reads `filter.*` keys.
  static FilterParams from_config(const Config& cfg, FilterParams base);
};

struct OcclusionMask {
  int frame = -1;
  BoolGrid mask;
  // Grids actually ANDed into `mask` (region-lifted in region mode).
  BoolGrid normal, height, edge, depth;

  double rate() const { return mask.size() ? double(mask.count()) / double(mask.size()) : 0.0; }
};

// `normals` holds one row per pixel (row-major image order), NaN = undefined.
BoolGrid normal_field(const RowVectors3<float>& normals, int width, int height, double theta_g_deg);
BoolGrid height_field(const DepthMap& depth, const Intrinsics& k, const Pose& pose, double z_g, double h_min,
                      double h_max);
BoolGrid edge_field(const FloatGrid& grad_mag, double tau_edge);
BoolGrid depth_consistency_field(const DepthMap& ref_depth, const DepthMap& observed, double tau_depth);

// Plain AND; throws Error(Structural) on size mismatch.
OcclusionMask fuse_masks(const BoolGrid& normal, const BoolGrid& height, const BoolGrid& edge, const BoolGrid& depth,
                         bool closing = false);

// World-frame normals from a least-squares plane through the back-projected
// window around each pixel, oriented toward the camera. Pixels outside `roi`
// (when given) or with fewer than 3 valid samples stay NaN.
RowVectors3<float> observed_normals(const DepthMap& depth, const Intrinsics& k, const Pose& pose, int window,
                                    const BoolGrid* roi = nullptr);

// 8-connected labels (0 = background, components numbered from 1).
IndexGrid label_components(const BoolGrid& grid, int& count);

// True on every pixel of a component that contains at least one true pixel of `field`.
BoolGrid lift_to_regions(const BoolGrid& field, const IndexGrid& labels, int count);

BoolGrid close3x3(const BoolGrid& grid);

OcclusionMask compute_occlusion_mask(const FrameGBuffer& gbuffer, const DepthMap& observed, const Intrinsics& k,
                                     const Pose& pose, const FilterParams& params);

}  // namespace parkingtwin
