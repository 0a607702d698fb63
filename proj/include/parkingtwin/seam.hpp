#pragma once

#include <cstdint>
#include <vector>

#include "parkingtwin/config.hpp"
#include "parkingtwin/mesh.hpp"
#include "parkingtwin/types.hpp"

namespace parkingtwin {

struct SeamParams {
  double tau_seam = 100.0;  // squared RGB units
  double sigma_s = 0.1;     // m
  double sigma_c = 15.0;    // RGB units
  int iterations = 1;
  double z_floor = 1e-9;
  bool enabled = true;

  void validate() const;
  // Reads `seam.*` keys.
  static SeamParams from_config(const Config& cfg, SeamParams base);
};

struct FaceColors {
  RowVectors3<double> rgb;          // mean of the three vertex colors
  std::vector<std::uint8_t> valid;  // 0 when a vertex of the face is unobserved
};

FaceColors face_colors(const TriangleMesh& mesh);

// Mean squared deviation of incident valid face colors from their mean;
// vertices with fewer than two valid faces get 0.
Eigen::VectorXd vertex_color_variance(const TriangleMesh& mesh, const FaceColors& faces);

std::vector<std::int32_t> detect_seams(const Eigen::VectorXd& variance, double tau_seam);

// One Jacobi pass over `seams`; every update reads the snapshot colors.
// Returns the new RGB buffer as doubles in [0,255].
RowVectors3<double> bilateral_pass(const TriangleMesh& mesh, const RowVectors3<double>& colors,
                                   const std::vector<std::uint8_t>& observed, const std::vector<std::int32_t>& seams,
                                   const SeamParams& params);

struct SeamReport {
  std::size_t seams_before = 0;
  std::size_t seams_after = 0;
  int passes = 0;
};

// Detect + smooth `iterations` times, writes mesh.rgb. LAB copies are left as is.
SeamReport refine_seams(TriangleMesh& mesh, const SeamParams& params);

}  // namespace parkingtwin
