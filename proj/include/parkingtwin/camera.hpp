#pragma once

#include <optional>
#include <string>
#include <vector>

#include "parkingtwin/types.hpp"

namespace parkingtwin {

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  double depth_scale = 0.001;  // meters per stored depth unit

  // Throws Error(Parameter) when the invariants do not hold.
  void validate() const;

  // Pinhole camera with the given horizontal field of view, principal point
  // at the image center.
  static Intrinsics from_fov(int width, int height, double hfov_deg);
};

Intrinsics parse_intrinsics(const std::string& text);
Intrinsics read_intrinsics(const std::string& path);
std::string format_intrinsics(const Intrinsics& k);

struct TrajectoryEntry {
  int index = 0;
  Pose pose = Pose::Identity();
};

// `index tx ty tz qx qy qz qw` per line, camera-to-world.
std::vector<TrajectoryEntry> parse_trajectory(const std::string& text);
std::vector<TrajectoryEntry> read_trajectory(const std::string& path);
std::string format_trajectory(const std::vector<TrajectoryEntry>& entries);

Pose make_pose(const Vec3d& translation, const Eigen::Quaterniond& rotation);
// Camera looking from `eye` toward `target`; image y points along -up.
Pose look_at(const Vec3d& eye, const Vec3d& target, const Vec3d& up = Vec3d::UnitZ());

// Throws Error(Parameter) unless the rotation is orthonormal within 1e-6.
void validate_pose(const Pose& pose);

struct PixelProjection {
  Vec2d pixel;   // continuous (u, v); pixel centers at integer coordinates
  double depth;  // camera-frame z
};

// None when the point is behind the camera or lands outside the image.
std::optional<PixelProjection> project(const Intrinsics& k, const Pose& camera_to_world, const Vec3d& world);

// Throws Error(Domain) for depth <= 0.
Vec3d back_project(const Intrinsics& k, const Pose& camera_to_world, const Vec2d& pixel, double depth);

inline bool pixel_in_frame(const Intrinsics& k, const Vec2d& pixel) {
  return pixel.x() >= -0.5 && pixel.y() >= -0.5 && pixel.x() < k.width - 0.5 && pixel.y() < k.height - 0.5;
}

}  // namespace parkingtwin
