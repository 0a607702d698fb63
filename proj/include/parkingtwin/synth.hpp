#pragma once

#include <climits>
#include <cstdint>
#include <string>
#include <vector>

#include "parkingtwin/camera.hpp"
#include "parkingtwin/color.hpp"
#include "parkingtwin/config.hpp"
#include "parkingtwin/geometry.hpp"
#include "parkingtwin/mesh.hpp"
#include "parkingtwin/osm.hpp"
#include "parkingtwin/types.hpp"

namespace parkingtwin::synth {

struct VehicleSpec {
  Vec2d center = Vec2d::Zero();
  double yaw_deg = 0.0;  // length axis direction
  double length = 4.2;
  double width = 1.8;
  double height = 1.5;
  double tilt_deg = 0.0;  // roof tilt across the width
  Rgb8 color = Rgb8(180, 30, 30);
  int first_frame = 0;
  int last_frame = INT_MAX;  // inclusive

  bool present(int frame) const { return frame >= first_frame && frame <= last_frame; }
};

struct LightSpot {
  Vec2d center = Vec2d::Zero();
  double radius = 1.0;
  double gain = 0.0;
};

struct FloorDecal {
  Eigen::AlignedBox2d box;
  Rgb8 albedo;
};

enum class Material : std::uint8_t { Floor, Wall, Pillar, Cap, Underside, Vehicle };

struct SceneSpec {
  std::string blueprint_osm;  // planar OSM XML
  geometry::GeometryParams geometry;

  Rgb8 floor_albedo = Rgb8(105, 105, 110);
  Rgb8 wall_albedo_a = Rgb8(176, 168, 150);
  Rgb8 wall_albedo_b = Rgb8(60, 80, 125);
  double checker_size = 0.5;
  Rgb8 pillar_albedo = Rgb8(180, 150, 50);
  Rgb8 pillar_band = Rgb8(40, 40, 40);
  Rgb8 cap_albedo = Rgb8(140, 140, 140);
  Rgb8 sky = Rgb8(20, 20, 24);
  std::vector<FloorDecal> decals;

  std::vector<VehicleSpec> vehicles;

  // Luminance multiplier field over the floor plan.
  double light_base = 0.9;
  std::vector<LightSpot> lights;
  // Per-frame auto-exposure: 1 + amplitude * sin(2 pi i / period + phase).
  double exposure_amplitude = 0.25;
  double exposure_period = 23.0;

  int blur_every = 7;  // every n-th frame is box-blurred (0 = never)
  int blur_radius = 2;
  double rgb_noise = 2.0;  // 8-bit units

  // Camera path: closed polyline, sampled uniformly by arc length.
  std::vector<Vec2d> waypoints;
  int frames = 200;
  double camera_height = 1.6;
  double pitch_deg = 10.0;
  double look_ahead = 3.0;
  Vec2d look_bias_target = Vec2d(10.0, 5.0);
  double look_bias = 0.35;

  Intrinsics camera = Intrinsics::from_fov(640, 360, 90.0);
  double depth_noise = 0.01;
  std::uint64_t seed = 7;

  void validate() const;

  // The 20 m x 10 m lot: 2 wall loops, 4 pillars, 3 parked vehicles.
  static SceneSpec default_fixture();
  // `synth.*` keys on top of the default fixture.
  static SceneSpec from_config(const Config& cfg);
};

std::string default_blueprint_osm();

double exposure(const SceneSpec& spec, int frame);
double light_at(const SceneSpec& spec, const Vec2d& xy);
std::vector<Pose> trajectory(const SceneSpec& spec);
TriangleMesh vehicle_mesh(const VehicleSpec& v);

struct SynthFrame {
  RgbImage rgb;
  DepthMap depth;  // meters, 0 = invalid
  BoolGrid gt_mask;
  Pose pose;
};

// Static mesh, per-face materials and lighting, ready to render frames.
class Scene {
 public:
  explicit Scene(SceneSpec spec);

  const SceneSpec& spec() const { return spec_; }
  const osm::OsmMap& map() const { return map_; }
  const TriangleMesh& static_mesh() const { return mesh_; }
  const std::vector<Pose>& poses() const { return poses_; }

  SynthFrame render(int frame) const;

  // Shaded albedo at nominal exposure, area-averaged over each vertex's one-ring.
  ColorsU8 gt_colors() const;

  Vec3d albedo(const Vec3d& p, Material m) const;
  Material vertex_material(Eigen::Index v) const;

 private:
  Material classify(const Vec3d& p, const Vec3d& n) const;

  SceneSpec spec_;
  osm::OsmMap map_;
  TriangleMesh mesh_;
  std::vector<Material> face_material_;
  std::vector<Eigen::AlignedBox2d> pillar_boxes_;
  std::vector<Pose> poses_;
};

struct DatasetSummary {
  int frames = 0;
  std::size_t vehicle_pixels = 0;
  std::size_t total_pixels = 0;
};

// Writes map.osm, intrinsics.txt, trajectory.txt, rgb/, depth/, gt_masks/,
// and gt_colors.ply under `out_dir`.
DatasetSummary synth_dataset(const SceneSpec& spec, const std::string& out_dir, int threads = 1);

std::string frame_name(int index);  // zero-padded, six digits

}  // namespace parkingtwin::synth
