#include "parkingtwin/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <thread>

#include "parkingtwin/error.hpp"
#include "parkingtwin/image_io.hpp"
#include "parkingtwin/raster.hpp"

namespace parkingtwin::synth {

namespace fs = std::filesystem;

std::string default_blueprint_osm() {
  struct Loop {
    const char* tag_k;
    const char* tag_v;
    std::vector<Vec2d> pts;
  };
  const std::vector<Loop> loops = {
      {"building", "yes", {{0.0, 0.0}, {20.0, 0.0}, {20.0, 10.0}, {0.0, 10.0}}},
      {"wall", "yes", {{3.4, 4.2}, {4.6, 4.2}, {4.6, 5.8}, {3.4, 5.8}}},
      {"barrier", "pillar", {{5.7, 3.2}, {6.3, 3.2}, {6.3, 3.8}, {5.7, 3.8}}},
      {"barrier", "pillar", {{13.7, 3.2}, {14.3, 3.2}, {14.3, 3.8}, {13.7, 3.8}}},
      {"indoor", "column", {{5.7, 6.2}, {6.3, 6.2}, {6.3, 6.8}, {5.7, 6.8}}},
      {"barrier", "pillar", {{13.7, 6.2}, {14.3, 6.2}, {14.3, 6.8}, {13.7, 6.8}}},
  };
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"parkingtwin-synth\">\n";
  char buf[160];
  int node = 1;
  for (const auto& l : loops) {
    for (const auto& p : l.pts) {
      std::snprintf(buf, sizeof(buf), "  <node id=\"%d\" lon=\"%.3f\" lat=\"%.3f\"/>\n", node++, p.x(), p.y());
      out += buf;
    }
  }
  node = 1;
  int way = 100;
  for (const auto& l : loops) {
    std::snprintf(buf, sizeof(buf), "  <way id=\"%d\">\n   ", way++);
    out += buf;
    const int first = node;
    for (std::size_t i = 0; i < l.pts.size(); ++i) {
      std::snprintf(buf, sizeof(buf), " <nd ref=\"%d\"/>", node++);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), " <nd ref=\"%d\"/>\n    <tag k=\"%s\" v=\"%s\"/>\n  </way>\n", first, l.tag_k,
                  l.tag_v);
    out += buf;
  }
  out += "</osm>\n";
  return out;
}

void SceneSpec::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Parameter, "synth: " + m); };
  camera.validate();
  if (frames < 0) fail("frames must be non-negative");
  if (waypoints.size() < 2) fail("need at least two waypoints");
  if (!(depth_noise >= 0.0) || !(rgb_noise >= 0.0)) fail("noise must be non-negative");
  if (blur_every < 0 || blur_radius < 0) fail("blur settings must be non-negative");
  for (const auto& v : vehicles) {
    if (!(v.height > 0.0 && v.height < 3.0) || !(v.length > 0.0) || !(v.width > 0.0)) fail("bad vehicle size");
    if (!(std::abs(v.tilt_deg) < 60.0)) fail("vehicle tilt out of range");
  }
}

SceneSpec SceneSpec::default_fixture() {
  SceneSpec s;
  s.blueprint_osm = default_blueprint_osm();
  const Rgb8 white(200, 200, 190), yellow(190, 160, 40);
  for (double x : {7.0, 9.0, 11.0, 13.0}) {
    s.decals.push_back({Eigen::AlignedBox2d(Vec2d(x - 0.06, 2.9), Vec2d(x + 0.06, 7.1)), white});
  }
  for (double y : {2.6, 7.4}) {
    s.decals.push_back({Eigen::AlignedBox2d(Vec2d(6.5, y - 0.06), Vec2d(13.5, y + 0.06)), yellow});
  }
  VehicleSpec v1;
  v1.center = Vec2d(8.0, 5.0);
  v1.yaw_deg = 90.0;
  v1.color = Rgb8(170, 35, 35);
  v1.last_frame = 129;
  VehicleSpec v2 = v1;
  v2.center = Vec2d(10.0, 5.0);
  v2.color = Rgb8(35, 60, 170);
  v2.first_frame = 60;
  v2.last_frame = INT_MAX;
  VehicleSpec v3 = v1;
  v3.center = Vec2d(12.0, 5.0);
  v3.color = Rgb8(215, 215, 205);
  v3.last_frame = 89;
  s.vehicles = {v1, v2, v3};
  s.lights = {{Vec2d(1.0, 5.0), 3.5, 0.45}, {Vec2d(16.0, 8.0), 3.0, -0.3}};
  s.waypoints = {{2.2, 1.7}, {17.8, 1.7}, {17.8, 8.3}, {2.2, 8.3}};
  return s;
}

SceneSpec SceneSpec::from_config(const Config& cfg) {
  SceneSpec s = default_fixture();
  if (auto path = cfg.get("synth.blueprint")) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorKind::Io, "cannot read blueprint '" + *path + "'");
    s.blueprint_osm.assign(std::istreambuf_iterator<char>(in), {});
  }
  s.frames = cfg.get_int("synth.frames", s.frames);
  const int w = cfg.get_int("synth.width", s.camera.width);
  const int h = cfg.get_int("synth.height", s.camera.height);
  const double hfov = cfg.get_double("synth.hfov", 90.0);
  s.camera = Intrinsics::from_fov(w, h, hfov);
  s.seed = static_cast<std::uint64_t>(cfg.get_int("synth.seed", static_cast<int>(s.seed)));
  s.depth_noise = cfg.get_double("synth.depth_noise", s.depth_noise);
  s.rgb_noise = cfg.get_double("synth.rgb_noise", s.rgb_noise);
  s.exposure_amplitude = cfg.get_double("synth.exposure_amplitude", s.exposure_amplitude);
  s.exposure_period = cfg.get_double("synth.exposure_period", s.exposure_period);
  s.blur_every = cfg.get_int("synth.blur_every", s.blur_every);
  s.camera_height = cfg.get_double("synth.camera_height", s.camera_height);
  s.pitch_deg = cfg.get_double("synth.pitch", s.pitch_deg);
  s.geometry.voxel_size = cfg.get_double("synth.voxel", s.geometry.voxel_size);
  s.geometry.tau = 3.0 * s.geometry.voxel_size;
  if (!cfg.get_bool("synth.vehicles", true)) s.vehicles.clear();
  if (cfg.get_bool("synth.tilted", false) && s.vehicles.size() > 1) s.vehicles[1].tilt_deg = 25.0;
  s.validate();
  return s;
}

double exposure(const SceneSpec& spec, int frame) {
  return 1.0 + spec.exposure_amplitude * std::sin(2.0 * std::numbers::pi * frame / spec.exposure_period);
}

double light_at(const SceneSpec& spec, const Vec2d& xy) {
  double l = spec.light_base;
  for (const auto& s : spec.lights) {
    l += s.gain * std::exp(-(xy - s.center).squaredNorm() / (2.0 * s.radius * s.radius));
  }
  return std::max(l, 0.0);
}

std::vector<Pose> trajectory(const SceneSpec& spec) {
  const auto& wp = spec.waypoints;
  std::vector<double> cum = {0.0};
  for (std::size_t i = 0; i < wp.size(); ++i) cum.push_back(cum.back() + (wp[(i + 1) % wp.size()] - wp[i]).norm());
  const double total = cum.back();
  auto at = [&](double s) {
    s = std::fmod(s, total);
    if (s < 0) s += total;
    std::size_t i = 0;
    while (i + 1 < cum.size() - 1 && cum[i + 1] <= s) ++i;
    const double t = (s - cum[i]) / (cum[i + 1] - cum[i]);
    return Vec2d(wp[i] + t * (wp[(i + 1) % wp.size()] - wp[i]));
  };
  std::vector<Pose> poses;
  const double step = spec.frames > 0 ? total / spec.frames : 0.0;
  for (int i = 0; i < spec.frames; ++i) {
    const Vec2d p = at(i * step);
    const Vec2d ahead = at(i * step + spec.look_ahead);
    const Vec2d t2 = (1.0 - spec.look_bias) * ahead + spec.look_bias * spec.look_bias_target;
    const double dist = (t2 - p).norm();
    const double z = spec.geometry.z_ground + spec.camera_height;
    const Vec3d eye(p.x(), p.y(), z);
    const Vec3d target(t2.x(), t2.y(), z - std::tan(spec.pitch_deg * std::numbers::pi / 180.0) * dist);
    poses.push_back(look_at(eye, target));
  }
  return poses;
}

TriangleMesh vehicle_mesh(const VehicleSpec& v) {
  const double yaw = v.yaw_deg * std::numbers::pi / 180.0;
  const Vec2d ax(std::cos(yaw), std::sin(yaw));
  const Vec2d ay(-ax.y(), ax.x());
  const double hl = 0.5 * v.length, hw = 0.5 * v.width;
  const double dz = hw * std::tan(v.tilt_deg * std::numbers::pi / 180.0);
  const double z0 = 0.005;
  TriangleMesh m;
  m.positions.resize(8, 3);
  int idx = 0;
  for (int top = 0; top < 2; ++top) {
    for (int j = 0; j < 4; ++j) {
      const double sx = (j == 0 || j == 3) ? -1.0 : 1.0;
      const double sy = (j < 2) ? -1.0 : 1.0;
      const Vec2d xy = v.center + sx * hl * ax + sy * hw * ay;
      const double z = top ? v.height + sy * dz : z0;
      m.positions.row(idx++) = Vec3d(xy.x(), xy.y(), z).transpose();
    }
  }
  // Bottom 0-3, top 4-7, counter-clockwise seen from above.
  m.faces.resize(12, 3);
  m.faces << 0, 2, 1, 0, 3, 2,  // bottom, facing down
      4, 5, 6, 4, 6, 7,         // top
      0, 1, 5, 0, 5, 4,         //
      1, 2, 6, 1, 6, 5,         //
      2, 3, 7, 2, 7, 6,         //
      3, 0, 4, 3, 4, 7;
  m.compute_normals();
  m.build_adjacency();
  return m;
}

Scene::Scene(SceneSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  map_ = osm::parse_osm(spec_.blueprint_osm);
  auto geo = geometry::build_geometry(map_, spec_.geometry);
  mesh_ = std::move(geo.mesh);
  for (const auto& s : map_.shapes) {
    if (s.cls != osm::SemanticClass::Pillar) continue;
    Eigen::AlignedBox2d box;
    for (const auto& p : map_.points(s)) box.extend(p);
    pillar_boxes_.push_back(box);
  }
  face_material_.resize(static_cast<std::size_t>(mesh_.face_count()));
  for (Eigen::Index f = 0; f < mesh_.face_count(); ++f) {
    const Vec3d a = mesh_.positions.row(mesh_.faces(f, 0));
    const Vec3d n = (Vec3d(mesh_.positions.row(mesh_.faces(f, 1))) - a)
                        .cross(Vec3d(mesh_.positions.row(mesh_.faces(f, 2))) - a)
                        .normalized();
    face_material_[f] = classify(mesh_.face_barycenter(f), n);
  }
  poses_ = trajectory(spec_);
}

Material Scene::classify(const Vec3d& p, const Vec3d& n) const {
  const double v = spec_.geometry.voxel_size;
  if (n.z() > 0.7) return p.z() < spec_.geometry.z_ground + 0.5 * v ? Material::Floor : Material::Cap;
  if (n.z() < -0.7) return Material::Underside;
  for (const auto& b : pillar_boxes_) {
    const Vec2d q(p.x(), p.y());
    if (b.exteriorDistance(q) < 0.15) return Material::Pillar;
  }
  return Material::Wall;
}

Material Scene::vertex_material(Eigen::Index v) const {
  return classify(mesh_.positions.row(v).transpose(), mesh_.normals.row(v).transpose());
}

Vec3d Scene::albedo(const Vec3d& p, Material m) const {
  const auto c = [](const Rgb8& x) { return Vec3d(x.cast<double>()); };
  switch (m) {
    case Material::Floor: {
      for (const auto& d : spec_.decals) {
        if (d.box.contains(Vec2d(p.x(), p.y()))) return c(d.albedo);
      }
      return c(spec_.floor_albedo) * (1.0 + 0.08 * std::sin(0.9 * p.x()) * std::sin(1.3 * p.y()));
    }
    case Material::Wall: {
      const double s = spec_.checker_size;
      const long k = static_cast<long>(std::floor((p.x() + p.y()) / s)) + static_cast<long>(std::floor(p.z() / s));
      return (k & 1) ? c(spec_.wall_albedo_b) : c(spec_.wall_albedo_a);
    }
    case Material::Pillar: {
      const double h = p.z() - spec_.geometry.z_ground;
      return (h > 0.9 && h < 1.3) ? c(spec_.pillar_band) : c(spec_.pillar_albedo);
    }
    case Material::Cap:
    case Material::Underside:
    case Material::Vehicle: return c(spec_.cap_albedo);
  }
  return c(spec_.cap_albedo);
}

namespace {

RgbImage box_blur(const RgbImage& in, int r) {
  RgbImage out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      Vec3d sum = Vec3d::Zero();
      int n = 0;
      for (int yy = std::max(0, y - r); yy <= std::min(in.height - 1, y + r); ++yy) {
        for (int xx = std::max(0, x - r); xx <= std::min(in.width - 1, x + r); ++xx) {
          sum += in.pixel(xx, yy).cast<double>().transpose();
          ++n;
        }
      }
      sum /= n;
      out.pixel(x, y) = Rgb8(to_u8(sum.x()), to_u8(sum.y()), to_u8(sum.z())).transpose();
    }
  }
  return out;
}

}  // namespace

SynthFrame Scene::render(int frame) const {
  const Intrinsics& k = spec_.camera;
  SynthFrame out;
  out.pose = poses_.at(static_cast<std::size_t>(frame));

  std::vector<const TriangleMesh*> parts = {&mesh_};
  std::vector<TriangleMesh> vehicles;
  std::vector<const VehicleSpec*> owners;
  for (const auto& v : spec_.vehicles) {
    if (!v.present(frame)) continue;
    TriangleMesh vm = vehicle_mesh(v);
    vm.positions.col(2).array() += spec_.geometry.z_ground;
    vehicles.push_back(std::move(vm));
    owners.push_back(&v);
  }
  Vertices positions = mesh_.positions;
  Faces faces = mesh_.faces;
  for (const auto& vm : vehicles) {
    const Eigen::Index v0 = positions.rows(), f0 = faces.rows();
    positions.conservativeResize(v0 + vm.positions.rows(), 3);
    positions.bottomRows(vm.positions.rows()) = vm.positions;
    faces.conservativeResize(f0 + vm.faces.rows(), 3);
    faces.bottomRows(vm.faces.rows()) = vm.faces.array() + static_cast<std::int32_t>(v0);
  }
  const RasterBuffers rb = rasterize(positions, faces, k, out.pose);
  const Eigen::Index static_faces = mesh_.face_count();

  std::mt19937_64 rng(spec_.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(frame));
  std::normal_distribution<double> depth_n(0.0, 1.0), rgb_n(0.0, 1.0);
  const double e = exposure(spec_, frame);

  out.rgb = RgbImage(k.width, k.height);
  out.depth = DepthMap::Zero(k.height, k.width);
  out.gt_mask = BoolGrid::Constant(k.height, k.width, false);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const std::int32_t f = rb.face(y, x);
      const double dn = depth_n(rng);
      const Vec3d cn(rgb_n(rng), rgb_n(rng), rgb_n(rng));
      if (f == kNoFace) {
        out.rgb.pixel(x, y) = spec_.sky.transpose();
        continue;
      }
      const double b1 = rb.bary1(y, x), b2 = rb.bary2(y, x);
      const Vec3d p = (1.0 - b1 - b2) * Vec3d(positions.row(faces(f, 0))) + b1 * Vec3d(positions.row(faces(f, 1))) +
                      b2 * Vec3d(positions.row(faces(f, 2)));
      Vec3d alb;
      if (f < static_faces) {
        alb = albedo(p, face_material_[f]);
      } else {
        const auto vi = static_cast<std::size_t>((f - static_faces) / 12);
        const auto local = (f - static_faces) % 12;
        const VehicleSpec& v = *owners[vi];
        const double h = p.z() - spec_.geometry.z_ground;
        alb = Vec3d(v.color.cast<double>());
        if (local >= 4 && h > 0.55 * v.height && h < 0.9 * v.height) alb = Vec3d(40, 45, 55);
        out.gt_mask(y, x) = true;
      }
      const Vec3d c = alb * light_at(spec_, Vec2d(p.x(), p.y())) * e + spec_.rgb_noise * cn;
      out.rgb.pixel(x, y) = Rgb8(to_u8(c.x()), to_u8(c.y()), to_u8(c.z())).transpose();
      const double d = rb.depth(y, x) + spec_.depth_noise * dn;
      out.depth(y, x) = static_cast<float>(std::max(d, 1e-3));
    }
  }
  if (spec_.blur_every > 0 && spec_.blur_radius > 0 && frame % spec_.blur_every == spec_.blur_every - 1) {
    out.rgb = box_blur(out.rgb, spec_.blur_radius);
  }
  return out;
}

ColorsU8 Scene::gt_colors() const {
  // Area-weighted mean of the shaded albedo over each vertex's share of its
  // incident faces (the corner region with barycentric weight >= 1/2).
  constexpr int kSteps = 4;
  ColorsU8 c(mesh_.vertex_count(), 3);
  for (Eigen::Index v = 0; v < mesh_.vertex_count(); ++v) {
    Vec3d sum = Vec3d::Zero();
    double wsum = 0.0;
    for (const std::int32_t f : mesh_.incident_faces(v)) {
      int corner = 0;
      while (mesh_.faces(f, corner) != v) ++corner;
      const Vec3d a = mesh_.positions.row(v);
      const Vec3d b = mesh_.positions.row(mesh_.faces(f, (corner + 1) % 3));
      const Vec3d d = mesh_.positions.row(mesh_.faces(f, (corner + 2) % 3));
      const double area = 0.5 * (b - a).cross(d - a).norm();
      if (area <= 0.0) continue;
      for (int i = 0; i < kSteps; ++i) {
        for (int j = 0; i + j < kSteps; ++j) {
          const double u = 0.5 * (i + 1.0 / 3.0) / kSteps, w = 0.5 * (j + 1.0 / 3.0) / kSteps;
          const Vec3d p = a + u * (b - a) + w * (d - a);
          sum += area * albedo(p, face_material_[static_cast<std::size_t>(f)]) * light_at(spec_, Vec2d(p.x(), p.y()));
          wsum += area;
        }
      }
    }
    if (wsum <= 0.0) {
      const Vec3d p = mesh_.positions.row(v);
      sum = albedo(p, vertex_material(v)) * light_at(spec_, Vec2d(p.x(), p.y()));
      wsum = 1.0;
    }
    sum /= wsum;
    c.row(v) = Rgb8(to_u8(sum.x()), to_u8(sum.y()), to_u8(sum.z())).transpose();
  }
  return c;
}

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.png", index);
  return buf;
}

DatasetSummary synth_dataset(const SceneSpec& spec, const std::string& out_dir, int threads) {
  const Scene scene(spec);
  std::error_code ec;
  for (const char* sub : {"rgb", "depth", "gt_masks"}) {
    fs::create_directories(fs::path(out_dir) / sub, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create '" + (fs::path(out_dir) / sub).string() + "': " + ec.message());
  }
  auto write_text = [&](const char* name, const std::string& text) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    f << text;
    if (!f) throw Error(ErrorKind::Io, std::string("cannot write ") + name);
  };
  write_text("map.osm", spec.blueprint_osm);
  write_text("intrinsics.txt", format_intrinsics(spec.camera));
  std::vector<TrajectoryEntry> traj;
  for (int i = 0; i < spec.frames; ++i) traj.push_back({i, scene.poses()[i]});
  write_text("trajectory.txt", format_trajectory(traj));

  TriangleMesh gt = scene.static_mesh();
  gt.rgb = scene.gt_colors();
  write_ply(gt, (fs::path(out_dir) / "gt_colors.ply").string());

  DatasetSummary summary;
  summary.frames = spec.frames;
  std::vector<std::size_t> vehicle_px(static_cast<std::size_t>(spec.frames), 0);
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(threads, 1)));
  auto worker = [&](int wid) {
    try {
      for (int i = next++; i < spec.frames; i = next++) {
        const SynthFrame fr = scene.render(i);
        const std::string name = frame_name(i);
        write_png_rgb((fs::path(out_dir) / "rgb" / name).string(), fr.rgb);
        write_depth_png((fs::path(out_dir) / "depth" / name).string(), fr.depth, spec.camera.depth_scale);
        write_png_gray((fs::path(out_dir) / "gt_masks" / name).string(), mask_to_gray(fr.gt_mask));
        vehicle_px[static_cast<std::size_t>(i)] = static_cast<std::size_t>(fr.gt_mask.count());
      }
    } catch (...) {
      errors[static_cast<std::size_t>(wid)] = std::current_exception();
    }
  };
  const int n = std::max(threads, 1);
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker, t);
  worker(0);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (auto c : vehicle_px) summary.vehicle_pixels += c;
  summary.total_pixels = static_cast<std::size_t>(spec.frames) * spec.camera.width * spec.camera.height;
  return summary;
}

}  // namespace parkingtwin::synth
