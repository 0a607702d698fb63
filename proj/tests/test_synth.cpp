#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "parkingtwin/error.hpp"
#include "parkingtwin/image_io.hpp"
#include "parkingtwin/metrics.hpp"
#include "parkingtwin/synth.hpp"
#include "support.hpp"

using namespace parkingtwin;
namespace fs = std::filesystem;

namespace {

synth::SceneSpec small_spec(int frames = 3) {
  synth::SceneSpec s = synth::SceneSpec::default_fixture();
  s.frames = frames;
  s.camera = Intrinsics::from_fov(64, 36, 90.0);
  s.geometry.voxel_size = 0.1;
  s.geometry.tau = 0.3;
  return s;
}

double cross(const Vec2d& o, const Vec2d& a, const Vec2d& b) {
  return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

// Andrew's monotone chain, counter-clockwise.
std::vector<Vec2d> hull(std::vector<Vec2d> p) {
  std::sort(p.begin(), p.end(), [](const Vec2d& a, const Vec2d& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  std::vector<Vec2d> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  h.resize(k - 1);
  return h;
}

// Pixel centers inside the pinhole image of the vehicle's box corners.
BoolGrid box_footprint(const synth::VehicleSpec& v, double z_ground, const Intrinsics& k, const Pose& cam_to_world) {
  const double yaw = v.yaw_deg * std::numbers::pi / 180.0;
  const Vec2d ax(std::cos(yaw), std::sin(yaw)), ay(-std::sin(yaw), std::cos(yaw));
  const Pose w2c = cam_to_world.inverse();
  std::vector<Vec2d> img;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0})
      for (double z : {0.005, v.height}) {
        const Vec2d xy = v.center + sx * 0.5 * v.length * ax + sy * 0.5 * v.width * ay;
        const Vec3d c = w2c * Vec3d(xy.x(), xy.y(), z_ground + z);
        REQUIRE(c.z() > 0.1);
        img.emplace_back(k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy);
      }
  const std::vector<Vec2d> h = hull(img);
  BoolGrid m = BoolGrid::Constant(k.height, k.width, false);
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x) {
      bool inside = true;
      for (std::size_t i = 0; i < h.size() && inside; ++i) inside = cross(h[i], h[(i + 1) % h.size()], Vec2d(x, y)) >= 0;
      m(y, x) = inside;
    }
  return m;
}

// Brute-force SSIM: every 11x11 window fully inside the image, Gaussian
// weights with sigma 1.5, in long double.
double ssim_oracle(const DoubleGrid& a, const DoubleGrid& b) {
  long double w[11][11], wsum = 0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) wsum += w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0L * 2.25L));
  const long double c1 = 6.5025L, c2 = 58.5225L;
  long double total = 0;
  int n = 0;
  for (Eigen::Index y = 0; y + 11 <= a.rows(); ++y)
    for (Eigen::Index x = 0; x + 11 <= a.cols(); ++x) {
      long double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const long double g = w[i][j] / wsum, va = a(y + i, x + j), vb = b(y + i, x + j);
          ma += g * va;
          mb += g * vb;
        }
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const long double g = w[i][j] / wsum, da = a(y + i, x + j) - ma, db = b(y + i, x + j) - mb;
          saa += g * da * da;
          sbb += g * db * db;
          sab += g * da * db;
        }
      total += ((2 * ma * mb + c1) * (2 * sab + c2)) / ((ma * ma + mb * mb + c1) * (saa + sbb + c2));
      ++n;
    }
  return static_cast<double>(total / n);
}

bool near_solid(const osm::OsmMap& map, const Vec2d& q, double r) {
  for (const osm::Shape* sh : map.solids()) {
    const std::vector<Vec2d> pts = map.points(*sh);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec2d a = pts[i], b = pts[(i + 1) % pts.size()];
      const double t = std::clamp((q - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
      if ((a + t * (b - a) - q).norm() < r) return true;
    }
  }
  return false;
}

RgbImage random_image(int w, int h, unsigned seed) {
  RgbImage im(w, h);
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  for (Eigen::Index i = 0; i < im.pixels.size(); ++i) im.pixels.data()[i] = static_cast<std::uint8_t>(d(rng));
  return im;
}

}  // namespace

TEST_CASE("dataset generation is deterministic") {
  testing_support::TempDir a("a"), b("b"), c("c");
  const synth::SceneSpec s = small_spec();
  synth::synth_dataset(s, a.path().string(), 1);
  synth::synth_dataset(s, b.path().string(), 2);
  synth::SceneSpec other = s;
  other.seed = 8;
  synth::synth_dataset(other, c.path().string(), 1);
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a.path());
    CHECK_MESSAGE(testing_support::read_file(e.path().string()) == testing_support::read_file((b.path() / rel).string()),
                  rel.string());
    ++files;
  }
  CHECK(files == 4 + 3 * 3);
  const std::string rgb0 = (fs::path("rgb") / synth::frame_name(0)).string();
  CHECK(testing_support::read_file((a.path() / rgb0).string()) != testing_support::read_file((c.path() / rgb0).string()));
  CHECK(synth::frame_name(42) == "000042.png");
}

TEST_CASE("no vehicles means empty ground-truth masks") {
  testing_support::TempDir dir("synth");
  synth::SceneSpec s = small_spec(4);
  s.vehicles.clear();
  const auto summary = synth::synth_dataset(s, dir.path().string(), 1);
  CHECK(summary.frames == 4);
  CHECK(summary.vehicle_pixels == 0);
  CHECK(summary.total_pixels == 4u * 64u * 36u);
  for (int i = 0; i < 4; ++i) {
    const GrayImage m = read_png_gray((dir.path() / "gt_masks" / synth::frame_name(i)).string());
    CHECK(m.maxCoeff() == 0);
  }
}

TEST_CASE("vehicle mask matches the projected box footprint") {
  synth::SceneSpec s = small_spec(1);
  s.camera = Intrinsics::from_fov(160, 90, 90.0);
  s.vehicles.clear();
  const std::vector<Pose> poses = synth::trajectory(s);
  const Pose& pose = poses[0];
  const Vec3d fwd3 = pose.linear().col(2);
  const Vec2d eye(pose.translation().x(), pose.translation().y());
  const Vec2d fwd = Vec2d(fwd3.x(), fwd3.y()).normalized();

  synth::VehicleSpec v;
  v.yaw_deg = std::atan2(fwd.y(), fwd.x()) * 180.0 / std::numbers::pi;
  auto place = [&](double dist) {
    synth::VehicleSpec out = v;
    out.center = eye + dist * fwd;
    return out;
  };
  auto fraction = [&](const BoolGrid& m) { return double(m.count()) / double(m.size()); };
  // Footprint area falls with distance.
  double lo = 2.6, hi = 12.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = fraction(box_footprint(place(mid), s.geometry.z_ground, s.camera, pose));
    (f > 0.40 ? lo : hi) = mid;
  }
  v = place(0.5 * (lo + hi));
  const BoolGrid oracle = box_footprint(v, s.geometry.z_ground, s.camera, pose);
  REQUIRE(fraction(oracle) == doctest::Approx(0.40).epsilon(0.02));

  s.vehicles = {v};
  const synth::Scene scene(s);
  const synth::SynthFrame fr = scene.render(0);
  const double got = fraction(fr.gt_mask);
  CHECK(std::abs(got - 0.40) <= 0.02);
  const double inter = double((fr.gt_mask && oracle).count());
  const double uni = double((fr.gt_mask || oracle).count());
  CHECK(inter / uni > 0.97);
}

TEST_CASE("depth is consistent with the scene geometry") {
  synth::SceneSpec s = small_spec(5);
  s.camera = Intrinsics::from_fov(120, 68, 90.0);
  s.depth_noise = 0.0;
  const synth::Scene scene(s);
  testing_support::TempDir dir("synth");
  synth::synth_dataset(s, dir.path().string(), 1);
  for (int i = 0; i < s.frames; ++i) {
    const synth::SynthFrame fr = scene.render(i);
    const DepthMap stored =
        read_depth_png((dir.path() / "depth" / synth::frame_name(i)).string(), s.camera.depth_scale);
    int floor_px = 0;
    double max_err = 0.0, max_png = 0.0;
    for (int y = 0; y < s.camera.height; ++y)
      for (int x = 0; x < s.camera.width; ++x) {
        const float d = fr.depth(y, x);
        if (d <= 0.0f) continue;
        max_png = std::max(max_png, std::abs(double(stored(y, x)) - d));
        const Vec3d p = back_project(s.camera, fr.pose, Vec2d(x, y), d);
        const auto q = project(s.camera, fr.pose, p);
        REQUIRE(q.has_value());
        CHECK((q->pixel - Vec2d(x, y)).norm() < 1e-3);
        // Floor pixels: the ray hits z = z_ground in front of anything else.
        const Vec3d dir = fr.pose.linear() * Vec3d((x - s.camera.cx) / s.camera.fx, (y - s.camera.cy) / s.camera.fy, 1.0);
        if (dir.z() >= -1e-3 || fr.gt_mask(y, x)) continue;
        const double t = (s.geometry.z_ground - fr.pose.translation().z()) / dir.z();
        if (std::abs(t - d) > 0.05) continue;
        const Vec3d hit = fr.pose.translation() + t * dir;
        if (near_solid(scene.map(), Vec2d(hit.x(), hit.y()), 3.0 * s.geometry.voxel_size)) continue;
        ++floor_px;
        max_err = std::max(max_err, std::abs(p.z() - s.geometry.z_ground));
      }
    CHECK(floor_px > 100);
    CHECK(max_err < 1e-3);
    CHECK(max_png <= 0.5 * s.camera.depth_scale + 1e-6);
  }
}

TEST_CASE("scene spec") {
  synth::SceneSpec s = synth::SceneSpec::default_fixture();
  CHECK_NOTHROW(s.validate());
  CHECK(s.vehicles.size() == 3);
  CHECK(synth::exposure(s, 0) == doctest::Approx(1.0));
  s.waypoints.resize(1);
  CHECK_THROWS_AS(s.validate(), Error);
  Config cfg;
  cfg.set("synth.frames", "12");
  cfg.set("synth.width", "80");
  cfg.set("synth.height", "45");
  cfg.set("synth.vehicles", "false");
  const synth::SceneSpec t = synth::SceneSpec::from_config(cfg);
  CHECK(t.frames == 12);
  CHECK(t.camera.width == 80);
  CHECK(t.vehicles.empty());
  cfg.set("synth.depth_noise", "-1");
  CHECK_THROWS_AS(synth::SceneSpec::from_config(cfg), Error);
}

TEST_CASE("psnr") {
  const RgbImage a = random_image(32, 24, 1);
  RgbImage b = a;
  CHECK(psnr(a, b) == kPsnrCap);
  for (Eigen::Index i = 0; i < b.pixels.size(); ++i) {
    auto& px = b.pixels.data()[i];
    px = px == 255 ? 254 : px + 1;
  }
  CHECK(psnr(a, b) == doctest::Approx(48.13).epsilon(1e-4));
  RgbImage black(32, 24), white(32, 24);
  white.pixels.setConstant(255);
  CHECK(psnr(black, white) == doctest::Approx(0.0));
  CHECK_THROWS_AS(psnr(a, RgbImage(31, 24)), Error);
  BoolGrid none = BoolGrid::Constant(24, 32, false);
  CHECK_THROWS_AS(psnr(a, b, &none), Error);
  BoolGrid one = none;
  one(3, 4) = true;
  white.pixel(4, 3).setZero();
  CHECK(psnr(black, white, &one) == kPsnrCap);
}

TEST_CASE("ssim") {
  const RgbImage a = random_image(40, 30, 2);
  const DoubleGrid ga = channel_mean(a);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  // Smooth texture so the inverted image is strongly anti-correlated.
  DoubleGrid smooth(30, 40);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) smooth(y, x) = 128.0 + 100.0 * std::sin(0.3 * x) * std::cos(0.25 * y);
  const DoubleGrid inverted = 255.0 - smooth;
  CHECK(ssim(smooth, inverted) < 0.5);

  const RgbImage b = random_image(40, 30, 3);
  const DoubleGrid gb = channel_mean(b);
  CHECK(ssim(ga, gb) == doctest::Approx(ssim(gb, ga)).epsilon(1e-12));
  CHECK(ssim(ga, gb) == doctest::Approx(ssim_oracle(ga, gb)).epsilon(1e-9));
  const DoubleGrid noisy = smooth + 0.2 * (gb - 128.0);
  CHECK(ssim(smooth, noisy) == doctest::Approx(ssim_oracle(smooth, noisy)).epsilon(1e-9));
  CHECK(ssim(smooth, noisy) < 1.0);
  CHECK(ssim(smooth, noisy) > ssim(smooth, inverted));

  CHECK_THROWS_AS(ssim(ga, DoubleGrid(30, 41)), Error);
  CHECK_THROWS_AS(ssim(DoubleGrid::Zero(10, 40), DoubleGrid::Zero(10, 40)), Error);
}

TEST_CASE("vertex color render") {
  TriangleMesh m;
  m.positions.resize(4, 3);
  m.positions << -1, -1, 0, 1, -1, 0, 1, 1, 0, -1, 1, 0;
  m.faces.resize(2, 3);
  m.faces << 0, 1, 2, 0, 2, 3;
  m.build_adjacency();
  m.compute_normals();
  ColorsU8 c = ColorsU8::Constant(4, 3, 77);
  const Intrinsics k = Intrinsics::from_fov(32, 32, 60.0);
  const Pose pose = look_at(Vec3d(0, 0, 3), Vec3d::Zero(), Vec3d::UnitY());
  BoolGrid mask;
  const RgbImage im = render_vertex_colors(m, c, k, pose, Rgb8(1, 2, 3), &mask);
  CHECK(im.pixel(16, 16) == Eigen::Matrix<std::uint8_t, 1, 3>(77, 77, 77));
  CHECK(im.pixel(0, 0) == Eigen::Matrix<std::uint8_t, 1, 3>(1, 2, 3));
  CHECK(mask(16, 16));
  CHECK_FALSE(mask(0, 0));
}
