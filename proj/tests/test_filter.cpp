#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "parkingtwin/error.hpp"
#include "parkingtwin/filter.hpp"
#include "parkingtwin/mesh.hpp"
#include "parkingtwin/raster.hpp"
#include "parkingtwin/synth.hpp"

using namespace parkingtwin;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

RowVectors3<float> one_normal(const Vec3d& n) { return n.normalized().cast<float>().transpose(); }

BoolGrid bernoulli(std::mt19937_64& rng, int rows, int cols, double p) {
  std::bernoulli_distribution b(p);
  BoolGrid g(rows, cols);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = b(rng);
  return g;
}

bool subset(const BoolGrid& a, const BoolGrid& b) { return !(a && !b).any(); }

TriangleMesh floor_quad(double half) {
  TriangleMesh m;
  m.positions.resize(4, 3);
  m.positions << -half, -half, 0, half, -half, 0, half, half, 0, -half, half, 0;
  m.faces.resize(2, 3);
  m.faces << 0, 1, 2, 0, 2, 3;
  m.build_adjacency();
  m.compute_normals();
  return m;
}

struct BoxScene {
  Intrinsics k = Intrinsics::from_fov(160, 90, 90.0);
  Pose pose = look_at(Vec3d(0, 0, 1.6), Vec3d(8, 0, 0.3));
  TriangleMesh floor = floor_quad(40.0);
  TriangleMesh car;
  DepthMap observed;
  BoolGrid truth;  // pixels where the box is the nearest surface
  FrameGBuffer gb;

  BoxScene() {
    synth::VehicleSpec v;
    v.center = Vec2d(7, 0.5);
    car = synth::vehicle_mesh(v);
    const TriangleMesh both = concatenate({&floor, &car});
    const RasterBuffers rb = rasterize(both.positions, both.faces, k, pose);
    observed = rb.depth;
    for (Eigen::Index i = 0; i < observed.size(); ++i)
      if (!std::isfinite(observed.data()[i])) observed.data()[i] = 0.0f;
    truth = rb.face >= static_cast<std::int32_t>(floor.face_count());
    gb = render_gbuffer(floor, k, pose, observed);
  }
};

}  // namespace

TEST_CASE("normal field") {
  CHECK(normal_field(one_normal({0, 0, 1}), 1, 1, 20.0)(0, 0));
  CHECK_FALSE(normal_field(one_normal({1, 0, 0}), 1, 1, 20.0)(0, 0));
  const auto tilted = [](double deg) { return one_normal({std::sin(deg * kDeg), 0, std::cos(deg * kDeg)}); };
  CHECK(normal_field(tilted(19.9), 1, 1, 20.0)(0, 0));
  CHECK_FALSE(normal_field(tilted(20.1), 1, 1, 20.0)(0, 0));
  RowVectors3<float> nan = RowVectors3<float>::Constant(1, 3, std::nanf(""));
  CHECK_FALSE(normal_field(nan, 1, 1, 20.0)(0, 0));
  CHECK_THROWS_AS(normal_field(one_normal({0, 0, 1}), 2, 2, 20.0), Error);
}

TEST_CASE("height field") {
  // Camera 4 m above the floor looking straight down: the center pixel sees z = 4 - d.
  Intrinsics k;
  k.width = k.height = 3;
  k.fx = k.fy = 10.0;
  k.cx = k.cy = 1.0;
  const Pose pose = look_at(Vec3d(0, 0, 4), Vec3d(0, 0, 0), Vec3d::UnitY());
  const auto at = [&](float d) {
    DepthMap depth = DepthMap::Constant(3, 3, 1.0f);
    depth(1, 1) = d;
    return height_field(depth, k, pose, 0.0, 0.5, 2.5)(1, 1);
  };
  CHECK(at(2.5f));         // z = 1.5
  CHECK_FALSE(at(4.0f));   // floor
  CHECK_FALSE(at(1.2f));   // ceiling at 2.8
  CHECK_FALSE(at(0.0f));   // invalid sample
  CHECK(at(3.5f));         // exactly h_min is inside
}

TEST_CASE("edge field") {
  DepthMap flat = DepthMap::Constant(4, 6, 3.0f);
  CHECK_FALSE(edge_field(depth_gradient_magnitude(flat), 1.0).any());
  DepthMap step = flat;
  step.rightCols(3).setConstant(5.0f);
  CHECK_FALSE(edge_field(depth_gradient_magnitude(step), 1.0).any());  // (5-3)/2 = 1, not > 1
  step.leftCols(3).setConstant(2.0f);
  const BoolGrid e = edge_field(depth_gradient_magnitude(step), 1.0);  // (5-2)/2 = 1.5
  CHECK(e(1, 2));
  CHECK(e(1, 3));
  CHECK_FALSE(e(1, 0));
}

TEST_CASE("depth consistency field") {
  const auto at = [](float dm, float d) {
    return depth_consistency_field(DepthMap::Constant(1, 1, dm), DepthMap::Constant(1, 1, d), 0.3)(0, 0);
  };
  CHECK(at(10.0f, 9.5f));
  CHECK_FALSE(at(10.0f, 9.8f));
  CHECK_FALSE(at(kInfDepth, 2.0f));
  CHECK_FALSE(at(10.0f, 0.0f));
  CHECK_FALSE(at(10.0f, 10.5f));
  CHECK_THROWS_AS(depth_consistency_field(DepthMap::Zero(2, 2), DepthMap::Zero(2, 3), 0.3), Error);
}

TEST_CASE("fuse_masks") {
  const BoolGrid t = BoolGrid::Constant(1, 1, true), f = BoolGrid::Constant(1, 1, false);
  CHECK(fuse_masks(t, t, t, t).mask(0, 0));
  CHECK_FALSE(fuse_masks(f, t, t, t).mask(0, 0));
  CHECK_FALSE(fuse_masks(t, f, t, t).mask(0, 0));
  CHECK_FALSE(fuse_masks(t, t, f, t).mask(0, 0));
  CHECK_FALSE(fuse_masks(t, t, t, f).mask(0, 0));
  CHECK_THROWS_AS(fuse_masks(t, t, t, BoolGrid::Constant(2, 1, true)), Error);

  SUBCASE("four Bernoulli(0.2) fields fuse to 0.2^4") {
    std::mt19937_64 rng(20240601);
    const int n = 1000;
    const BoolGrid a = bernoulli(rng, n, n, 0.2), b = bernoulli(rng, n, n, 0.2), c = bernoulli(rng, n, n, 0.2),
                   d = bernoulli(rng, n, n, 0.2);
    const double rate = fuse_masks(a, b, c, d).rate();
    const double p = std::pow(0.2, 4);
    const double sigma = std::sqrt(p * (1 - p) / 1e6);
    CHECK(std::abs(rate - p) <= 3 * sigma);
  }
}

TEST_CASE("connected components and lifting") {
  BoolGrid g = BoolGrid::Constant(5, 6, false);
  g(0, 0) = g(1, 1) = true;          // diagonal neighbours join under 8-connectivity
  g(3, 4) = g(3, 5) = g(4, 5) = true;
  int count = 0;
  const IndexGrid labels = label_components(g, count);
  CHECK(count == 2);
  CHECK(labels(0, 0) == labels(1, 1));
  CHECK(labels(3, 4) != labels(0, 0));
  CHECK(labels(2, 2) == 0);
  BoolGrid seed = BoolGrid::Constant(5, 6, false);
  seed(4, 5) = true;
  const BoolGrid lifted = lift_to_regions(seed, labels, count);
  CHECK(lifted(3, 4));
  CHECK(lifted(3, 5));
  CHECK_FALSE(lifted(0, 0));
  CHECK(lifted.count() == 3);
}

TEST_CASE("observed normals of a tilted plane") {
  Intrinsics k = Intrinsics::from_fov(40, 30, 60.0);
  const Pose pose = look_at(Vec3d(0, 0, 2), Vec3d(3, 0, 0));
  // plane through the origin tilted 10 deg about the y axis
  const Vec3d n = Vec3d(std::sin(10 * kDeg), 0, std::cos(10 * kDeg));
  DepthMap depth(k.height, k.width);
  for (int y = 0; y < k.height; ++y)
    for (int x = 0; x < k.width; ++x) {
      const Vec3d dir = pose.linear() * Vec3d((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const double t = -n.dot(pose.translation()) / n.dot(dir);
      depth(y, x) = static_cast<float>(t);
    }
  const RowVectors3<float> normals = observed_normals(depth, k, pose, 5);
  const Eigen::Index center = 15 * k.width + 20;
  CHECK(normals.row(center).cast<double>().dot(n.transpose()) > 0.9999);
}

TEST_CASE("occlusion mask on a box vehicle") {
  const BoxScene s;
  REQUIRE(s.truth.count() > 200);
  FilterParams p;
  p.thresholds.tau_depth = 0.03;
  const OcclusionMask m = compute_occlusion_mask(s.gb, s.observed, s.k, s.pose, p);
  const double recall = double((m.mask && s.truth).count()) / double(s.truth.count());
  const double fpr = double((m.mask && !s.truth).count()) / double((!s.truth).count());
  CHECK(recall > 0.9);
  CHECK(fpr < 0.01);
  // Separable by depth: the static mesh lies behind the box by more than tau. Roof pixels
  // whose background ray leaves the floor quad have no reference depth.
  const BoolGrid separable = s.truth && s.gb.ref_depth.isFinite() && (s.gb.ref_depth - s.observed > 0.03f);
  CHECK(double((m.mask && separable).count()) / double(separable.count()) > 0.99);

  SUBCASE("mask is a subset of every constraint field") {
    CHECK(subset(m.mask, m.normal));
    CHECK(subset(m.mask, m.height));
    CHECK(subset(m.mask, m.edge));
    CHECK(subset(m.mask, m.depth));
  }
  SUBCASE("pixel mode is the literal AND") {
    FilterParams pp = p;
    pp.mode = FuseMode::Pixel;
    pp.full_diagnostics = true;
    const OcclusionMask lit = compute_occlusion_mask(s.gb, s.observed, s.k, s.pose, pp);
    CHECK((lit.mask == (lit.normal && lit.height && lit.edge && lit.depth)).all());
    CHECK(subset(lit.mask, m.mask));
  }
  SUBCASE("monotone in the thresholds") {
    for (FuseMode mode : {FuseMode::Pixel, FuseMode::Region}) {
      FilterParams base = p;
      base.mode = mode;
      const BoolGrid ref = compute_occlusion_mask(s.gb, s.observed, s.k, s.pose, base).mask;
      FilterParams stricter = base;
      stricter.thresholds.tau_depth = 0.6;
      CHECK(subset(compute_occlusion_mask(s.gb, s.observed, s.k, s.pose, stricter).mask, ref));
      stricter = base;
      stricter.thresholds.tau_edge = 3.0;
      CHECK(subset(compute_occlusion_mask(s.gb, s.observed, s.k, s.pose, stricter).mask, ref));
      stricter = base;
      stricter.thresholds.theta_g = 5.0;
      CHECK(subset(compute_occlusion_mask(s.gb, s.observed, s.k, s.pose, stricter).mask, ref));
      stricter = base;
      stricter.thresholds.h_min = 1.0;
      stricter.thresholds.h_max = 1.2;
      CHECK(subset(compute_occlusion_mask(s.gb, s.observed, s.k, s.pose, stricter).mask, ref));
    }
  }
  SUBCASE("static scene gives an empty mask") {
    FrameGBuffer gb = render_gbuffer(s.floor, s.k, s.pose, DepthMap());
    DepthMap d = gb.ref_depth;
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (!std::isfinite(d.data()[i])) d.data()[i] = 0.0f;
    gb.grad_mag = depth_gradient_magnitude(d);
    CHECK(compute_occlusion_mask(gb, d, s.k, s.pose, p).mask.count() == 0);
  }
}

TEST_CASE("filter parameters") {
  FilterParams p;
  CHECK_NOTHROW(p.validate());
  p.thresholds.h_min = 3.0;
  CHECK_THROWS_AS(p.validate(), Error);
  Config cfg;
  cfg.set("filter.theta_g", "25");
  cfg.set("filter.normal_source", "mesh");
  const FilterParams q = FilterParams::from_config(cfg, FilterParams{});
  CHECK(q.thresholds.theta_g == 25.0);
  CHECK(q.normal_source == NormalSource::Mesh);
  cfg.set("filter.normal_source", "sideways");
  CHECK_THROWS_AS(FilterParams::from_config(cfg, FilterParams{}), Error);
}
