#include "parkingtwin/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "parkingtwin/error.hpp"
#include "parkingtwin/image_io.hpp"
#include "parkingtwin/metrics.hpp"
#include "parkingtwin/raster.hpp"

namespace parkingtwin {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Pose parse_pose(const std::string& key, const std::vector<double>& v) {
  if (v.size() != 7) throw Error(ErrorKind::Config, key + ": expected 'tx ty tz qx qy qz qw'");
  const Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
  if (!(std::abs(q.norm() - 1.0) < 1e-3)) throw Error(ErrorKind::Config, key + ": quaternion is not unit length");
  return make_pose(Vec3d(v[0], v[1], v[2]), q);
}

}  // namespace

const char* to_string(Preset p) {
  switch (p) {
    case Preset::None: return "none";
    case Preset::A: return "A";
    case Preset::B: return "B";
    case Preset::C: return "C";
  }
  return "none";
}

Preset parse_preset(const std::string& s) {
  if (s == "none" || s.empty()) return Preset::None;
  if (s == "A" || s == "a") return Preset::A;
  if (s == "B" || s == "b") return Preset::B;
  if (s == "C" || s == "c") return Preset::C;
  throw Error(ErrorKind::Config, "unknown preset '" + s + "' (expected A, B, C or none)");
}

int default_thread_count() {
  if (const char* env = std::getenv("PARKINGTWIN_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1 || n > 256) {
      throw Error(ErrorKind::Config, std::string("PARKINGTWIN_THREADS must be an integer in [1, 256], got '") + env + "'");
    }
    return static_cast<int>(n);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void PipelineConfig::apply_preset(Preset p) {
  preset = p;
  switch (p) {
    case Preset::None: break;
    case Preset::A:
      filter_enabled = false;
      fusion.space = ColorSpace::Rgb;
      fusion.gradient_weight = false;
      seam.enabled = false;
      break;
    case Preset::B:
      filter_enabled = true;
      fusion.space = ColorSpace::Rgb;
      fusion.gradient_weight = false;
      seam.enabled = false;
      break;
    case Preset::C:
      filter_enabled = true;
      fusion.space = ColorSpace::Lab;
      fusion.gradient_weight = true;
      seam.enabled = true;
      break;
  }
}

PipelineConfig PipelineConfig::from_config(const Config& cfg) {
  PipelineConfig c;
  c.workers = default_thread_count();
  c.dataset = cfg.get_string("pipeline.dataset", c.dataset);

  const std::string mode = cfg.get_string("osm.coordinate_mode", "planar");
  if (mode == "planar") {
    c.coordinate_mode = osm::CoordinateMode::Planar;
  } else if (mode == "geodetic") {
    c.coordinate_mode = osm::CoordinateMode::Geodetic;
  } else {
    throw Error(ErrorKind::Config, "osm.coordinate_mode must be geodetic or planar, got '" + mode + "'");
  }
  const auto origin = cfg.get_doubles("osm.origin", {0.0, 0.0});
  if (origin.size() != 2) throw Error(ErrorKind::Config, "osm.origin needs two values");
  c.origin = Vec2d(origin[0], origin[1]);
  c.align_axes = cfg.get_bool("osm.align", c.align_axes);
  c.bin_width_deg = cfg.get_double("osm.bin_width_deg", c.bin_width_deg);

  auto& g = c.geometry;
  g.voxel_size = cfg.get_double("tsdf.voxel", g.voxel_size);
  g.height = cfg.get_double("tsdf.height", g.height);
  g.tau = cfg.get_double("tsdf.tau", 3.0 * g.voxel_size);
  g.padding = cfg.get_double("tsdf.padding", g.padding);
  g.z_ground = cfg.get_double("tsdf.z_ground", g.z_ground);
  g.wall_thickness = cfg.get_double("tsdf.wall_thickness", g.wall_thickness);
  g.ground = cfg.get_bool("tsdf.ground", g.ground);

  c.apply_preset(parse_preset(cfg.get_string("pipeline.preset", "none")));
  const PipelineConfig preset_view = c;

  c.filter_enabled = cfg.get_bool("filter.enabled", c.filter_enabled);
  c.filter = FilterParams::from_config(cfg, c.filter);
  if (!cfg.has("filter.z_g")) c.filter.thresholds.z_g = g.z_ground;
  c.fusion = FusionParams::from_config(cfg, c.fusion);
  c.seam = SeamParams::from_config(cfg, c.seam);

  if (c.preset != Preset::None) {
    auto conflict = [&](bool bad, const char* what) {
      if (bad) {
        throw Error(ErrorKind::Config, std::string("preset ") + to_string(c.preset) + " conflicts with " + what);
      }
    };
    conflict(c.filter_enabled != preset_view.filter_enabled, "filter.enabled");
    conflict(c.fusion.space != preset_view.fusion.space, "fusion.space");
    conflict(c.fusion.gradient_weight != preset_view.fusion.gradient_weight, "fusion.gradient_weight");
    conflict(c.seam.enabled != preset_view.seam.enabled, "seam.enabled");
  }

  const std::string run_mode = cfg.get_string("pipeline.mode", "offline");
  if (run_mode == "offline") {
    c.mode = RunMode::Offline;
  } else if (run_mode == "online") {
    c.mode = RunMode::Online;
  } else {
    throw Error(ErrorKind::Config, "pipeline.mode must be offline or online, got '" + run_mode + "'");
  }
  if (cfg.has("pipeline.initial_alignment")) {
    c.initial_alignment = parse_pose("pipeline.initial_alignment", cfg.get_doubles("pipeline.initial_alignment", {}));
  }
  c.output = cfg.get_string("pipeline.output", c.output);
  c.report = cfg.get_string("pipeline.report", c.report);
  c.dump_masks = cfg.get_string("pipeline.dump_masks", c.dump_masks);
  c.debug_constraints = cfg.get_bool("pipeline.debug_constraints", c.debug_constraints);
  c.snapshot_dir = cfg.get_string("pipeline.snapshot_dir", c.snapshot_dir);
  c.workers = cfg.get_int("pipeline.workers", c.workers);
  c.queue_capacity = cfg.get_int("pipeline.queue_capacity", c.queue_capacity);
  c.snapshot_interval = cfg.get_int("pipeline.snapshot_interval", c.snapshot_interval);
  c.realtime = cfg.get_bool("pipeline.realtime", c.realtime);
  c.realtime_fps = cfg.get_double("pipeline.realtime_fps", c.realtime_fps);
  c.eval_stride = cfg.get_int("pipeline.eval_stride", c.eval_stride);
  return c;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Config, m); };
  if (!(geometry.voxel_size > 0.0)) fail("tsdf.voxel must be positive");
  if (!(geometry.height > 0.0)) fail("tsdf.height must be positive");
  if (!(geometry.tau > 0.0)) fail("tsdf.tau must be positive");
  if (!(bin_width_deg > 0.0 && bin_width_deg <= 90.0)) fail("osm.bin_width_deg must be in (0, 90]");
  if (workers < 1) fail("pipeline.workers must be >= 1");
  if (queue_capacity < 1) fail("pipeline.queue_capacity must be >= 1");
  if (snapshot_interval < 0) fail("pipeline.snapshot_interval must be >= 0");
  if (!(realtime_fps > 0.0)) fail("pipeline.realtime_fps must be positive");
  if (eval_stride < 1) fail("pipeline.eval_stride must be >= 1");
  filter.validate();
  fusion.validate();
  seam.validate();
}

MapGeometry init_geometry(const std::string& map_path, const PipelineConfig& cfg) {
  const auto t0 = Clock::now();
  MapGeometry mg;
  mg.map = osm::load_osm(map_path);
  if (cfg.coordinate_mode == osm::CoordinateMode::Geodetic) {
    mg.map = osm::project_to_local(mg.map, cfg.coordinate_mode, cfg.origin);
  }
  if (cfg.align_axes && !mg.map.solids().empty()) {
    const double theta = osm::dominant_angle(mg.map, cfg.bin_width_deg);
    mg.map = osm::align_axes(mg.map, theta);
  }
  const Eigen::Isometry2d& a = mg.map.frame.alignment;
  mg.world_from_local.linear().topLeftCorner<2, 2>() = a.linear();
  mg.world_from_local.translation().head<2>() = a.translation();
  mg.geometry = geometry::build_geometry(mg.map, cfg.geometry);
  mg.seconds = seconds_since(t0);
  return mg;
}

namespace {

struct WorkItem {
  int seq = 0;
  CameraFrame frame;
};

struct WorkResult {
  CameraFrame frame;
  FrameGBuffer gbuffer;
  std::optional<OcclusionMask> mask;
  double decode_s = 0.0;
  double gbuffer_s = 0.0;
  double mask_s = 0.0;
};

// Shared state between reader, workers and merger.
struct Channel {
  std::mutex m;
  std::condition_variable cv;
  std::deque<WorkItem> queue;
  std::map<int, WorkResult> done;
  int next_merge = 0;
  int total = -1;  // known once the reader finishes
  bool failed = false;
  std::exception_ptr error;
  int in_flight = 0;
  int peak_in_flight = 0;
};

void write_masks(const PipelineConfig& cfg, const OcclusionMask& m, int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.png", index);
  const fs::path dir(cfg.dump_masks);
  write_png_gray((dir / name).string(), mask_to_gray(m.mask));
  if (!cfg.debug_constraints) return;
  const std::pair<const char*, const BoolGrid*> parts[] = {
      {"normal", &m.normal}, {"height", &m.height}, {"edge", &m.edge}, {"depth", &m.depth}};
  for (const auto& [label, grid] : parts) {
    write_png_gray((dir / label / name).string(), mask_to_gray(*grid));
  }
}

}  // namespace

StreamResult run_stream(const PipelineConfig& cfg, const TriangleMesh& mesh, const Intrinsics& k, FrameSource& source,
                        const RunHooks& hooks) {
  StreamResult out;
  out.accumulator = VertexAccumulator(mesh.vertex_count());
  StreamStats& st = out.stats;
  st.seen.assign(static_cast<std::size_t>(mesh.vertex_count()), 0);
  if (!cfg.dump_masks.empty()) {
    fs::create_directories(cfg.dump_masks);
    if (cfg.debug_constraints) {
      for (const char* d : {"normal", "height", "edge", "depth"}) fs::create_directories(fs::path(cfg.dump_masks) / d);
    }
  }
  if (!cfg.snapshot_dir.empty()) fs::create_directories(cfg.snapshot_dir);

  const int capacity = cfg.queue_capacity;
  const int n_workers = cfg.workers;
  const bool online = cfg.mode == RunMode::Online;
  Channel ch;
  const auto t_start = Clock::now();

  auto fail = [&](std::exception_ptr e) {
    std::lock_guard lk(ch.m);
    if (!ch.failed) {
      ch.failed = true;
      ch.error = e;
    }
    ch.cv.notify_all();
  };

  std::thread reader([&] {
    try {
      int seq = 0;
      const auto period = std::chrono::duration<double>(1.0 / cfg.realtime_fps);
      auto due = Clock::now();
      for (;;) {
        const auto t0 = Clock::now();
        std::optional<CameraFrame> f = source.next();
        const double dt = seconds_since(t0);
        if (!f) break;
        std::unique_lock lk(ch.m);
        if (ch.failed) return;
        if (online && cfg.realtime) {
          lk.unlock();
          due += std::chrono::duration_cast<Clock::duration>(period);
          std::this_thread::sleep_until(due);
          lk.lock();
          if (ch.in_flight >= capacity) {
            ++st.dropped;
            continue;
          }
        } else {
          ch.cv.wait(lk, [&] { return ch.failed || ch.in_flight < capacity; });
          if (ch.failed) return;
        }
        st.decode_s += dt;
        ++ch.in_flight;
        ch.peak_in_flight = std::max(ch.peak_in_flight, ch.in_flight);
        ch.queue.push_back({seq++, std::move(*f)});
        ch.cv.notify_all();
      }
      std::lock_guard lk(ch.m);
      ch.total = seq;
      ch.cv.notify_all();
    } catch (...) {
      fail(std::current_exception());
    }
  });

  auto worker = [&] {
    try {
      for (;;) {
        WorkItem item;
        {
          std::unique_lock lk(ch.m);
          ch.cv.wait(lk, [&] { return ch.failed || !ch.queue.empty() || ch.total >= 0; });
          if (ch.failed) return;
          if (ch.queue.empty()) return;  // reader finished and queue drained
          item = std::move(ch.queue.front());
          ch.queue.pop_front();
        }
        WorkResult r;
        r.frame = std::move(item.frame);
        auto t0 = Clock::now();
        r.frame.quality = quality_score(r.frame.rgb, cfg.fusion.v_ref);
        r.gbuffer = render_gbuffer(mesh, k, r.frame.pose, r.frame.depth);
        r.gbuffer_s = seconds_since(t0);
        if (cfg.filter_enabled) {
          t0 = Clock::now();
          FilterParams fp = cfg.filter;
          fp.full_diagnostics = fp.full_diagnostics || cfg.debug_constraints;
          r.mask = compute_occlusion_mask(r.gbuffer, r.frame.depth, k, r.frame.pose, fp);
          r.mask->frame = r.frame.index;
          if (!cfg.dump_masks.empty()) write_masks(cfg, *r.mask, r.frame.index);
          r.mask_s = seconds_since(t0);
        }
        std::lock_guard lk(ch.m);
        ch.done.emplace(item.seq, std::move(r));
        ch.cv.notify_all();
      }
    } catch (...) {
      fail(std::current_exception());
    }
  };
  std::vector<std::thread> workers;
  for (int i = 0; i < n_workers; ++i) workers.emplace_back(worker);

  // Merger: the only writer to the accumulator.
  std::exception_ptr merge_error;
  try {
    for (;;) {
      WorkResult r;
      {
        std::unique_lock lk(ch.m);
        ch.cv.wait(lk, [&] {
          return ch.failed || ch.done.count(ch.next_merge) || (ch.total >= 0 && ch.next_merge >= ch.total);
        });
        if (ch.failed) break;
        auto it = ch.done.find(ch.next_merge);
        if (it == ch.done.end()) break;
        r = std::move(it->second);
        ch.done.erase(it);
        ++ch.next_merge;
        --ch.in_flight;
        ch.cv.notify_all();
      }
      st.gbuffer_s += r.gbuffer_s;
      st.mask_s += r.mask_s;
      const auto t0 = Clock::now();
      FrameView view;
      view.rgb = &r.frame.rgb;
      view.gbuffer = &r.gbuffer;
      view.mask = r.mask ? &r.mask->mask : nullptr;
      view.k = k;
      view.pose = r.frame.pose;
      view.quality = r.frame.quality;
      observe_frame(out.accumulator, mesh, view, cfg.fusion, &st.seen);
      st.fusion_s += seconds_since(t0);
      ++st.processed;
      if (r.mask) {
        const double rate = r.mask->rate();
        st.mask_rate_sum += rate;
        st.mask_rate_max = std::max(st.mask_rate_max, rate);
      }
      if (hooks.on_frame) hooks.on_frame(r.frame, r.mask ? &*r.mask : nullptr);
      if (online && cfg.snapshot_interval > 0 && st.processed % cfg.snapshot_interval == 0) {
        const VertexAccumulator copy = out.accumulator;
        TriangleMesh preview = mesh;
        finalize_colors(copy, preview, cfg.fusion);
        ++st.snapshots;
        if (!cfg.snapshot_dir.empty()) {
          char name[48];
          std::snprintf(name, sizeof(name), "snapshot_%06d.ply", st.processed);
          write_ply(preview, (fs::path(cfg.snapshot_dir) / name).string());
        }
        if (hooks.on_snapshot) hooks.on_snapshot({st.processed, r.frame.index}, preview);
      }
    }
  } catch (...) {
    merge_error = std::current_exception();
    fail(merge_error);
  }
  reader.join();
  for (auto& w : workers) w.join();
  if (ch.error) std::rethrow_exception(ch.error);

  st.wall_s = seconds_since(t_start);
  st.peak_in_flight = ch.peak_in_flight;
  st.skipped = source.skipped();
  st.warnings = source.warnings();
  st.accumulator_bytes = out.accumulator.memory_bytes();
  return out;
}

nlohmann::json geometry_report(const geometry::GeometryResult& g) {
  const ManifoldReport mr = check_manifold(g.mesh);
  const Eigen::AlignedBox3d b = bounds(g.mesh);
  nlohmann::json j;
  j["vertices"] = g.mesh.vertex_count();
  j["faces"] = g.mesh.face_count();
  if (!g.mesh.empty()) {
    j["bounds"] = {{"min", {b.min().x(), b.min().y(), b.min().z()}}, {"max", {b.max().x(), b.max().y(), b.max().z()}}};
  }
  j["closed"] = mr.closed;
  j["consistently_oriented"] = mr.consistently_oriented;
  j["euler_characteristic"] = mr.euler_characteristic;
  j["volume_dims"] = {g.volume.dims.x(), g.volume.dims.y(), g.volume.dims.z()};
  const auto solid = g.occupancy.solid.count();
  j["solid_cells"] = solid;
  j["seconds"] = {{"rasterize", g.seconds_rasterize}, {"volume", g.seconds_volume}, {"mesh", g.seconds_mesh}};
  return j;
}

PipelineResult finish(const PipelineConfig& cfg, TriangleMesh mesh, StreamResult stream) {
  PipelineResult res;
  auto t0 = Clock::now();
  finalize_colors(stream.accumulator, mesh, cfg.fusion);
  const double finalize_s = seconds_since(t0);
  t0 = Clock::now();
  if (cfg.seam.enabled) res.seams = refine_seams(mesh, cfg.seam);
  const double seam_s = seconds_since(t0);
  t0 = Clock::now();
  if (!cfg.output.empty()) export_mesh(mesh, mesh_format_from_path(cfg.output), cfg.output);
  const double export_s = seconds_since(t0);

  const StreamStats& st = stream.stats;
  nlohmann::json& j = res.report;
  j["schema_version"] = kReportSchemaVersion;
  j["mode"] = cfg.mode == RunMode::Online ? "online" : "offline";
  j["preset"] = to_string(cfg.preset);
  j["dataset"] = cfg.dataset;
  j["frames"] = {{"processed", st.processed},
                 {"skipped", st.skipped},
                 {"dropped", st.dropped},
                 {"warnings", st.warnings}};
  j["timing"] = {{"decode_s", st.decode_s},     {"gbuffer_s", st.gbuffer_s}, {"mask_s", st.mask_s},
                 {"fusion_s", st.fusion_s},     {"stream_wall_s", st.wall_s}, {"finalize_s", finalize_s},
                 {"seam_s", seam_s},            {"export_s", export_s},
                 {"fps", st.wall_s > 0.0 ? st.processed / st.wall_s : 0.0}};
  j["masks"] = {{"enabled", cfg.filter_enabled},
                {"mean_rate", st.processed ? st.mask_rate_sum / st.processed : 0.0},
                {"max_rate", st.mask_rate_max}};

  std::size_t observed = 0, seen = 0, observed_seen = 0;
  std::map<std::string, std::size_t> hist = {{"0", 0}, {"1", 0}, {"2-4", 0}, {"5-9", 0}, {"10-19", 0}, {"20+", 0}};
  for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v) {
    const auto n = stream.accumulator.count(v);
    const bool obs = mesh.observed[static_cast<std::size_t>(v)] != 0;
    const bool vis = st.seen[static_cast<std::size_t>(v)] != 0;
    observed += obs;
    seen += vis;
    observed_seen += obs && vis;
    const char* bucket = n == 0 ? "0" : n == 1 ? "1" : n < 5 ? "2-4" : n < 10 ? "5-9" : n < 20 ? "10-19" : "20+";
    ++hist[bucket];
  }
  const double nv = std::max<double>(1.0, static_cast<double>(mesh.vertex_count()));
  j["observation"] = {{"vertices", mesh.vertex_count()},
                      {"observed", observed},
                      {"observed_fraction", observed / nv},
                      {"visible_vertices", seen},
                      {"observed_of_visible", seen ? double(observed_seen) / double(seen) : 0.0},
                      {"histogram", hist}};
  j["seams"] = {{"enabled", cfg.seam.enabled}, {"before", res.seams.seams_before}, {"after", res.seams.seams_after}};
  j["memory"] = {{"accumulator_bytes", st.accumulator_bytes}, {"peak_frames_in_flight", st.peak_in_flight}};
  j["online"] = {{"snapshots", st.snapshots}, {"realtime", cfg.realtime}};

  res.mesh = std::move(mesh);
  res.accumulator = std::move(stream.accumulator);
  res.stats = stream.stats;
  return res;
}

namespace {

void attach_ground_truth(const PipelineConfig& cfg, const Dataset& ds, PipelineResult& res) {
  const std::string gt_path = ds.gt_colors_path();
  if (gt_path.empty()) return;
  const TriangleMesh gt = import_mesh(gt_path);
  nlohmann::json m;
  if (gt.vertex_count() != res.mesh.vertex_count() || gt.rgb.rows() != gt.vertex_count()) {
    m["warning"] = "gt_colors.ply does not match the reconstructed mesh; metrics skipped";
    res.report["metrics"] = m;
    return;
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (Eigen::Index v = 0; v < gt.vertex_count(); ++v) {
    if (!res.mesh.observed[static_cast<std::size_t>(v)]) continue;
    sum += (res.mesh.rgb.row(v).cast<double>() - gt.rgb.row(v).cast<double>()).cwiseAbs().mean();
    ++n;
  }
  std::vector<Pose> poses;
  for (std::size_t i = 0; i < ds.frames.size(); i += static_cast<std::size_t>(cfg.eval_stride)) {
    poses.push_back(ds.frames[i].pose);
  }
  const ViewEvaluation ev = evaluate_views(res.mesh, res.mesh.rgb, gt.rgb, ds.intrinsics, poses);
  m["vertex_rgb_mae_observed"] = n ? sum / double(n) : 0.0;
  m["eval_views"] = poses.size();
  m["ssim_mean"] = ev.ssim_mean;
  m["psnr_mean"] = ev.psnr_mean;
  m["ssim"] = ev.ssim;
  m["psnr"] = ev.psnr;
  m["protocol"] = "per-vertex colors rendered against ground-truth vertex colors from trajectory poses";
  res.report["metrics"] = m;
}

PipelineResult run_dataset(const PipelineConfig& cfg_in, RunMode mode, const RunHooks& hooks) {
  PipelineConfig cfg = cfg_in;
  cfg.mode = mode;
  cfg.validate();
  if (cfg.dataset.empty()) throw Error(ErrorKind::Config, "pipeline.dataset is not set");
  // Map first: its alignment defines the world frame for the poses.
  const fs::path map_path = fs::path(cfg.dataset) / "map.osm";
  if (!fs::is_regular_file(map_path)) throw Error(ErrorKind::Io, "dataset is missing " + map_path.string());
  MapGeometry mg = init_geometry(map_path.string(), cfg);
  const Dataset ds = Dataset::open(cfg.dataset, mg.world_from_local * cfg.initial_alignment);
  if (mg.geometry.mesh.empty()) throw Error(ErrorKind::Geometry, "blueprint produced an empty mesh");

  DatasetSource source(ds);
  StreamResult stream = run_stream(cfg, mg.geometry.mesh, ds.intrinsics, source, hooks);
  PipelineResult res = finish(cfg, mg.geometry.mesh, std::move(stream));
  res.report["geometry"] = geometry_report(mg.geometry);
  res.report["timing"]["geometry_s"] = mg.seconds;
  res.report["map"] = {{"rotation_deg", mg.map.frame.rotation_rad * 180.0 / 3.14159265358979323846},
                       {"walls", mg.map.count(osm::SemanticClass::Wall)},
                       {"pillars", mg.map.count(osm::SemanticClass::Pillar)}};
  if (res.stats.processed == 0) res.report["frames"]["warnings"].push_back("no frames processed; geometry-only mesh");
  attach_ground_truth(cfg, ds, res);
  if (!cfg.report.empty()) {
    std::ofstream f(cfg.report);
    f << res.report.dump(2) << "\n";
    if (!f) throw Error(ErrorKind::Io, "cannot write report '" + cfg.report + "'");
  }
  return res;
}

}  // namespace

PipelineResult run_offline(const PipelineConfig& cfg, const RunHooks& hooks) {
  return run_dataset(cfg, RunMode::Offline, hooks);
}

PipelineResult run_online(const PipelineConfig& cfg, const RunHooks& hooks) {
  return run_dataset(cfg, RunMode::Online, hooks);
}

PipelineResult run(const PipelineConfig& cfg, const RunHooks& hooks) { return run_dataset(cfg, cfg.mode, hooks); }

}  // namespace parkingtwin
