#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

#include "CLI11.hpp"
#include "json.hpp"
#include "parkingtwin/error.hpp"
#include "parkingtwin/image_io.hpp"
#include "parkingtwin/metrics.hpp"
#include "parkingtwin/pipeline.hpp"
#include "parkingtwin/synth.hpp"

namespace fs = std::filesystem;
using namespace parkingtwin;

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
};

Config build_config(const Common& c, const std::vector<std::pair<std::string, std::string>>& flags) {
  Config cfg = c.config_file.empty() ? Config() : Config::load(c.config_file);
  for (const auto& [k, v] : flags) cfg.set(k, v);
  for (const auto& s : c.overrides) cfg.set(s);
  return cfg;
}

void emit_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(path);
  f << j.dump(2) << "\n";
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
}

int cmd_init_geometry(const Common& c, const std::string& map, double voxel, double height, const std::string& out,
                      const std::string& report) {
  std::vector<std::pair<std::string, std::string>> flags;
  if (voxel > 0.0) flags.emplace_back("tsdf.voxel", std::to_string(voxel));
  if (height > 0.0) flags.emplace_back("tsdf.height", std::to_string(height));
  const Config cfg = build_config(c, flags);
  PipelineConfig pc = PipelineConfig::from_config(cfg);
  if (!cfg.has("tsdf.tau")) pc.geometry.tau = 3.0 * pc.geometry.voxel_size;
  pc.validate();
  const MapGeometry mg = init_geometry(map, pc);
  if (mg.geometry.mesh.empty()) throw Error(ErrorKind::Geometry, "blueprint produced an empty mesh");
  if (!out.empty()) export_mesh(mg.geometry.mesh, mesh_format_from_path(out), out);
  nlohmann::json j = geometry_report(mg.geometry);
  j["schema_version"] = kReportSchemaVersion;
  j["map"] = map;
  j["output"] = out;
  j["wall_clock_s"] = mg.seconds;
  j["rotation_deg"] = mg.map.frame.rotation_rad * 180.0 / 3.14159265358979323846;
  emit_json(j, report);
  return 0;
}

int cmd_reconstruct(const Common& c, const std::vector<std::pair<std::string, std::string>>& flags) {
  const Config cfg = build_config(c, flags);
  const PipelineConfig pc = PipelineConfig::from_config(cfg);
  RunHooks hooks;
  if (pc.mode == RunMode::Online) {
    hooks.on_snapshot = [](const SnapshotInfo& s, const TriangleMesh&) {
      std::cerr << "snapshot after " << s.frames_merged << " frames (last index " << s.last_index << ")\n";
    };
  }
  const PipelineResult res = run(pc, hooks);
  for (const auto& w : res.stats.warnings) std::cerr << "warning: " << w << "\n";
  if (res.stats.processed == 0) std::cerr << "warning: no frames processed; exported geometry-only mesh\n";
  if (pc.report.empty()) std::cout << res.report.dump(2) << "\n";
  return 0;
}

int cmd_synth(const Common& c, const std::string& spec, const std::string& out) {
  Config cfg = build_config(c, {});
  if (!spec.empty()) {
    const Config s = Config::load(spec);
    for (const auto& [k, v] : s.values()) {
      if (!cfg.has(k)) cfg.set(k, v);
    }
  }
  const synth::SceneSpec scene = synth::SceneSpec::from_config(cfg);
  const auto summary = synth::synth_dataset(scene, out, default_thread_count());
  nlohmann::json j = {{"frames", summary.frames},
                      {"vehicle_pixels", summary.vehicle_pixels},
                      {"total_pixels", summary.total_pixels},
                      {"output", out}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

std::vector<fs::path> png_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json summarize(nlohmann::json per_frame, const std::vector<double>& s, const std::vector<double>& p) {
  auto mean = [](const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / double(v.size());
  };
  return {{"schema_version", kReportSchemaVersion},
          {"frames", per_frame},
          {"count", s.size()},
          {"ssim_mean", mean(s)},
          {"psnr_mean", mean(p)},
          {"psnr_cap", kPsnrCap}};
}

int cmd_eval_images(const std::string& pred, const std::string& gt, const std::string& report) {
  const auto gts = png_files(gt);
  nlohmann::json frames = nlohmann::json::array();
  std::vector<double> s, p;
  for (const auto& g : gts) {
    const fs::path pp = fs::path(pred) / g.filename();
    if (!fs::exists(pp)) throw Error(ErrorKind::Structural, "prediction missing for " + g.filename().string());
    const RgbImage a = read_png_rgb(pp.string());
    const RgbImage b = read_png_rgb(g.string());
    if (a.width != b.width || a.height != b.height) {
      throw Error(ErrorKind::Structural, "size mismatch for " + g.filename().string());
    }
    s.push_back(ssim(a, b));
    p.push_back(psnr(a, b));
    frames.push_back({{"frame", g.filename().string()}, {"ssim", s.back()}, {"psnr", p.back()}});
  }
  if (gts.empty()) throw Error(ErrorKind::Structural, "no PNG files in " + gt);
  nlohmann::json j = summarize(frames, s, p);
  j["protocol"] = "image pairs matched by file name";
  emit_json(j, report);
  return 0;
}

int cmd_eval_mesh(const std::string& mesh_path, const std::string& dataset, int stride, const std::string& renders,
                  const std::string& report) {
  const TriangleMesh mesh = import_mesh(mesh_path);
  const Dataset ds = Dataset::open(dataset);
  if (ds.gt_colors_path().empty()) throw Error(ErrorKind::Io, "dataset has no gt_colors.ply");
  const TriangleMesh gt = import_mesh(ds.gt_colors_path());
  if (gt.vertex_count() != mesh.vertex_count()) {
    throw Error(ErrorKind::Structural, "mesh and ground truth have different vertex counts");
  }
  std::vector<Pose> poses;
  std::vector<int> idx;
  for (std::size_t i = 0; i < ds.frames.size(); i += static_cast<std::size_t>(stride)) {
    poses.push_back(ds.frames[i].pose);
    idx.push_back(ds.frames[i].index);
  }
  const ViewEvaluation ev = evaluate_views(mesh, mesh.rgb, gt.rgb, ds.intrinsics, poses);
  if (!renders.empty()) {
    for (const char* sub : {"pred", "gt"}) fs::create_directories(fs::path(renders) / sub);
    for (std::size_t i = 0; i < poses.size(); ++i) {
      const std::string name = synth::frame_name(idx[i]);
      write_png_rgb((fs::path(renders) / "pred" / name).string(),
                    render_vertex_colors(mesh, mesh.rgb, ds.intrinsics, poses[i]));
      write_png_rgb((fs::path(renders) / "gt" / name).string(),
                    render_vertex_colors(mesh, gt.rgb, ds.intrinsics, poses[i]));
    }
  }
  nlohmann::json frames = nlohmann::json::array();
  for (std::size_t i = 0; i < poses.size(); ++i) {
    frames.push_back({{"frame", idx[i]}, {"ssim", ev.ssim[i]}, {"psnr", ev.psnr[i]}});
  }
  nlohmann::json j = summarize(frames, ev.ssim, ev.psnr);
  j["protocol"] = "mesh vertex colors rendered against ground-truth vertex colors from trajectory poses";
  emit_json(j, report);
  return 0;
}

int cmd_export(const std::string& in, const std::string& out) {
  const TriangleMesh mesh = import_mesh(in);
  export_mesh(mesh, mesh_format_from_path(out), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blueprint-prior parking lot reconstruction"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_file, "key=value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", common.overrides, "override, group.key=value")->allow_extra_args(false);
  };

  auto* init = app.add_subcommand("init-geometry", "build the static mesh from an OSM blueprint");
  std::string map, out, report;
  double voxel = 0.0, height = 0.0;
  init->add_option("--map", map, "OSM XML blueprint")->required();
  init->add_option("--voxel", voxel, "voxel size in meters");
  init->add_option("--height", height, "extrusion height in meters");
  init->add_option("--out", out, "mesh output (.ply or .obj)");
  init->add_option("--report", report, "geometry report JSON (default stdout)");
  add_common(init);

  auto* rec = app.add_subcommand("reconstruct", "fuse a dataset onto the blueprint mesh");
  std::string dataset, preset, mode, dump_masks, snapshot_dir;
  int snapshot_interval = -1;
  bool debug_constraints = false, realtime = false;
  rec->add_option("--dataset", dataset, "dataset directory");
  rec->add_option("--out", out, "textured mesh output (.ply or .obj)");
  rec->add_option("--report", report, "run report JSON (default stdout)");
  rec->add_option("--preset", preset, "ablation preset A, B, C or none");
  rec->add_option("--mode", mode, "offline or online");
  rec->add_option("--dump-masks", dump_masks, "write per-frame occlusion masks here");
  rec->add_flag("--debug-constraints", debug_constraints, "also write per-constraint masks");
  rec->add_flag("--realtime", realtime, "online mode: drop frames when the queue is full");
  rec->add_option("--snapshot-dir", snapshot_dir, "online mode: preview meshes");
  rec->add_option("--snapshot-interval", snapshot_interval, "online mode: frames between previews");
  add_common(rec);

  auto* syn = app.add_subcommand("synth", "generate the synthetic benchmark dataset");
  std::string spec;
  syn->add_option("--spec", spec, "scene config (synth.* keys)")->check(CLI::ExistingFile);
  syn->add_option("--out", out, "output directory")->required();
  add_common(syn);

  auto* ev = app.add_subcommand("eval", "PSNR/SSIM between renders and ground truth");
  std::string pred, gt, mesh_path, renders;
  int stride = 10;
  ev->add_option("--pred", pred, "directory of predicted PNG renders");
  ev->add_option("--gt", gt, "directory of ground-truth PNG renders");
  ev->add_option("--mesh", mesh_path, "reconstructed mesh, evaluated against the dataset ground truth");
  ev->add_option("--dataset", dataset, "dataset with gt_colors.ply");
  ev->add_option("--stride", stride, "evaluate every n-th pose")->check(CLI::PositiveNumber);
  ev->add_option("--write-renders", renders, "with --mesh: also write pred/ and gt/ PNG renders here");
  ev->add_option("--report", report, "metrics JSON (default stdout)");

  auto* exp = app.add_subcommand("export", "convert a mesh between PLY and OBJ");
  std::string in;
  exp->add_option("--mesh", in, "input mesh")->required();
  exp->add_option("--out", out, "output mesh")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*init) return cmd_init_geometry(common, map, voxel, height, out, report);
    if (*rec) {
      std::vector<std::pair<std::string, std::string>> flags;
      if (!dataset.empty()) flags.emplace_back("pipeline.dataset", dataset);
      if (!out.empty()) flags.emplace_back("pipeline.output", out);
      if (!report.empty()) flags.emplace_back("pipeline.report", report);
      if (!preset.empty()) flags.emplace_back("pipeline.preset", preset);
      if (!mode.empty()) flags.emplace_back("pipeline.mode", mode);
      if (!dump_masks.empty()) flags.emplace_back("pipeline.dump_masks", dump_masks);
      if (debug_constraints) flags.emplace_back("pipeline.debug_constraints", "true");
      if (realtime) flags.emplace_back("pipeline.realtime", "true");
      if (!snapshot_dir.empty()) flags.emplace_back("pipeline.snapshot_dir", snapshot_dir);
      if (snapshot_interval >= 0) flags.emplace_back("pipeline.snapshot_interval", std::to_string(snapshot_interval));
      return cmd_reconstruct(common, flags);
    }
    if (*syn) return cmd_synth(common, spec, out);
    if (*ev) {
      if (!mesh_path.empty()) {
        if (dataset.empty()) throw Error(ErrorKind::Config, "--mesh needs --dataset");
        return cmd_eval_mesh(mesh_path, dataset, stride, renders, report);
      }
      if (pred.empty() || gt.empty()) throw Error(ErrorKind::Config, "eval needs --pred and --gt, or --mesh and --dataset");
      return cmd_eval_images(pred, gt, report);
    }
    if (*exp) return cmd_export(in, out);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return is_input_error(e.kind()) ? 1 : 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [io]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
