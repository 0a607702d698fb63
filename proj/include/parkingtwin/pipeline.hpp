#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "parkingtwin/config.hpp"
#include "parkingtwin/dataset.hpp"
#include "parkingtwin/filter.hpp"
#include "parkingtwin/fusion.hpp"
#include "parkingtwin/geometry.hpp"
#include "parkingtwin/osm.hpp"
#include "parkingtwin/seam.hpp"

namespace parkingtwin {

inline constexpr int kReportSchemaVersion = 1;

enum class Preset { None, A, B, C };
enum class RunMode { Offline, Online };

const char* to_string(Preset p);
Preset parse_preset(const std::string& s);

struct PipelineConfig {
  std::string dataset;

  osm::CoordinateMode coordinate_mode = osm::CoordinateMode::Planar;
  Vec2d origin = Vec2d::Zero();
  bool align_axes = true;
  double bin_width_deg = 1.0;

  geometry::GeometryParams geometry;
  bool filter_enabled = true;
  FilterParams filter;
  FusionParams fusion;
  SeamParams seam;

  RunMode mode = RunMode::Offline;
  Preset preset = Preset::None;
  Pose initial_alignment = Pose::Identity();

  std::string output;  // mesh path, empty = no export
  std::string report;  // JSON path, empty = no file
  std::string dump_masks;
  bool debug_constraints = false;
  std::string snapshot_dir;

  int workers = 1;
  int queue_capacity = 4;
  int snapshot_interval = 0;  // online mode, 0 = off
  bool realtime = false;      // online mode: drop frames instead of blocking
  double realtime_fps = 30.0;
  int eval_stride = 10;

  // Reads every group; throws Error(Config) for a preset contradicted by an
  // explicit key.
  static PipelineConfig from_config(const Config& cfg);
  void apply_preset(Preset p);
  void validate() const;
};

// Worker count from PARKINGTWIN_THREADS, else the hardware concurrency.
int default_thread_count();

struct MapGeometry {
  osm::OsmMap map;
  Pose world_from_local = Pose::Identity();  // map alignment lifted to 3D
  geometry::GeometryResult geometry;
  double seconds = 0.0;
};

MapGeometry init_geometry(const std::string& map_path, const PipelineConfig& cfg);

struct SnapshotInfo {
  int frames_merged = 0;
  int last_index = -1;
};

struct RunHooks {
  // Called from the merging thread, in stream order.
  std::function<void(const CameraFrame&, const OcclusionMask*)> on_frame;
  std::function<void(const SnapshotInfo&, const TriangleMesh&)> on_snapshot;
};

struct StreamStats {
  int processed = 0;
  int skipped = 0;
  int dropped = 0;
  std::vector<std::string> warnings;
  double decode_s = 0.0;
  double gbuffer_s = 0.0;
  double mask_s = 0.0;
  double fusion_s = 0.0;
  double wall_s = 0.0;
  double mask_rate_sum = 0.0;
  double mask_rate_max = 0.0;
  int snapshots = 0;
  int peak_in_flight = 0;
  std::size_t accumulator_bytes = 0;
  std::vector<std::uint8_t> seen;  // vertex visible in at least one frame
};

struct StreamResult {
  VertexAccumulator accumulator;
  StreamStats stats;
};

// Staged stream: a reader feeds a bounded queue, workers render the G-buffer
// and mask, one merger accumulates in stream order.
StreamResult run_stream(const PipelineConfig& cfg, const TriangleMesh& mesh, const Intrinsics& k, FrameSource& source,
                        const RunHooks& hooks = {});

struct PipelineResult {
  TriangleMesh mesh;
  VertexAccumulator accumulator;
  StreamStats stats;
  SeamReport seams;
  nlohmann::json report;
};

// Finalize colors, refine seams, export and report from a finished stream.
PipelineResult finish(const PipelineConfig& cfg, TriangleMesh mesh, StreamResult stream);

PipelineResult run_offline(const PipelineConfig& cfg, const RunHooks& hooks = {});
PipelineResult run_online(const PipelineConfig& cfg, const RunHooks& hooks = {});
PipelineResult run(const PipelineConfig& cfg, const RunHooks& hooks = {});

nlohmann::json geometry_report(const geometry::GeometryResult& g);

}  // namespace parkingtwin
