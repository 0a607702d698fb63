#include "parkingtwin/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "parkingtwin/error.hpp"
#include "parkingtwin/image_io.hpp"

namespace parkingtwin {

namespace fs = std::filesystem;

namespace {

std::string index_list(const std::vector<int>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size() && i < 20; ++i) out << (i ? ", " : "") << v[i];
  if (v.size() > 20) out << ", ... (" << v.size() << " total)";
  return out.str();
}

std::optional<int> png_index(const fs::path& p) {
  if (p.extension() != ".png") return std::nullopt;
  const std::string stem = p.stem().string();
  if (stem.empty() || stem.size() > 9 || !std::all_of(stem.begin(), stem.end(), ::isdigit)) return std::nullopt;
  return std::stoi(stem);
}

}  // namespace

Dataset Dataset::open(const std::string& root, const Pose& world_from_trajectory) {
  Dataset ds;
  ds.root = root;
  const fs::path r(root);
  if (!fs::is_directory(r)) throw Error(ErrorKind::Io, "dataset directory '" + root + "' does not exist");
  for (const char* f : {"map.osm", "intrinsics.txt", "trajectory.txt"}) {
    if (!fs::is_regular_file(r / f)) throw Error(ErrorKind::Io, "dataset is missing " + (r / f).string());
  }
  for (const char* d : {"rgb", "depth"}) {
    if (!fs::is_directory(r / d)) throw Error(ErrorKind::Io, "dataset is missing directory " + (r / d).string());
  }
  ds.map_path = (r / "map.osm").string();
  ds.intrinsics = read_intrinsics((r / "intrinsics.txt").string());
  const auto traj = read_trajectory((r / "trajectory.txt").string());

  std::set<int> rgb_ids;
  for (const auto& e : fs::directory_iterator(r / "rgb")) {
    if (auto i = png_index(e.path())) rgb_ids.insert(*i);
  }
  std::set<int> traj_ids;
  for (const auto& t : traj) {
    if (!traj_ids.insert(t.index).second) {
      throw Error(ErrorKind::Structural, "trajectory lists frame " + std::to_string(t.index) + " twice");
    }
  }
  if (rgb_ids != traj_ids) {
    std::vector<int> only_rgb, only_traj;
    std::set_difference(rgb_ids.begin(), rgb_ids.end(), traj_ids.begin(), traj_ids.end(), std::back_inserter(only_rgb));
    std::set_difference(traj_ids.begin(), traj_ids.end(), rgb_ids.begin(), rgb_ids.end(), std::back_inserter(only_traj));
    std::string msg = "frame count mismatch: " + std::to_string(rgb_ids.size()) + " rgb images vs " +
                      std::to_string(traj_ids.size()) + " trajectory entries";
    if (!only_rgb.empty()) msg += "; rgb without pose: " + index_list(only_rgb);
    if (!only_traj.empty()) msg += "; pose without rgb: " + index_list(only_traj);
    throw Error(ErrorKind::Structural, msg);
  }
  for (const auto& t : traj) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.png", t.index);
    FrameRecord rec;
    rec.index = t.index;
    rec.rgb_path = (r / "rgb" / name).string();
    rec.depth_path = (r / "depth" / name).string();
    rec.pose = world_from_trajectory * t.pose;
    ds.frames.push_back(rec);
  }
  std::sort(ds.frames.begin(), ds.frames.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return ds;
}

std::string Dataset::gt_colors_path() const {
  const fs::path p = fs::path(root) / "gt_colors.ply";
  return fs::is_regular_file(p) ? p.string() : std::string();
}

std::string Dataset::gt_mask_path(int index) const {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.png", index);
  const fs::path p = fs::path(root) / "gt_masks" / name;
  return fs::is_regular_file(p) ? p.string() : std::string();
}

std::optional<CameraFrame> load_frame(const Dataset& ds, const FrameRecord& rec, std::string& warning) {
  const std::string tag = "frame " + std::to_string(rec.index) + ": ";
  if (!fs::is_regular_file(rec.depth_path)) {
    warning = tag + "missing depth " + rec.depth_path;
    return std::nullopt;
  }
  CameraFrame f;
  f.index = rec.index;
  f.pose = rec.pose;
  try {
    f.rgb = read_png_rgb(rec.rgb_path);
    f.depth = read_depth_png(rec.depth_path, ds.intrinsics.depth_scale);
  } catch (const Error& e) {
    warning = tag + e.what();
    return std::nullopt;
  }
  const auto& k = ds.intrinsics;
  if (f.rgb.width != k.width || f.rgb.height != k.height || f.depth.cols() != k.width || f.depth.rows() != k.height) {
    warning = tag + "image size does not match intrinsics";
    return std::nullopt;
  }
  return f;
}

std::optional<CameraFrame> DatasetSource::next() {
  while (pos_ < ds_.frames.size()) {
    std::string warning;
    auto f = load_frame(ds_, ds_.frames[pos_++], warning);
    if (f) return f;
    warnings_.push_back(warning);
    ++skipped_;
  }
  return std::nullopt;
}

std::optional<CameraFrame> MemorySource::next() {
  if (frames_.empty() || pos_ >= frames_.size() * static_cast<std::size_t>(repeat_)) return std::nullopt;
  CameraFrame f = frames_[pos_ % frames_.size()];
  f.index = static_cast<int>(pos_);
  ++pos_;
  return f;
}

}  // namespace parkingtwin
