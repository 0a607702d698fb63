#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "parkingtwin/camera.hpp"
#include "parkingtwin/osm.hpp"
#include "parkingtwin/types.hpp"

namespace parkingtwin {

struct CameraFrame {
  int index = 0;
  RgbImage rgb;
  DepthMap depth;  // meters, 0 = invalid
  Pose pose = Pose::Identity();
  double quality = 1.0;
};

struct FrameRecord {
  int index = 0;
  std::string rgb_path;
  std::string depth_path;
  Pose pose = Pose::Identity();
};

// Directory layout: map.osm, intrinsics.txt, trajectory.txt, rgb/NNNNNN.png,
// depth/NNNNNN.png. Mandatory files are checked at open time; frames are
// decoded lazily.
struct Dataset {
  std::string root;
  Intrinsics intrinsics;
  std::string map_path;
  std::vector<FrameRecord> frames;  // ascending index

  // `world_from_trajectory` is applied on the left of every trajectory pose.
  static Dataset open(const std::string& root, const Pose& world_from_trajectory = Pose::Identity());

  std::string gt_colors_path() const;  // empty when absent
  std::string gt_mask_path(int index) const;  // empty when absent
};

// Decodes one frame; returns nothing and fills `warning` when a file is
// missing, corrupt, or has the wrong size.
std::optional<CameraFrame> load_frame(const Dataset& ds, const FrameRecord& rec, std::string& warning);

// Pull-based frame stream.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  // Next decodable frame, or nothing at the end. Skipped frames are reported
  // through `warnings()`.
  virtual std::optional<CameraFrame> next() = 0;
  virtual const std::vector<std::string>& warnings() const = 0;
  virtual int skipped() const = 0;
};

class DatasetSource : public FrameSource {
 public:
  explicit DatasetSource(const Dataset& ds) : ds_(ds) {}
  std::optional<CameraFrame> next() override;
  const std::vector<std::string>& warnings() const override { return warnings_; }
  int skipped() const override { return skipped_; }

 private:
  const Dataset& ds_;
  std::size_t pos_ = 0;
  std::vector<std::string> warnings_;
  int skipped_ = 0;
};

// Replays a fixed frame list `repeat` times with increasing indices.
class MemorySource : public FrameSource {
 public:
  MemorySource(std::vector<CameraFrame> frames, int repeat = 1) : frames_(std::move(frames)), repeat_(repeat) {}
  std::optional<CameraFrame> next() override;
  const std::vector<std::string>& warnings() const override { return warnings_; }
  int skipped() const override { return 0; }

 private:
  std::vector<CameraFrame> frames_;
  int repeat_;
  std::size_t pos_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace parkingtwin
