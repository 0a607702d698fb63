#pragma once

#include <cstdint>
#include <string>

#include "parkingtwin/types.hpp"

namespace parkingtwin {

using Depth16 = Grid<std::uint16_t>;

// All readers throw Error(Io) when the file cannot be opened and
// Error(Parse) when the PNG stream is corrupt or has an unexpected format.
RgbImage read_png_rgb(const std::string& path);
GrayImage read_png_gray(const std::string& path);
Depth16 read_png_u16(const std::string& path);

void write_png_rgb(const std::string& path, const RgbImage& image);
void write_png_gray(const std::string& path, const GrayImage& image);
void write_png_u16(const std::string& path, const Depth16& image);

// Stored units -> meters; 0 becomes an invalid (0) sample.
DepthMap depth_from_u16(const Depth16& raw, double depth_scale);
// Meters -> stored units, rounded; invalid or out-of-range samples become 0.
Depth16 depth_to_u16(const DepthMap& depth, double depth_scale);

inline DepthMap read_depth_png(const std::string& path, double depth_scale) {
  return depth_from_u16(read_png_u16(path), depth_scale);
}
inline void write_depth_png(const std::string& path, const DepthMap& depth, double depth_scale) {
  write_png_u16(path, depth_to_u16(depth, depth_scale));
}

GrayImage mask_to_gray(const BoolGrid& mask);

}  // namespace parkingtwin
