#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace parkingtwin {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Vec3f = Vec3<float>;

// Image-shaped containers are row-major: rows = image height, cols = width.
template <typename T>
using Grid = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using BoolGrid = Grid<bool>;
using FloatGrid = Grid<float>;
using DoubleGrid = Grid<double>;
using IndexGrid = Grid<std::int32_t>;

using DepthMap = FloatGrid;

// N x 3 row-major blocks, one row per vertex / face / pixel.
template <typename Scalar>
using RowVectors3 = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;

using Vertices = RowVectors3<double>;
using Faces = RowVectors3<std::int32_t>;
using ColorsU8 = RowVectors3<std::uint8_t>;

inline constexpr float kInfDepth = std::numeric_limits<float>::infinity();
inline constexpr std::int32_t kNoFace = -1;

// Interleaved 8-bit RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  ColorsU8 pixels;  // height*width rows

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(ColorsU8::Zero(static_cast<Eigen::Index>(w) * h, 3)) {}

  auto pixel(int x, int y) { return pixels.row(static_cast<Eigen::Index>(y) * width + x); }
  auto pixel(int x, int y) const { return pixels.row(static_cast<Eigen::Index>(y) * width + x); }
  bool empty() const { return width == 0 || height == 0; }
};

using GrayImage = Grid<std::uint8_t>;

// Rigid camera-to-world transform.
using Pose = Eigen::Isometry3d;

}  // namespace parkingtwin
