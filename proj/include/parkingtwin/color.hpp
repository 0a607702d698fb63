#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "parkingtwin/types.hpp"

namespace parkingtwin {

// sRGB (D65) <-> CIELAB. Scalar-templated; 8-bit helpers below.
namespace color {

template <typename Scalar>
struct WhitePoint {
  static constexpr Scalar X = Scalar(0.95047);
  static constexpr Scalar Y = Scalar(1.0);
  static constexpr Scalar Z = Scalar(1.08883);
};

template <typename Scalar>
inline Eigen::Matrix<Scalar, 3, 3> rgb_to_xyz_matrix() {
  Eigen::Matrix<Scalar, 3, 3> m;
  m << Scalar(0.4124564), Scalar(0.3575761), Scalar(0.1804375),  //
      Scalar(0.2126729), Scalar(0.7151522), Scalar(0.0721750),   //
      Scalar(0.0193339), Scalar(0.1191920), Scalar(0.9503041);
  return m;
}

template <typename Scalar>
inline const Eigen::Matrix<Scalar, 3, 3>& xyz_to_rgb_matrix() {
  static const Eigen::Matrix<Scalar, 3, 3> inv = rgb_to_xyz_matrix<double>().inverse().template cast<Scalar>();
  return inv;
}

template <typename Scalar>
inline Scalar srgb_to_linear(Scalar c) {
  return c <= Scalar(0.04045) ? c / Scalar(12.92) : std::pow((c + Scalar(0.055)) / Scalar(1.055), Scalar(2.4));
}

template <typename Scalar>
inline Scalar linear_to_srgb(Scalar c) {
  return c <= Scalar(0.0031308) ? c * Scalar(12.92) : Scalar(1.055) * std::pow(c, Scalar(1) / Scalar(2.4)) - Scalar(0.055);
}

template <typename Scalar>
inline Scalar lab_f(Scalar t) {
  constexpr Scalar d = Scalar(6) / Scalar(29);
  return t > d * d * d ? std::cbrt(t) : t / (Scalar(3) * d * d) + Scalar(4) / Scalar(29);
}

template <typename Scalar>
inline Scalar lab_f_inv(Scalar t) {
  constexpr Scalar d = Scalar(6) / Scalar(29);
  return t > d ? t * t * t : Scalar(3) * d * d * (t - Scalar(4) / Scalar(29));
}

// Linear RGB in [0,1] -> Lab.
template <typename Scalar>
inline Vec3<Scalar> linear_rgb_to_lab(const Vec3<Scalar>& lin) {
  const Vec3<Scalar> xyz = rgb_to_xyz_matrix<Scalar>() * lin;
  const Scalar fx = lab_f(xyz.x() / WhitePoint<Scalar>::X);
  const Scalar fy = lab_f(xyz.y() / WhitePoint<Scalar>::Y);
  const Scalar fz = lab_f(xyz.z() / WhitePoint<Scalar>::Z);
  return Vec3<Scalar>(Scalar(116) * fy - Scalar(16), Scalar(500) * (fx - fy), Scalar(200) * (fy - fz));
}

// Lab -> linear RGB, not clamped.
template <typename Scalar>
inline Vec3<Scalar> lab_to_linear_rgb(const Vec3<Scalar>& lab) {
  const Scalar fy = (lab.x() + Scalar(16)) / Scalar(116);
  const Scalar fx = fy + lab.y() / Scalar(500);
  const Scalar fz = fy - lab.z() / Scalar(200);
  const Vec3<Scalar> xyz(WhitePoint<Scalar>::X * lab_f_inv(fx), WhitePoint<Scalar>::Y * lab_f_inv(fy),
                         WhitePoint<Scalar>::Z * lab_f_inv(fz));
  return xyz_to_rgb_matrix<Scalar>() * xyz;
}

// Gamma-encoded sRGB in [0,1] <-> Lab.
template <typename Scalar>
inline Vec3<Scalar> srgb_to_lab(const Vec3<Scalar>& rgb) {
  return linear_rgb_to_lab<Scalar>(rgb.unaryExpr([](Scalar c) { return srgb_to_linear(c); }));
}

template <typename Scalar>
inline Vec3<Scalar> lab_to_srgb(const Vec3<Scalar>& lab) {
  return lab_to_linear_rgb<Scalar>(lab).unaryExpr(
      [](Scalar c) { return linear_to_srgb(std::clamp(c, Scalar(0), Scalar(1))); });
}

}  // namespace color

using Rgb8 = Eigen::Matrix<std::uint8_t, 3, 1>;

inline std::uint8_t to_u8(double c) {
  if (!(c > 0.0)) return 0;  // also maps NaN to 0
  if (c >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::lround(c));
}

// Channels in [0,255] (fractional values allowed, e.g. bilinear samples).
inline Vec3d rgb_to_lab(const Vec3d& rgb255) { return color::srgb_to_lab<double>(rgb255 / 255.0); }
inline Vec3d rgb_to_lab(const Rgb8& rgb) { return rgb_to_lab(Vec3d(rgb.cast<double>())); }

// Out-of-gamut results are clamped per channel.
inline Rgb8 lab_to_rgb(const Vec3d& lab) {
  if (!lab.allFinite()) return Rgb8::Zero();
  const Vec3d s = color::lab_to_srgb<double>(lab) * 255.0;
  return Rgb8(to_u8(s.x()), to_u8(s.y()), to_u8(s.z()));
}

}  // namespace parkingtwin
