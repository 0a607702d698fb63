#include "parkingtwin/camera.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "parkingtwin/error.hpp"

namespace parkingtwin {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorKind::Parameter, "intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorKind::Parameter, "intrinsics: image size must be positive");
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
    throw Error(ErrorKind::Parameter, "intrinsics: principal point must lie inside the image");
  }
  if (!(depth_scale > 0.0)) throw Error(ErrorKind::Parameter, "intrinsics: depth_scale must be positive");
}

Intrinsics Intrinsics::from_fov(int width, int height, double hfov_deg) {
  Intrinsics k;
  k.width = width;
  k.height = height;
  k.fx = k.fy = 0.5 * width / std::tan(0.5 * hfov_deg * std::numbers::pi / 180.0);
  k.cx = 0.5 * (width - 1);
  k.cy = 0.5 * (height - 1);
  return k;
}

Intrinsics parse_intrinsics(const std::string& text) {
  std::map<std::string, double> kv;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Parse, "intrinsics: expected key=value, got '" + tok + "'");
    std::string key = tok.substr(0, eq);
    std::string value = tok.substr(eq + 1);
    if (value.empty() && !(in >> value)) throw Error(ErrorKind::Parse, "intrinsics: missing value for '" + key + "'");
    try {
      std::size_t pos = 0;
      kv[key] = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, "intrinsics: value for '" + key + "' is not a number");
    }
  }
  auto need = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::Parse, std::string("intrinsics: missing '") + key + "'");
    return it->second;
  };
  Intrinsics k;
  k.fx = need("fx");
  k.fy = need("fy");
  k.cx = need("cx");
  k.cy = need("cy");
  auto need_size = [&](const char* key) {
    const double v = need(key);
    if (!(v >= 1.0 && v <= 32768.0) || v != std::floor(v)) {
      throw Error(ErrorKind::Parse, std::string("intrinsics: '") + key + "' must be a positive integer");
    }
    return static_cast<int>(v);
  };
  k.width = need_size("width");
  k.height = need_size("height");
  if (kv.count("depth_scale")) k.depth_scale = kv["depth_scale"];
  k.validate();
  return k;
}

Intrinsics read_intrinsics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open intrinsics file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_intrinsics(buf.str());
}

std::string format_intrinsics(const Intrinsics& k) {
  std::ostringstream out;
  out << std::setprecision(17) << "fx=" << k.fx << " fy=" << k.fy << " cx=" << k.cx << " cy=" << k.cy
      << " width=" << k.width << " height=" << k.height << " depth_scale=" << k.depth_scale << "\n";
  return out.str();
}

Pose make_pose(const Vec3d& translation, const Eigen::Quaterniond& rotation) {
  Pose pose = Pose::Identity();
  pose.linear() = rotation.normalized().toRotationMatrix();
  pose.translation() = translation;
  return pose;
}

Pose look_at(const Vec3d& eye, const Vec3d& target, const Vec3d& up) {
  const Vec3d z = (target - eye).normalized();
  Vec3d x = z.cross(up);
  if (x.norm() < 1e-9) x = z.cross(Vec3d::UnitY());
  x.normalize();
  const Vec3d y = z.cross(x);
  Pose pose = Pose::Identity();
  pose.linear().col(0) = x;
  pose.linear().col(1) = y;
  pose.linear().col(2) = z;
  pose.translation() = eye;
  return pose;
}

void validate_pose(const Pose& pose) {
  const Eigen::Matrix3d r = pose.linear();
  if (!(r.transpose() * r).isApprox(Eigen::Matrix3d::Identity(), 1e-6) || std::abs(r.determinant() - 1.0) > 1e-6) {
    throw Error(ErrorKind::Parameter, "pose rotation is not orthonormal");
  }
  if (!pose.translation().allFinite()) throw Error(ErrorKind::Parameter, "pose translation is not finite");
}

std::vector<TrajectoryEntry> parse_trajectory(const std::string& text) {
  std::vector<TrajectoryEntry> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long long index;
    double tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> index >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw Error(ErrorKind::Parse, "trajectory line " + std::to_string(line_no) +
                                        ": expected 'index tx ty tz qx qy qz qw'");
    }
    std::string extra;
    if (ls >> extra) throw Error(ErrorKind::Parse, "trajectory line " + std::to_string(line_no) + ": trailing data");
    const Eigen::Quaterniond q(qw, qx, qy, qz);
    const Vec3d t(tx, ty, tz);
    if (!t.allFinite() || !q.coeffs().allFinite() || std::abs(q.norm() - 1.0) > 1e-3) {
      throw Error(ErrorKind::Parse, "trajectory line " + std::to_string(line_no) + ": invalid pose");
    }
    if (index < 0 || index > 100000000) {
      throw Error(ErrorKind::Parse, "trajectory line " + std::to_string(line_no) + ": frame index out of range");
    }
    out.push_back({static_cast<int>(index), make_pose(t, q)});
  }
  return out;
}

std::vector<TrajectoryEntry> read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open trajectory file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trajectory(buf.str());
}

std::string format_trajectory(const std::vector<TrajectoryEntry>& entries) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& e : entries) {
    const Eigen::Quaterniond q(e.pose.linear());
    const Vec3d t = e.pose.translation();
    out << e.index << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z()
        << ' ' << q.w() << '\n';
  }
  return out.str();
}

std::optional<PixelProjection> project(const Intrinsics& k, const Pose& camera_to_world, const Vec3d& world) {
  const Vec3d p = camera_to_world.linear().transpose() * (world - camera_to_world.translation());
  if (p.z() <= 0.0) return std::nullopt;
  const Vec2d u(k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy);
  if (!pixel_in_frame(k, u)) return std::nullopt;
  return PixelProjection{u, p.z()};
}

Vec3d back_project(const Intrinsics& k, const Pose& camera_to_world, const Vec2d& pixel, double depth) {
  if (!(depth > 0.0)) throw Error(ErrorKind::Domain, "back-projection needs a positive depth");
  const Vec3d p((pixel.x() - k.cx) * depth / k.fx, (pixel.y() - k.cy) * depth / k.fy, depth);
  return camera_to_world * p;
}

}  // namespace parkingtwin
