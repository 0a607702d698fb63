#include "parkingtwin/seam.hpp"

#include <algorithm>
#include <cmath>

#include "parkingtwin/color.hpp"
#include "parkingtwin/error.hpp"

namespace parkingtwin {

void SeamParams::validate() const {
  if (!(tau_seam > 0.0 && sigma_s > 0.0 && sigma_c > 0.0 && z_floor > 0.0) || iterations < 0) {
    throw Error(ErrorKind::Parameter, "seam: thresholds must be positive");
  }
}

SeamParams SeamParams::from_config(const Config& cfg, SeamParams p) {
  p.tau_seam = cfg.get_double("seam.tau", p.tau_seam);
  p.sigma_s = cfg.get_double("seam.sigma_s", p.sigma_s);
  p.sigma_c = cfg.get_double("seam.sigma_c", p.sigma_c);
  p.iterations = cfg.get_int("seam.iterations", p.iterations);
  p.z_floor = cfg.get_double("seam.z_floor", p.z_floor);
  p.enabled = cfg.get_bool("seam.enabled", p.enabled);
  return p;
}

namespace {

bool vertex_observed(const std::vector<std::uint8_t>& observed, Eigen::Index v) {
  return observed.empty() || observed[static_cast<std::size_t>(v)] != 0;
}

FaceColors face_colors_of(const TriangleMesh& mesh, const RowVectors3<double>& colors,
                          const std::vector<std::uint8_t>& observed) {
  FaceColors fc;
  fc.rgb.resize(mesh.face_count(), 3);
  fc.valid.assign(static_cast<std::size_t>(mesh.face_count()), 1);
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    const auto a = mesh.faces(f, 0), b = mesh.faces(f, 1), c = mesh.faces(f, 2);
    fc.rgb.row(f) = (colors.row(a) + colors.row(b) + colors.row(c)) / 3.0;
    if (!vertex_observed(observed, a) || !vertex_observed(observed, b) || !vertex_observed(observed, c)) {
      fc.valid[f] = 0;
    }
  }
  return fc;
}

void require_colors(const TriangleMesh& mesh) {
  if (mesh.rgb.rows() != mesh.vertex_count()) throw Error(ErrorKind::Structural, "seam: mesh has no vertex colors");
  if (mesh.adjacency_offsets.size() != static_cast<std::size_t>(mesh.vertex_count()) + 1) {
    throw Error(ErrorKind::Structural, "seam: mesh adjacency not built");
  }
}

}  // namespace

FaceColors face_colors(const TriangleMesh& mesh) {
  require_colors(mesh);
  return face_colors_of(mesh, mesh.rgb.cast<double>(), mesh.observed);
}

Eigen::VectorXd vertex_color_variance(const TriangleMesh& mesh, const FaceColors& faces) {
  Eigen::VectorXd var = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v) {
    Vec3d sum = Vec3d::Zero();
    int n = 0;
    for (const std::int32_t f : mesh.incident_faces(v)) {
      if (!faces.valid[f]) continue;
      sum += faces.rgb.row(f).transpose();
      ++n;
    }
    if (n < 2) continue;
    const Vec3d mean = sum / n;
    double acc = 0.0;
    for (const std::int32_t f : mesh.incident_faces(v)) {
      if (!faces.valid[f]) continue;
      acc += (faces.rgb.row(f).transpose() - mean).squaredNorm();
    }
    var[v] = acc / n;
  }
  return var;
}

std::vector<std::int32_t> detect_seams(const Eigen::VectorXd& variance, double tau_seam) {
  std::vector<std::int32_t> out;
  for (Eigen::Index v = 0; v < variance.size(); ++v) {
    if (variance[v] > tau_seam) out.push_back(static_cast<std::int32_t>(v));
  }
  return out;
}

RowVectors3<double> bilateral_pass(const TriangleMesh& mesh, const RowVectors3<double>& colors,
                                   const std::vector<std::uint8_t>& observed, const std::vector<std::int32_t>& seams,
                                   const SeamParams& p) {
  const FaceColors fc = face_colors_of(mesh, colors, observed);
  RowVectors3<double> out = colors;
  const double inv_s = 1.0 / (2.0 * p.sigma_s * p.sigma_s);
  const double inv_c = 1.0 / (2.0 * p.sigma_c * p.sigma_c);
  for (const std::int32_t v : seams) {
    const Vec3d pv = mesh.positions.row(v);
    const Vec3d cv = colors.row(v);
    Vec3d num = Vec3d::Zero();
    double z = 0.0;
    for (const std::int32_t f : mesh.incident_faces(v)) {
      if (!fc.valid[f]) continue;
      const Vec3d cf = fc.rgb.row(f);
      const double ds2 = (pv - mesh.face_barycenter(f)).squaredNorm();
      const double dc2 = (cv - cf).squaredNorm();
      const double w = std::exp(-ds2 * inv_s - dc2 * inv_c);
      num += w * cf;
      z += w;
    }
    if (z < p.z_floor) continue;
    out.row(v) = (num / z).cwiseMax(0.0).cwiseMin(255.0).transpose();
  }
  return out;
}

SeamReport refine_seams(TriangleMesh& mesh, const SeamParams& p) {
  require_colors(mesh);
  SeamReport rep;
  RowVectors3<double> colors = mesh.rgb.cast<double>();
  rep.seams_before = detect_seams(vertex_color_variance(mesh, face_colors(mesh)), p.tau_seam).size();
  for (int it = 0; it < p.iterations; ++it) {
    const FaceColors fc = face_colors_of(mesh, colors, mesh.observed);
    const auto seams = detect_seams(vertex_color_variance(mesh, fc), p.tau_seam);
    if (seams.empty()) break;
    colors = bilateral_pass(mesh, colors, mesh.observed, seams, p);
    ++rep.passes;
  }
  for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v) {
    mesh.rgb.row(v) = Rgb8(to_u8(colors(v, 0)), to_u8(colors(v, 1)), to_u8(colors(v, 2))).transpose();
  }
  const FaceColors after = face_colors(mesh);
  rep.seams_after = detect_seams(vertex_color_variance(mesh, after), p.tau_seam).size();
  return rep;
}

}  // namespace parkingtwin
