#include "parkingtwin/mesh.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

#include "parkingtwin/error.hpp"

namespace parkingtwin {

static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");

void TriangleMesh::build_adjacency() {
  const Eigen::Index nv = vertex_count();
  adjacency_offsets.assign(nv + 1, 0);
  for (Eigen::Index f = 0; f < face_count(); ++f) {
    for (int c = 0; c < 3; ++c) ++adjacency_offsets[faces(f, c) + 1];
  }
  for (Eigen::Index v = 0; v < nv; ++v) adjacency_offsets[v + 1] += adjacency_offsets[v];
  adjacency_faces.assign(adjacency_offsets.back(), 0);
  std::vector<std::int32_t> cursor(adjacency_offsets.begin(), adjacency_offsets.end() - 1);
  for (Eigen::Index f = 0; f < face_count(); ++f) {
    for (int c = 0; c < 3; ++c) adjacency_faces[cursor[faces(f, c)]++] = static_cast<std::int32_t>(f);
  }
}

void TriangleMesh::compute_normals() {
  normals = Vertices::Zero(vertex_count(), 3);
  for (Eigen::Index f = 0; f < face_count(); ++f) {
    const Vec3d a = positions.row(faces(f, 0));
    const Vec3d b = positions.row(faces(f, 1));
    const Vec3d c = positions.row(faces(f, 2));
    const Vec3d n = (b - a).cross(c - a);  // length = 2 * area
    for (int k = 0; k < 3; ++k) normals.row(faces(f, k)) += n.transpose();
  }
  for (Eigen::Index v = 0; v < vertex_count(); ++v) {
    const double len = normals.row(v).norm();
    if (len > 0.0) {
      normals.row(v) /= len;
    } else {
      normals.row(v) << 0.0, 0.0, 1.0;
    }
  }
}

void TriangleMesh::reset_colors(const Vec3d& lab_fill) {
  lab = lab_fill.transpose().replicate(vertex_count(), 1);
  rgb = ColorsU8::Constant(vertex_count(), 3, 128);
  observed.assign(vertex_count(), 0);
}

std::string validate(const TriangleMesh& mesh) {
  const Eigen::Index nv = mesh.vertex_count();
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    for (int c = 0; c < 3; ++c) {
      if (mesh.faces(f, c) < 0 || mesh.faces(f, c) >= nv) {
        return "face " + std::to_string(f) + " has out-of-range index";
      }
    }
  }
  if (mesh.normals.rows() != nv) return "normal count does not match vertex count";
  for (Eigen::Index v = 0; v < nv; ++v) {
    if (std::abs(mesh.normals.row(v).norm() - 1.0) > 1e-6) return "normal " + std::to_string(v) + " is not unit length";
  }
  if (!mesh.adjacency_offsets.empty()) {
    if (static_cast<Eigen::Index>(mesh.adjacency_offsets.size()) != nv + 1) return "adjacency size mismatch";
    std::size_t total = 0;
    for (Eigen::Index v = 0; v < nv; ++v) {
      for (std::int32_t f : mesh.incident_faces(v)) {
        if (f < 0 || f >= mesh.face_count()) return "adjacency references missing face";
        if (mesh.faces(f, 0) != v && mesh.faces(f, 1) != v && mesh.faces(f, 2) != v) {
          return "adjacency of vertex " + std::to_string(v) + " lists a non-incident face";
        }
        ++total;
      }
    }
    if (total != static_cast<std::size_t>(3 * mesh.face_count())) return "adjacency does not cover all face corners";
  }
  if (mesh.rgb.rows() != 0 && mesh.rgb.rows() != nv) return "rgb color count does not match vertex count";
  if (mesh.lab.rows() != 0 && mesh.lab.rows() != nv) return "lab color count does not match vertex count";
  return {};
}

namespace {

std::uint64_t edge_key(std::int32_t a, std::int32_t b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

ManifoldReport check_manifold(const TriangleMesh& mesh) {
  ManifoldReport r;
  // directed edge -> count, undirected -> count
  std::unordered_map<std::uint64_t, int> undirected;
  std::unordered_map<std::uint64_t, int> directed;
  undirected.reserve(mesh.face_count() * 3);
  directed.reserve(mesh.face_count() * 3);
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    for (int c = 0; c < 3; ++c) {
      const std::int32_t a = mesh.faces(f, c);
      const std::int32_t b = mesh.faces(f, (c + 1) % 3);
      ++undirected[edge_key(std::min(a, b), std::max(a, b))];
      ++directed[edge_key(a, b)];
    }
  }
  r.edges = undirected.size();
  for (const auto& [key, n] : undirected) {
    if (n == 1) ++r.boundary_edges;
    if (n > 2) ++r.nonmanifold_edges;
  }
  r.closed = r.boundary_edges == 0 && r.nonmanifold_edges == 0;
  r.consistently_oriented = std::all_of(directed.begin(), directed.end(), [](const auto& kv) { return kv.second == 1; });
  r.euler_characteristic = static_cast<long>(mesh.vertex_count()) - static_cast<long>(r.edges) +
                           static_cast<long>(mesh.face_count());
  return r;
}

double surface_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    const Vec3d a = mesh.positions.row(mesh.faces(f, 0));
    const Vec3d b = mesh.positions.row(mesh.faces(f, 1));
    const Vec3d c = mesh.positions.row(mesh.faces(f, 2));
    area += 0.5 * (b - a).cross(c - a).norm();
  }
  return area;
}

Eigen::AlignedBox3d bounds(const TriangleMesh& mesh) {
  Eigen::AlignedBox3d box;
  for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v) box.extend(Vec3d(mesh.positions.row(v)));
  return box;
}

void weld_vertices(TriangleMesh& mesh, double tolerance) {
  if (mesh.vertex_count() == 0) return;
  struct Key {
    std::int64_t x, y, z;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<std::int64_t>()(k.x * 73856093LL ^ k.y * 19349663LL ^ k.z * 83492791LL);
    }
  };
  std::unordered_map<Key, std::int32_t, KeyHash> cells;
  std::vector<std::int32_t> remap(mesh.vertex_count());
  std::vector<Eigen::Index> kept;
  for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3d p = mesh.positions.row(v);
    const Key base{std::llround(p.x() / tolerance), std::llround(p.y() / tolerance), std::llround(p.z() / tolerance)};
    std::int32_t found = -1;
    for (int dx = -1; dx <= 1 && found < 0; ++dx) {
      for (int dy = -1; dy <= 1 && found < 0; ++dy) {
        for (int dz = -1; dz <= 1 && found < 0; ++dz) {
          const auto it = cells.find(Key{base.x + dx, base.y + dy, base.z + dz});
          if (it != cells.end() && (Vec3d(mesh.positions.row(kept[it->second])) - p).norm() <= tolerance) {
            found = it->second;
          }
        }
      }
    }
    if (found < 0) {
      found = static_cast<std::int32_t>(kept.size());
      kept.push_back(v);
      cells.emplace(base, found);
    }
    remap[v] = found;
  }
  if (static_cast<Eigen::Index>(kept.size()) == mesh.vertex_count()) return;

  auto gather = [&](auto& rows) {
    if (rows.rows() != mesh.vertex_count()) return;
    std::remove_reference_t<decltype(rows)> out(kept.size(), rows.cols());
    for (std::size_t i = 0; i < kept.size(); ++i) out.row(i) = rows.row(kept[i]);
    rows = std::move(out);
  };
  const Eigen::Index old_count = mesh.vertex_count();
  gather(mesh.normals);
  gather(mesh.lab);
  gather(mesh.rgb);
  if (static_cast<Eigen::Index>(mesh.observed.size()) == old_count) {
    std::vector<std::uint8_t> obs(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) obs[i] = mesh.observed[kept[i]];
    mesh.observed = std::move(obs);
  }
  gather(mesh.positions);

  std::vector<Eigen::Index> faces_kept;
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    const auto a = remap[mesh.faces(f, 0)], b = remap[mesh.faces(f, 1)], c = remap[mesh.faces(f, 2)];
    if (a != b && b != c && a != c) faces_kept.push_back(f);
  }
  Faces faces(faces_kept.size(), 3);
  for (std::size_t i = 0; i < faces_kept.size(); ++i) {
    for (int c = 0; c < 3; ++c) faces(i, c) = remap[mesh.faces(faces_kept[i], c)];
  }
  mesh.faces = std::move(faces);
  if (!mesh.adjacency_offsets.empty()) mesh.build_adjacency();
}

TriangleMesh concatenate(const std::vector<const TriangleMesh*>& parts) {
  TriangleMesh out;
  Eigen::Index nv = 0, nf = 0;
  bool colors = !parts.empty();
  for (const auto* p : parts) {
    nv += p->vertex_count();
    nf += p->face_count();
    colors = colors && p->rgb.rows() == p->vertex_count();
  }
  out.positions.resize(nv, 3);
  out.normals.resize(nv, 3);
  out.faces.resize(nf, 3);
  if (colors) out.rgb.resize(nv, 3);
  Eigen::Index vo = 0, fo = 0;
  for (const auto* p : parts) {
    out.positions.middleRows(vo, p->vertex_count()) = p->positions;
    if (p->normals.rows() == p->vertex_count()) {
      out.normals.middleRows(vo, p->vertex_count()) = p->normals;
    } else {
      out.normals.middleRows(vo, p->vertex_count()).setZero();
    }
    if (colors) out.rgb.middleRows(vo, p->vertex_count()) = p->rgb;
    out.faces.middleRows(fo, p->face_count()) = p->faces.array() + static_cast<std::int32_t>(vo);
    vo += p->vertex_count();
    fo += p->face_count();
  }
  return out;
}

MeshFormat mesh_format_from_path(const std::string& path) {
  auto ends_with = [&](const char* ext) {
    const std::size_t n = std::strlen(ext);
    if (path.size() < n) return false;
    std::string tail = path.substr(path.size() - n);
    std::transform(tail.begin(), tail.end(), tail.begin(), [](unsigned char c) { return std::tolower(c); });
    return tail == ext;
  };
  if (ends_with(".ply")) return MeshFormat::Ply;
  if (ends_with(".obj")) return MeshFormat::Obj;
  throw Error(ErrorKind::Parameter, "cannot infer mesh format from '" + path + "' (expected .ply or .obj)");
}

void export_mesh(const TriangleMesh& mesh, MeshFormat format, const std::string& path) {
  if (format == MeshFormat::Ply) {
    write_ply(mesh, path);
  } else {
    write_obj(mesh, path);
  }
}

TriangleMesh import_mesh(const std::string& path) {
  return mesh_format_from_path(path) == MeshFormat::Ply ? read_ply(path) : read_obj(path);
}

namespace {

ColorsU8 colors_or_gray(const TriangleMesh& mesh) {
  if (mesh.rgb.rows() == mesh.vertex_count()) return mesh.rgb;
  return ColorsU8::Constant(mesh.vertex_count(), 3, 128);
}

Vertices normals_or_up(const TriangleMesh& mesh) {
  if (mesh.normals.rows() == mesh.vertex_count()) return mesh.normals;
  Vertices n = Vertices::Zero(mesh.vertex_count(), 3);
  n.col(2).setOnes();
  return n;
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

void write_ply(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write mesh file '" + path + "'");
  out << "ply\nformat binary_little_endian 1.0\ncomment parkingtwin mesh\n"
      << "element vertex " << mesh.vertex_count() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "property double nx\nproperty double ny\nproperty double nz\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "element face " << mesh.face_count() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  const ColorsU8 rgb = colors_or_gray(mesh);
  const Vertices normals = normals_or_up(mesh);
  for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v) {
    for (int c = 0; c < 3; ++c) put(out, mesh.positions(v, c));
    for (int c = 0; c < 3; ++c) put(out, normals(v, c));
    for (int c = 0; c < 3; ++c) put(out, rgb(v, c));
  }
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    put<std::uint8_t>(out, 3);
    for (int c = 0; c < 3; ++c) put<std::int32_t>(out, mesh.faces(f, c));
  }
  if (!out) throw Error(ErrorKind::Io, "failed while writing mesh file '" + path + "'");
}

namespace {

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

PlyType ply_type(const std::string& name) {
  static const std::map<std::string, PlyType> types = {
      {"char", PlyType::I8},    {"int8", PlyType::I8},     {"uchar", PlyType::U8},  {"uint8", PlyType::U8},
      {"short", PlyType::I16},  {"int16", PlyType::I16},   {"ushort", PlyType::U16}, {"uint16", PlyType::U16},
      {"int", PlyType::I32},    {"int32", PlyType::I32},   {"uint", PlyType::U32},   {"uint32", PlyType::U32},
      {"float", PlyType::F32},  {"float32", PlyType::F32}, {"double", PlyType::F64}, {"float64", PlyType::F64}};
  const auto it = types.find(name);
  if (it == types.end()) throw Error(ErrorKind::Parse, "PLY: unknown property type '" + name + "'");
  return it->second;
}

class PlySource {
 public:
  PlySource(std::istream& in, bool binary, std::string path) : in_(in), binary_(binary), path_(std::move(path)) {}

  double read(PlyType t) {
    if (!binary_) {
      double v;
      if (!(in_ >> v)) fail();
      return v;
    }
    switch (t) {
      case PlyType::I8: return raw<std::int8_t>();
      case PlyType::U8: return raw<std::uint8_t>();
      case PlyType::I16: return raw<std::int16_t>();
      case PlyType::U16: return raw<std::uint16_t>();
      case PlyType::I32: return raw<std::int32_t>();
      case PlyType::U32: return raw<std::uint32_t>();
      case PlyType::F32: return raw<float>();
      case PlyType::F64: return raw<double>();
    }
    return 0.0;
  }

 private:
  template <typename T>
  T raw() {
    T v;
    if (!in_.read(reinterpret_cast<char*>(&v), sizeof(T))) fail();
    return v;
  }
  [[noreturn]] void fail() { throw Error(ErrorKind::Parse, "PLY: unexpected end of data in '" + path_ + "'"); }

  std::istream& in_;
  bool binary_;
  std::string path_;
};

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::F32;
  bool list = false;
  PlyType count_type = PlyType::U8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

}  // namespace

TriangleMesh read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open mesh file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw Error(ErrorKind::Parse, "'" + path + "' is not a PLY file");
  bool binary = false;
  std::vector<PlyElement> elements;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") {
        binary = true;
      } else if (fmt != "ascii") {
        throw Error(ErrorKind::Parse, "PLY: unsupported format '" + fmt + "'");
      }
    } else if (word == "element") {
      PlyElement el;
      long long count = -1;
      ls >> el.name >> count;
      if (count < 0 || count > (1LL << 31)) throw Error(ErrorKind::Parse, "PLY: bad element count");
      el.count = static_cast<std::size_t>(count);
      elements.push_back(el);
    } else if (word == "property") {
      if (elements.empty()) throw Error(ErrorKind::Parse, "PLY: property before element");
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.list = true;
        p.count_type = ply_type(ct);
        p.type = ply_type(it);
      } else {
        p.type = ply_type(type);
        ls >> p.name;
      }
      elements.back().props.push_back(p);
    } else if (word == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw Error(ErrorKind::Parse, "PLY: missing end_header in '" + path + "'");

  TriangleMesh mesh;
  PlySource src(in, binary, path);
  bool has_normals = false, has_colors = false;
  for (const auto& el : elements) {
    if (el.name == "vertex") {
      mesh.positions.resize(el.count, 3);
      mesh.normals = Vertices::Zero(el.count, 3);
      mesh.rgb = ColorsU8::Constant(el.count, 3, 128);
      for (std::size_t i = 0; i < el.count; ++i) {
        for (const auto& p : el.props) {
          if (p.list) {
            const auto n = static_cast<std::size_t>(src.read(p.count_type));
            for (std::size_t k = 0; k < n; ++k) src.read(p.type);
            continue;
          }
          const double v = src.read(p.type);
          if (p.name == "x") mesh.positions(i, 0) = v;
          else if (p.name == "y") mesh.positions(i, 1) = v;
          else if (p.name == "z") mesh.positions(i, 2) = v;
          else if (p.name == "nx") { mesh.normals(i, 0) = v; has_normals = true; }
          else if (p.name == "ny") mesh.normals(i, 1) = v;
          else if (p.name == "nz") mesh.normals(i, 2) = v;
          else if (p.name == "red") { mesh.rgb(i, 0) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0)); has_colors = true; }
          else if (p.name == "green") mesh.rgb(i, 1) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
          else if (p.name == "blue") mesh.rgb(i, 2) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
      }
    } else if (el.name == "face") {
      mesh.faces.resize(el.count, 3);
      for (std::size_t i = 0; i < el.count; ++i) {
        for (const auto& p : el.props) {
          if (!p.list) {
            src.read(p.type);
            continue;
          }
          const auto n = static_cast<long long>(src.read(p.count_type));
          if (n != 3) throw Error(ErrorKind::Parse, "PLY: only triangle faces are supported");
          for (int k = 0; k < 3; ++k) mesh.faces(i, k) = static_cast<std::int32_t>(src.read(p.type));
        }
      }
    } else {
      for (std::size_t i = 0; i < el.count; ++i) {
        for (const auto& p : el.props) {
          if (p.list) {
            const auto n = static_cast<std::size_t>(src.read(p.count_type));
            for (std::size_t k = 0; k < n; ++k) src.read(p.type);
          } else {
            src.read(p.type);
          }
        }
      }
    }
  }
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    for (int c = 0; c < 3; ++c) {
      if (mesh.faces(f, c) < 0 || mesh.faces(f, c) >= mesh.vertex_count()) {
        throw Error(ErrorKind::Structural, "PLY: face " + std::to_string(f) + " references a missing vertex");
      }
    }
  }
  if (!has_normals) mesh.compute_normals();
  if (!has_colors) mesh.rgb.resize(0, 3);
  mesh.observed.assign(mesh.vertex_count(), 1);
  mesh.build_adjacency();
  return mesh;
}

void write_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write mesh file '" + path + "'");
  out << "# parkingtwin mesh\n" << std::setprecision(12);
  const ColorsU8 rgb = colors_or_gray(mesh);
  const Vertices normals = normals_or_up(mesh);
  for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v) {
    out << "v " << mesh.positions(v, 0) << ' ' << mesh.positions(v, 1) << ' ' << mesh.positions(v, 2) << ' '
        << rgb(v, 0) / 255.0 << ' ' << rgb(v, 1) / 255.0 << ' ' << rgb(v, 2) / 255.0 << '\n';
  }
  for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v) {
    out << "vn " << normals(v, 0) << ' ' << normals(v, 1) << ' ' << normals(v, 2) << '\n';
  }
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    out << "f";
    for (int c = 0; c < 3; ++c) out << ' ' << mesh.faces(f, c) + 1 << "//" << mesh.faces(f, c) + 1;
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed while writing mesh file '" + path + "'");
}

TriangleMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open mesh file '" + path + "'");
  std::vector<Vec3d> pos, nrm;
  std::vector<std::array<std::uint8_t, 3>> col;
  std::vector<std::array<std::int32_t, 3>> faces;
  std::string line;
  int line_no = 0;
  bool colors = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3d p;
      if (!(ls >> p.x() >> p.y() >> p.z())) throw Error(ErrorKind::Parse, path + ":" + std::to_string(line_no) + ": bad vertex");
      pos.push_back(p);
      double r, g, b;
      if (ls >> r >> g >> b) {
        auto q = [](double c) { return static_cast<std::uint8_t>(std::clamp(std::lround(c * 255.0), 0L, 255L)); };
        col.push_back({q(r), q(g), q(b)});
      } else {
        colors = false;
      }
    } else if (tag == "vn") {
      Vec3d n;
      if (!(ls >> n.x() >> n.y() >> n.z())) throw Error(ErrorKind::Parse, path + ":" + std::to_string(line_no) + ": bad normal");
      nrm.push_back(n);
    } else if (tag == "f") {
      std::array<std::int32_t, 3> f{};
      std::string tok;
      int k = 0;
      while (ls >> tok) {
        if (k == 3) throw Error(ErrorKind::Parse, path + ":" + std::to_string(line_no) + ": only triangles are supported");
        const long idx = std::strtol(tok.c_str(), nullptr, 10);
        if (idx <= 0 || idx > static_cast<long>(pos.size())) {
          throw Error(ErrorKind::Structural, path + ":" + std::to_string(line_no) + ": face index out of range");
        }
        f[k++] = static_cast<std::int32_t>(idx - 1);
      }
      if (k != 3) throw Error(ErrorKind::Parse, path + ":" + std::to_string(line_no) + ": face needs 3 indices");
      faces.push_back(f);
    }
  }
  TriangleMesh mesh;
  mesh.positions.resize(pos.size(), 3);
  for (std::size_t i = 0; i < pos.size(); ++i) mesh.positions.row(i) = pos[i].transpose();
  mesh.faces.resize(faces.size(), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) mesh.faces.row(i) << faces[i][0], faces[i][1], faces[i][2];
  if (colors && !pos.empty()) {
    mesh.rgb.resize(pos.size(), 3);
    for (std::size_t i = 0; i < pos.size(); ++i) mesh.rgb.row(i) << col[i][0], col[i][1], col[i][2];
  }
  if (nrm.size() == pos.size()) {
    mesh.normals.resize(pos.size(), 3);
    for (std::size_t i = 0; i < pos.size(); ++i) mesh.normals.row(i) = nrm[i].transpose();
  } else {
    mesh.compute_normals();
  }
  mesh.observed.assign(mesh.vertex_count(), 1);
  mesh.build_adjacency();
  return mesh;
}

}  // namespace parkingtwin
