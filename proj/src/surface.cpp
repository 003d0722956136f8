#include "amptcr/surface.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "amptcr/error.hpp"
#include "amptcr/hash.hpp"

namespace amptcr {

namespace {

Vec3 corner_position(int c) { return Vec3(c & 1, (c >> 1) & 1, (c >> 2) & 1); }

MarchingCubesTables build_tables() {
  MarchingCubesTables t;
  int edge_of[8][8];
  for (auto& row : edge_of)
    for (auto& e : row) e = -1;
  int n_edges = 0;
  for (int a = 0; a < 8; ++a)
    for (int axis = 0; axis < 3; ++axis) {
      const int b = a | (1 << axis);
      if (b == a) continue;
      t.edge_corners[n_edges] = {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)};
      edge_of[a][b] = edge_of[b][a] = n_edges++;
    }

  // Each face as a corner cycle.
  std::vector<std::array<int, 4>> faces;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      auto corner = [&](int bu, int bv) { return (side << axis) | (bu << u) | (bv << v); };
      faces.push_back({corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)});
    }
  }

  for (int mask = 0; mask < 256; ++mask) {
    auto inside = [&](int c) { return (mask >> c) & 1; };
    std::vector<std::vector<int>> links(12);
    std::uint16_t crossed = 0;
    for (const auto& f : faces) {
      int e[4];
      int count = 0;
      for (int s = 0; s < 4; ++s) {
        const int a = f[s], b = f[(s + 1) % 4];
        e[s] = inside(a) != inside(b) ? edge_of[a][b] : -1;
        count += e[s] >= 0;
      }
      auto link = [&](int x, int y) {
        links[x].push_back(y);
        links[y].push_back(x);
      };
      if (count == 2) {
        int first = -1;
        for (int s = 0; s < 4; ++s)
          if (e[s] >= 0) {
            if (first < 0) first = e[s];
            else link(first, e[s]);
          }
      } else if (count == 4) {
        // Cut off each inside corner on its own. Edge s runs from corner s to s+1.
        if (inside(f[0])) {
          link(e[3], e[0]);
          link(e[1], e[2]);
        } else {
          link(e[0], e[1]);
          link(e[2], e[3]);
        }
      }
      for (int s = 0; s < 4; ++s)
        if (e[s] >= 0) crossed |= static_cast<std::uint16_t>(1u << e[s]);
    }
    t.edge_mask[mask] = crossed;

    std::vector<bool> used(12, false);
    int out = 0;
    auto& tris = t.triangles[mask];
    tris.fill(-1);
    for (int start = 0; start < 12; ++start) {
      if (used[start] || links[start].empty()) continue;
      std::vector<int> cycle{start};
      used[start] = true;
      int prev = -1, cur = start;
      while (true) {
        const int next = links[cur][0] != prev ? links[cur][0] : links[cur][1];
        if (next == start) break;
        cycle.push_back(next);
        used[next] = true;
        prev = cur;
        cur = next;
      }
      // Newell normal against the summed inside->outside edge directions.
      Vec3 normal = Vec3::Zero(), outward = Vec3::Zero();
      std::vector<Vec3> pts;
      for (int e : cycle) {
        const auto [a, b] = t.edge_corners[e];
        pts.push_back(0.5 * (corner_position(a) + corner_position(b)));
        outward += inside(a) ? Vec3(corner_position(b) - corner_position(a)) : Vec3(corner_position(a) - corner_position(b));
      }
      for (std::size_t i = 0; i < pts.size(); ++i) normal += pts[i].cross(pts[(i + 1) % pts.size()]);
      if (normal.dot(outward) < 0.0) std::reverse(cycle.begin(), cycle.end());
      for (std::size_t i = 1; i + 1 < cycle.size(); ++i) {
        tris[out++] = static_cast<std::int8_t>(cycle[0]);
        tris[out++] = static_cast<std::int8_t>(cycle[i]);
        tris[out++] = static_cast<std::int8_t>(cycle[i + 1]);
      }
    }
  }
  return t;
}

}  // namespace

const MarchingCubesTables& marching_cubes_tables() {
  static const MarchingCubesTables tables = build_tables();
  return tables;
}

namespace {
constexpr double kNodeOffset = 1e-4;
}  // namespace

SurfaceMesh marching_cubes(const ScalarGrid& grid, double isovalue) {
  grid.validate();
  const double lo = grid.min_value(), hi = grid.max_value();
  if (!(isovalue > lo && isovalue < hi))
    throw PreconditionError("isovalue must lie strictly between the grid minimum and maximum");

  const auto& tables = marching_cubes_tables();
  const auto& g = grid.geometry;
  const auto [nx, ny, nz] = g.dims;

  SurfaceMesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
  auto vertex_on_edge = [&](std::size_t i, std::size_t j, std::size_t k, int edge) -> std::uint32_t {
    const auto [ca, cb] = tables.edge_corners[edge];
    const std::size_t ia = i + (ca & 1), ja = j + ((ca >> 1) & 1), ka = k + ((ca >> 2) & 1);
    const std::size_t ib = i + (cb & 1), jb = j + ((cb >> 1) & 1), kb = k + ((cb >> 2) & 1);
    const int axis = (ca ^ cb) == 1 ? 0 : (ca ^ cb) == 2 ? 1 : 2;
    const std::uint64_t key = static_cast<std::uint64_t>(g.index(ia, ja, ka)) * 3 + axis;
    auto [it, fresh] = edge_vertex.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
    if (fresh) {
      const double va = grid.at(ia, ja, ka), vb = grid.at(ib, jb, kb);
      // A node sitting exactly on the isovalue counts as outside; keeping the
      // vertex a hair away from it stops neighbouring edges from collapsing
      // onto one point.
      const double s = std::clamp((isovalue - va) / (vb - va), kNodeOffset, 1.0 - kNodeOffset);
      mesh.vertices.push_back(g.node(ia, ja, ka) + s * (g.node(ib, jb, kb) - g.node(ia, ja, ka)));
    }
    return it->second;
  };

  for (std::size_t k = 0; k + 1 < nz; ++k)
    for (std::size_t j = 0; j + 1 < ny; ++j)
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        int mask = 0;
        for (int c = 0; c < 8; ++c)
          if (grid.at(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1)) > isovalue) mask |= 1 << c;
        const auto& tri = tables.triangles[mask];
        for (int n = 0; tri[n] >= 0; n += 3)
          mesh.triangles.push_back({vertex_on_edge(i, j, k, tri[n]), vertex_on_edge(i, j, k, tri[n + 1]),
                                    vertex_on_edge(i, j, k, tri[n + 2])});
      }

  std::vector<Triangle> kept;
  kept.reserve(mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) continue;
    const auto& a = mesh.vertices[tri[0]];
    if (0.5 * (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a).norm() < kDegenerateArea) continue;
    kept.push_back(tri);
  }

  // Compact away unreferenced vertices.
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> remap(mesh.vertices.size(), kUnset);
  std::vector<Vec3> verts;
  for (auto& tri : kept)
    for (auto& v : tri) {
      if (remap[v] == kUnset) {
        remap[v] = static_cast<std::uint32_t>(verts.size());
        verts.push_back(mesh.vertices[v]);
      }
      v = remap[v];
    }
  mesh.vertices = std::move(verts);
  mesh.triangles = std::move(kept);
  if (mesh.triangles.empty()) throw PreconditionError("isosurface is empty");

  // Outward normals: density decreases outward, so follow -gradient.
  std::vector<Vec3> face_normals(mesh.vertices.size(), Vec3::Zero());
  for (const auto& tri : mesh.triangles) {
    const Vec3 n = (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]).cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
    for (auto v : tri) face_normals[v] += n;
  }
  mesh.vertex_normals.resize(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    Vec3 n = -sample_gradient(grid, mesh.vertices[v]);
    if (!(n.norm() > 1e-300) || !n.allFinite()) n = face_normals[v];
    mesh.vertex_normals[v] = n.normalized();
  }
  mesh.vertex_scalars.assign(mesh.vertices.size(), 0.0);
  return mesh;
}

SurfaceMesh annotate_scalars(const SurfaceMesh& mesh, const ScalarGrid& property_grid) {
  SurfaceMesh out = mesh;
  out.vertex_scalars.resize(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (!property_grid.geometry.contains(mesh.vertices[v]))
      throw PreconditionError("mesh vertex " + std::to_string(v) + " lies outside the property grid");
    out.vertex_scalars[v] = trilinear_sample(property_grid, mesh.vertices[v]);
  }
  return out;
}

void normalize_scalars_inplace(std::span<double> scalars) {
  double m = 0.0;
  for (double s : scalars) m = std::max(m, std::abs(s));
  if (m == 0.0) return;
  for (double& s : scalars) s = std::clamp(s / m, -1.0, 1.0);
}

SurfaceMesh normalize_scalars(SurfaceMesh mesh) {
  normalize_scalars_inplace(mesh.vertex_scalars);
  return mesh;
}

SampledSurface normalize_scalars(SampledSurface surface) {
  normalize_scalars_inplace(surface.scalars);
  return surface;
}

SampledSurface farthest_point_sample(const SurfaceMesh& mesh, std::size_t n, std::uint64_t seed) {
  const std::size_t nv = mesh.vertices.size();
  if (n == 0) throw PreconditionError("farthest point sampling needs n >= 1");
  if (n > nv)
    throw PreconditionError("requested " + std::to_string(n) + " points but the mesh has only " +
                            std::to_string(nv) + " vertices");

  auto tie_key = [seed](std::size_t v) { return combine_keys(seed, v); };
  // Better candidate: larger distance, then larger tie key.
  auto better = [&](double d, std::size_t v, double best_d, std::size_t best_v) {
    if (d != best_d) return d > best_d;
    return tie_key(v) > tie_key(best_v);
  };

  const Vec3 c = mesh.centroid();
  std::size_t first = 0;
  double first_d = -1.0;
  for (std::size_t v = 0; v < nv; ++v) {
    const double d = (mesh.vertices[v] - c).squaredNorm();
    if (better(d, v, first_d, first)) {
      first = v;
      first_d = d;
    }
  }

  std::vector<double> dist(nv, std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> picked;
  picked.reserve(n);
  std::size_t next = first;
  for (std::size_t s = 0; s < n; ++s) {
    picked.push_back(static_cast<std::uint32_t>(next));
    const Vec3 p = mesh.vertices[next];
    dist[next] = -1.0;
    double best_d = -1.0;
    std::size_t best = 0;
    for (std::size_t v = 0; v < nv; ++v) {
      if (dist[v] < 0.0) continue;
      dist[v] = std::min(dist[v], (mesh.vertices[v] - p).squaredNorm());
      if (better(dist[v], v, best_d, best)) {
        best_d = dist[v];
        best = v;
      }
    }
    next = best;
  }

  SampledSurface out;
  for (auto v : picked) {
    out.positions.push_back(mesh.vertices[v]);
    out.normals.push_back(mesh.vertex_normals.empty() ? Vec3::Zero() : mesh.vertex_normals[v]);
    out.scalars.push_back(mesh.vertex_scalars.empty() ? 0.0 : mesh.vertex_scalars[v]);
    out.source_vertex.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PLY

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

std::string export_ply(const SurfaceMesh& mesh) {
  std::string out;
  out += "ply\nformat ascii 1.0\ncomment amptcr surface mesh\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  for (const char* p : {"x", "y", "z", "nx", "ny", "nz", "scalar"}) out += std::string("property double ") + p + "\n";
  out += "element face " + std::to_string(mesh.triangles.size()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Vec3& p = mesh.vertices[v];
    const Vec3 n = mesh.vertex_normals.empty() ? Vec3::Zero() : mesh.vertex_normals[v];
    const double s = mesh.vertex_scalars.empty() ? 0.0 : mesh.vertex_scalars[v];
    const double row[7] = {p.x(), p.y(), p.z(), n.x(), n.y(), n.z(), s};
    for (int c = 0; c < 7; ++c) {
      if (c) out += ' ';
      append_double(out, row[c]);
    }
    out += '\n';
  }
  for (const auto& t : mesh.triangles)
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  return out;
}

SurfaceMesh parse_ply(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line() || line != "ply") throw ParseError("missing 'ply' magic", 1);
  std::size_t n_vertices = 0, n_faces = 0;
  std::vector<std::string> vertex_props;
  std::string current;
  bool header_done = false;
  while (next_line()) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") throw ParseError("only ASCII PLY is supported", line_no);
    } else if (word == "element") {
      std::size_t count = 0;
      ls >> current >> count;
      if (current == "vertex") n_vertices = count;
      else if (current == "face") n_faces = count;
    } else if (word == "property") {
      if (current == "vertex") {
        std::string type, name;
        ls >> type >> name;
        vertex_props.push_back(name);
      }
    } else if (word == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw ParseError("PLY header not terminated", line_no);
  auto col = [&](const char* name) -> int {
    auto it = std::find(vertex_props.begin(), vertex_props.end(), name);
    return it == vertex_props.end() ? -1 : static_cast<int>(it - vertex_props.begin());
  };
  const int ix = col("x"), iy = col("y"), iz = col("z");
  const int inx = col("nx"), iny = col("ny"), inz = col("nz"), is = col("scalar");
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError("PLY vertices need x, y, z");

  SurfaceMesh mesh;
  for (std::size_t v = 0; v < n_vertices; ++v) {
    if (!next_line()) throw ParseError("unexpected end of vertex list", line_no);
    std::vector<double> vals;
    std::string_view rest(line);
    while (!rest.empty()) {
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      if (rest.empty()) break;
      const auto end = rest.find(' ');
      const auto tok = rest.substr(0, end);
      double d = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) throw ParseError("bad number in vertex row", line_no);
      vals.push_back(d);
      rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
    }
    if (vals.size() != vertex_props.size()) throw ParseError("vertex row has wrong column count", line_no);
    mesh.vertices.emplace_back(vals[ix], vals[iy], vals[iz]);
    if (inx >= 0 && iny >= 0 && inz >= 0) mesh.vertex_normals.emplace_back(vals[inx], vals[iny], vals[inz]);
    if (is >= 0) mesh.vertex_scalars.push_back(vals[is]);
  }
  for (std::size_t f = 0; f < n_faces; ++f) {
    if (!next_line()) throw ParseError("unexpected end of face list", line_no);
    std::istringstream ls(line);
    int count = 0;
    ls >> count;
    if (count != 3) throw ParseError("only triangular faces are supported", line_no);
    Triangle t{};
    for (auto& v : t) {
      long long idx = -1;
      ls >> idx;
      if (!ls || idx < 0 || static_cast<std::size_t>(idx) >= n_vertices) throw ParseError("bad face index", line_no);
      v = static_cast<std::uint32_t>(idx);
    }
    mesh.triangles.push_back(t);
  }
  return mesh;
}

}  // namespace amptcr
