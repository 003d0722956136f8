#include "amptcr/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "amptcr/error.hpp"

namespace amptcr {

double SurfaceMesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles[t];
  return 0.5 * (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]).norm();
}

double SurfaceMesh::area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(t);
  return a;
}

std::vector<std::vector<std::uint32_t>> SurfaceMesh::vertex_neighbors() const {
  std::vector<std::vector<std::uint32_t>> adj(vertices.size());
  for (const auto& tri : triangles)
    for (int e = 0; e < 3; ++e) {
      adj[tri[e]].push_back(tri[(e + 1) % 3]);
      adj[tri[(e + 1) % 3]].push_back(tri[e]);
    }
  for (auto& n : adj) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return adj;
}

void SurfaceMesh::validate() const {
  const auto n = vertices.size();
  for (const auto& tri : triangles)
    for (auto v : tri)
      if (v >= n) throw PreconditionError("triangle index out of range");
  for (std::size_t t = 0; t < triangles.size(); ++t)
    if (triangle_area(t) < kDegenerateArea) throw PreconditionError("degenerate triangle " + std::to_string(t));
  if (!vertex_scalars.empty() && vertex_scalars.size() != n) throw PreconditionError("vertex_scalars size mismatch");
  if (!vertex_normals.empty()) {
    if (vertex_normals.size() != n) throw PreconditionError("vertex_normals size mismatch");
    for (const auto& nv : vertex_normals)
      if (std::abs(nv.norm() - 1.0) > 1e-6) throw PreconditionError("vertex normal is not unit length");
  }
}

std::pair<std::vector<std::uint32_t>, std::size_t> connected_components(const SurfaceMesh& mesh) {
  const auto adj = mesh.vertex_neighbors();
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> comp(mesh.vertices.size(), kUnset);
  std::size_t count = 0;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t s = 0; s < comp.size(); ++s) {
    if (comp[s] != kUnset) continue;
    const auto id = static_cast<std::uint32_t>(count++);
    comp[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto w : adj[v])
        if (comp[w] == kUnset) {
          comp[w] = id;
          stack.push_back(w);
        }
    }
  }
  return {comp, count};
}

std::vector<long> euler_characteristics(const SurfaceMesh& mesh) {
  const auto [comp, count] = connected_components(mesh);
  std::vector<long> chi(count, 0);
  for (auto c : comp) ++chi[c];
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& tri : mesh.triangles) {
    ++chi[comp[tri[0]]];
    for (int e = 0; e < 3; ++e) {
      auto a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      if (edges.insert({a, b}).second) --chi[comp[a]];
    }
  }
  return chi;
}

SurfaceMesh transformed(const SurfaceMesh& mesh, const Mat3& rotation, const Vec3& translation) {
  SurfaceMesh out = mesh;
  for (auto& v : out.vertices) v = rotation * v + translation;
  for (auto& n : out.vertex_normals) n = rotation * n;
  return out;
}

}  // namespace amptcr
