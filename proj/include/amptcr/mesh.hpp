#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "amptcr/geometry.hpp"

namespace amptcr {

using Triangle = std::array<std::uint32_t, 3>;

struct SurfaceMesh {
  std::vector<Vec3> vertices;        // Å
  std::vector<Triangle> triangles;   // counter-clockwise seen from outside
  std::vector<double> vertex_scalars;
  std::vector<Vec3> vertex_normals;  // unit, outward

  std::size_t vertex_count() const noexcept { return vertices.size(); }
  double area() const;
  double triangle_area(std::size_t t) const;
  Vec3 centroid() const { return amptcr::centroid(vertices); }

  // Sorted one-ring neighbour lists from the triangle edges.
  std::vector<std::vector<std::uint32_t>> vertex_neighbors() const;

  // Checks index validity, array sizes, unit normals and absence of
  // degenerate triangles.
  void validate() const;
};

inline constexpr double kDegenerateArea = 1e-12;  // Å^2

// Connected components of the triangle graph; returns a component id per
// vertex and the number of components.
std::pair<std::vector<std::uint32_t>, std::size_t> connected_components(const SurfaceMesh& mesh);

// V - E + F of each component, ordered by component id.
std::vector<long> euler_characteristics(const SurfaceMesh& mesh);

// Rigidly move vertices and normals.
SurfaceMesh transformed(const SurfaceMesh& mesh, const Mat3& rotation, const Vec3& translation);

}  // namespace amptcr
