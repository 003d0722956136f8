#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "amptcr/grid.hpp"
#include "amptcr/mesh.hpp"

namespace amptcr {

// Lookup tables for the 256 corner-sign cases of a cube. Corner c sits at
// (c & 1, (c >> 1) & 1, (c >> 2) & 1); a set bit means the corner is inside
// (value above the isovalue).
struct MarchingCubesTables {
  // Endpoints of the 12 cube edges, lower corner first.
  std::array<std::array<std::uint8_t, 2>, 12> edge_corners{};
  // Bitmask of intersected edges per case.
  std::array<std::uint16_t, 256> edge_mask{};
  // Triangles per case as edge-index triples, -1 terminated (max 12 triangles).
  std::array<std::array<std::int8_t, 37>, 256> triangles{};
};

// Generated once from a face walk: on every cube face the contour segments
// separate the inside corners (an ambiguous face never joins its two inside
// corners), segments are chained into cycles across faces, each cycle is
// oriented with its normal pointing from inside to outside and fan
// triangulated. The face rule depends only on the face's own corner signs,
// so neighbouring cubes always agree and the surface is watertight.
const MarchingCubesTables& marching_cubes_tables();

// Isosurface of `grid` at `isovalue`. Vertices on shared grid edges are
// merged, degenerate triangles dropped, normals taken from the negated field
// gradient (outward for a density). Throws PreconditionError when the
// isovalue is not strictly inside the value range or the mesh is empty.
SurfaceMesh marching_cubes(const ScalarGrid& grid, double isovalue);

inline constexpr double kDefaultIsovalueFactor = 0.04;

// vertex_scalars[i] = trilinear_sample(property_grid, vertex_i).
SurfaceMesh annotate_scalars(const SurfaceMesh& mesh, const ScalarGrid& property_grid);

struct SampledSurface {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<double> scalars;
  std::vector<std::uint32_t> source_vertex;

  std::size_t size() const noexcept { return positions.size(); }
};

// Divide by max |s|; all-zero input is returned unchanged.
void normalize_scalars_inplace(std::span<double> scalars);
SurfaceMesh normalize_scalars(SurfaceMesh mesh);
SampledSurface normalize_scalars(SampledSurface surface);

inline constexpr std::size_t kDefaultPointCount = 1024;
inline constexpr std::size_t kLightPointCount = 256;

// Greedy farthest-point sampling over mesh vertices (Euclidean). The first
// pick is the vertex farthest from the vertex centroid; exact distance ties
// are broken by a per-vertex key derived from `seed`.
SampledSurface farthest_point_sample(const SurfaceMesh& mesh, std::size_t n, std::uint64_t seed = 0);

// ASCII PLY 1.0 with double x y z nx ny nz scalar and a uchar/int face list.
std::string export_ply(const SurfaceMesh& mesh);
SurfaceMesh parse_ply(std::string_view text);

}  // namespace amptcr
