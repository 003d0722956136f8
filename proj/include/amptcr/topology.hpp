#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "amptcr/mesh.hpp"

namespace amptcr {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

struct GeodesicField {
  std::uint32_t source = 0;
  std::vector<double> distances;  // Å; kInfiniteDistance beyond the cutoff
  double cutoff = kInfiniteDistance;
};

// Approximate geodesics: Dijkstra over mesh edges plus, for every edge shared
// by two triangles, the "diagonal" joining the two opposite vertices. Graph
// edges carry their straight-line length, so a geodesic distance is never
// shorter than the Euclidean one.
class GeodesicSolver {
 public:
  explicit GeodesicSolver(const SurfaceMesh& mesh);

  // Vertices reached within `cutoff`, in order of increasing distance.
  std::vector<std::pair<std::uint32_t, double>> reach(std::uint32_t source, double cutoff) const;
  GeodesicField field(std::uint32_t source, double cutoff = kInfiniteDistance) const;

 private:
  std::vector<std::vector<std::pair<std::uint32_t, double>>> graph_;
};

GeodesicField geodesic_distances(const SurfaceMesh& mesh, std::uint32_t source, double cutoff = kInfiniteDistance);

struct CurvatureEstimate {
  double mean = 0.0;      // 1/Å, positive on convex (sphere-like) regions
  double gaussian = 0.0;  // 1/Å^2
  Vec3 direction = Vec3::Zero();  // principal direction of the larger-magnitude curvature
  double principal = 0.0;         // that curvature, 1/Å
  bool ok = false;
};

// Least-squares quadric z = a x^2 + b xy + c y^2 over the two-ring, in a
// tangent frame whose z axis is the inward normal: mean = a + c,
// gaussian = 4ac - b^2. The principal direction's sign makes the third moment
// of the neighbours' projections onto it non-negative. Returns ok = false
// (and zeros) when the two-ring has fewer than five vertices or the fit is
// rank deficient.
CurvatureEstimate estimate_curvature(const SurfaceMesh& mesh, std::uint32_t vertex);
CurvatureEstimate estimate_curvature(const SurfaceMesh& mesh, std::uint32_t vertex,
                                     const std::vector<std::vector<std::uint32_t>>& neighbors);

struct TopologyConfig {
  std::vector<double> radii{1.0, 2.0};  // Å, ascending
  double cutoff = 3.0;                  // Å
  void validate() const;
};

struct TopoDescriptor {
  Vec3 t1 = Vec3::Zero();  // unit outward normal
  Vec3 t2 = Vec3::Zero();  // principal direction scaled by its curvature
  std::vector<double> ring_height_mean;    // per radius, Å; < 0 on hills, > 0 in valleys
  std::vector<double> ring_height_spread;  // per radius, Å
  double mean_curvature = 0.0;
  double gaussian_curvature = 0.0;
  bool empty_ring = false;
  bool curvature_failed = false;

  // t1 (3), t2 (3), ring means, ring spreads, mean and Gaussian curvature.
  std::vector<double> channels() const;
};

std::vector<std::string> topology_channel_names(const std::vector<double>& radii);
inline std::size_t topology_channel_count(std::size_t n_radii) { return 8 + 2 * n_radii; }

TopoDescriptor topology_vectors(const SurfaceMesh& mesh, std::uint32_t vertex, const TopologyConfig& config);

// Batch form sharing one geodesic graph and adjacency across points.
std::vector<TopoDescriptor> topology_vectors(const SurfaceMesh& mesh, const std::vector<std::uint32_t>& vertices,
                                             const TopologyConfig& config);

}  // namespace amptcr
