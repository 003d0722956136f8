#include "amptcr/topology.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <sstream>

#include "amptcr/error.hpp"

namespace amptcr {

GeodesicSolver::GeodesicSolver(const SurfaceMesh& mesh) : graph_(mesh.vertices.size()) {
  // Edge -> opposite vertices of the triangles using it.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> opposite;
  for (const auto& tri : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      auto a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      opposite[{a, b}].push_back(tri[(e + 2) % 3]);
    }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> links;
  for (const auto& [edge, opp] : opposite) {
    links.push_back(edge);
    for (std::size_t i = 0; i < opp.size(); ++i)
      for (std::size_t j = i + 1; j < opp.size(); ++j)
        if (opp[i] != opp[j]) links.emplace_back(std::min(opp[i], opp[j]), std::max(opp[i], opp[j]));
  }
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  for (const auto& [a, b] : links) {
    const double w = (mesh.vertices[a] - mesh.vertices[b]).norm();
    graph_[a].emplace_back(b, w);
    graph_[b].emplace_back(a, w);
  }
}

std::vector<std::pair<std::uint32_t, double>> GeodesicSolver::reach(std::uint32_t source, double cutoff) const {
  if (source >= graph_.size()) throw PreconditionError("geodesic source vertex out of range");
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::vector<double> best(graph_.size(), kInfiniteDistance);
  std::vector<bool> finished(graph_.size(), false);
  std::vector<std::pair<std::uint32_t, double>> settled;
  heap.emplace(0.0, source);
  best[source] = 0.0;
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (finished[v]) continue;
    finished[v] = true;
    settled.emplace_back(v, d);
    for (const auto& [w, len] : graph_[v]) {
      const double nd = d + len;
      if (nd > cutoff || nd >= best[w]) continue;
      best[w] = nd;
      heap.emplace(nd, w);
    }
  }
  return settled;
}

GeodesicField GeodesicSolver::field(std::uint32_t source, double cutoff) const {
  GeodesicField f;
  f.source = source;
  f.cutoff = cutoff;
  f.distances.assign(graph_.size(), kInfiniteDistance);
  for (const auto& [v, d] : reach(source, cutoff)) f.distances[v] = d;
  return f;
}

GeodesicField geodesic_distances(const SurfaceMesh& mesh, std::uint32_t source, double cutoff) {
  return GeodesicSolver(mesh).field(source, cutoff);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint32_t> two_ring(const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t v) {
  std::vector<std::uint32_t> ring;
  for (auto a : adj[v]) {
    ring.push_back(a);
    for (auto b : adj[a])
      if (b != v) ring.push_back(b);
  }
  std::sort(ring.begin(), ring.end());
  ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
  return ring;
}

// Orthonormal tangent pair for a unit normal.
std::pair<Vec3, Vec3> tangent_frame(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = (helper - helper.dot(n) * n).normalized();
  return {u, n.cross(u)};
}

}  // namespace

CurvatureEstimate estimate_curvature(const SurfaceMesh& mesh, std::uint32_t vertex) {
  return estimate_curvature(mesh, vertex, mesh.vertex_neighbors());
}

CurvatureEstimate estimate_curvature(const SurfaceMesh& mesh, std::uint32_t vertex,
                                     const std::vector<std::vector<std::uint32_t>>& neighbors) {
  if (vertex >= mesh.vertices.size()) throw PreconditionError("curvature vertex out of range");
  if (mesh.vertex_normals.size() != mesh.vertices.size()) throw PreconditionError("mesh has no vertex normals");
  CurvatureEstimate out;
  const auto ring = two_ring(neighbors, vertex);
  if (ring.size() < 5) return out;

  const Vec3& p = mesh.vertices[vertex];
  const Vec3 n = mesh.vertex_normals[vertex].normalized();
  const auto [u, w] = tangent_frame(n);
  Eigen::MatrixXd design(ring.size(), 3);
  Eigen::VectorXd height(ring.size());
  for (std::size_t r = 0; r < ring.size(); ++r) {
    const Vec3 d = mesh.vertices[ring[r]] - p;
    const double x = d.dot(u), y = d.dot(w);
    design.row(r) << x * x, x * y, y * y;
    height[r] = -d.dot(n);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) return out;
  const Eigen::Vector3d coef = qr.solve(height);
  const double a = coef[0], b = coef[1], c = coef[2];

  Eigen::Matrix2d shape;
  shape << 2 * a, b, b, 2 * c;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(shape);
  const int major = std::abs(eig.eigenvalues()[1]) >= std::abs(eig.eigenvalues()[0]) ? 1 : 0;
  const Eigen::Vector2d e = eig.eigenvectors().col(major);
  Vec3 dir = (e[0] * u + e[1] * w).normalized();
  double moment = 0.0;
  for (auto q : ring) moment += std::pow((mesh.vertices[q] - p).dot(dir), 3);
  if (moment < 0.0) dir = -dir;

  out.mean = a + c;
  out.gaussian = 4 * a * c - b * b;
  out.direction = dir;
  out.principal = eig.eigenvalues()[major];
  out.ok = true;
  return out;
}

// ---------------------------------------------------------------------------

void TopologyConfig::validate() const {
  if (radii.empty()) throw PreconditionError("topology needs at least one ring radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw PreconditionError("ring radii must be positive");
    if (i && radii[i] <= radii[i - 1]) throw PreconditionError("ring radii must be ascending");
    if (radii[i] > cutoff) throw PreconditionError("ring radius exceeds the geodesic cutoff");
  }
}

std::vector<double> TopoDescriptor::channels() const {
  std::vector<double> c{t1.x(), t1.y(), t1.z(), t2.x(), t2.y(), t2.z()};
  c.insert(c.end(), ring_height_mean.begin(), ring_height_mean.end());
  c.insert(c.end(), ring_height_spread.begin(), ring_height_spread.end());
  c.push_back(mean_curvature);
  c.push_back(gaussian_curvature);
  return c;
}

std::vector<std::string> topology_channel_names(const std::vector<double>& radii) {
  std::vector<std::string> names{"t1.x", "t1.y", "t1.z", "t2.x", "t2.y", "t2.z"};
  auto fmt = [](double r) {
    std::ostringstream s;
    s << r;
    return s.str();
  };
  for (double r : radii) names.push_back("ring_mean@" + fmt(r));
  for (double r : radii) names.push_back("ring_spread@" + fmt(r));
  names.emplace_back("mean_curvature");
  names.emplace_back("gaussian_curvature");
  return names;
}

namespace {

TopoDescriptor describe(const SurfaceMesh& mesh, std::uint32_t vertex, const TopologyConfig& config,
                        const GeodesicSolver& solver, const std::vector<std::vector<std::uint32_t>>& adj) {
  TopoDescriptor d;
  const Vec3& p = mesh.vertices[vertex];
  d.t1 = mesh.vertex_normals[vertex].normalized();

  const auto curv = estimate_curvature(mesh, vertex, adj);
  d.curvature_failed = !curv.ok;
  if (curv.ok) {
    // Project out any residual normal component so t2 stays in the tangent plane.
    const Vec3 dir = (curv.direction - curv.direction.dot(d.t1) * d.t1).normalized();
    d.t2 = curv.principal * dir;
    d.mean_curvature = curv.mean;
    d.gaussian_curvature = curv.gaussian;
  }

  const auto reached = solver.reach(vertex, config.cutoff);
  for (double r : config.radii) {
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (const auto& [v, dist] : reached) {
      if (dist < 0.8 * r || dist > 1.2 * r) continue;
      const double h = (mesh.vertices[v] - p).dot(d.t1);
      sum += h;
      sum2 += h * h;
      ++count;
    }
    if (count == 0) {
      d.empty_ring = true;
      d.ring_height_mean.push_back(0.0);
      d.ring_height_spread.push_back(0.0);
      continue;
    }
    const double mean = sum / static_cast<double>(count);
    d.ring_height_mean.push_back(mean);
    d.ring_height_spread.push_back(std::sqrt(std::max(0.0, sum2 / static_cast<double>(count) - mean * mean)));
  }
  return d;
}

}  // namespace

TopoDescriptor topology_vectors(const SurfaceMesh& mesh, std::uint32_t vertex, const TopologyConfig& config) {
  return topology_vectors(mesh, std::vector<std::uint32_t>{vertex}, config).front();
}

std::vector<TopoDescriptor> topology_vectors(const SurfaceMesh& mesh, const std::vector<std::uint32_t>& vertices,
                                             const TopologyConfig& config) {
  config.validate();
  if (mesh.vertex_normals.size() != mesh.vertices.size()) throw PreconditionError("mesh has no vertex normals");
  const GeodesicSolver solver(mesh);
  const auto adj = mesh.vertex_neighbors();
  std::vector<TopoDescriptor> out;
  out.reserve(vertices.size());
  for (auto v : vertices) {
    if (v >= mesh.vertices.size()) throw PreconditionError("descriptor vertex out of range");
    out.push_back(describe(mesh, v, config, solver, adj));
  }
  return out;
}

}  // namespace amptcr
