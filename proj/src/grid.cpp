#include "amptcr/grid.hpp"

#include <algorithm>
#include <cmath>

#include "amptcr/elements.hpp"
#include "amptcr/error.hpp"

namespace amptcr {

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::density:
      return "density";
    case FieldKind::esp:
      return "esp";
    case FieldKind::fukui_dual:
      return "fukui_dual";
  }
  return "unknown";
}

bool GridGeometry::contains(const Vec3& p, double slack) const noexcept {
  const Vec3 hi = upper();
  for (int a = 0; a < 3; ++a)
    if (!(p[a] >= origin[a] - slack && p[a] <= hi[a] + slack)) return false;
  return true;
}

void GridGeometry::validate() const {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw PreconditionError("grid spacing must be positive");
  for (auto d : dims)
    if (d < 2) throw PreconditionError("grid dims must be >= 2 along every axis");
  if (!origin.allFinite()) throw PreconditionError("grid origin must be finite");
}

double ScalarGrid::min_value() const { return *std::min_element(values.begin(), values.end()); }
double ScalarGrid::max_value() const { return *std::max_element(values.begin(), values.end()); }

void ScalarGrid::validate() const {
  geometry.validate();
  if (values.size() != geometry.node_count()) throw PreconditionError("grid value count != nx*ny*nz");
  for (double v : values)
    if (!std::isfinite(v)) throw NumericError("non-finite grid value");
}

GridGeometry fit_geometry(const std::vector<Vec3>& points, double spacing, double padding,
                          std::size_t voxel_budget) {
  if (points.empty()) throw PreconditionError("cannot fit a grid to zero points");
  if (!(spacing > 0.0)) throw PreconditionError("grid spacing must be positive");
  if (!(padding >= 0.0)) throw PreconditionError("grid padding must be non-negative");
  Vec3 lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 center = 0.5 * (lo + hi);
  GridGeometry g;
  g.spacing = spacing;
  double total = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double extent = hi[a] - lo[a] + 2.0 * padding;
    const auto cells = static_cast<std::size_t>(std::ceil(extent / spacing - 1e-9));
    g.dims[a] = std::max<std::size_t>(cells, 1) + 1;
    total *= static_cast<double>(g.dims[a]);
  }
  if (total > static_cast<double>(voxel_budget))
    throw PreconditionError("grid of " + std::to_string(static_cast<long long>(total)) +
                            " voxels exceeds budget of " + std::to_string(voxel_budget));
  for (int a = 0; a < 3; ++a) g.origin[a] = center[a] - 0.5 * spacing * static_cast<double>(g.dims[a] - 1);
  return g;
}

double density_sigma(const Atom& atom) {
  const double r = atom.radius && *atom.radius > 0.0 ? *atom.radius : element(atom.atomic_number).vdw_radius;
  return 0.5 * r;
}

namespace {

template <typename F>
ScalarGrid fill_grid(const GridGeometry& geometry, FieldKind kind, F&& value_at) {
  geometry.validate();
  ScalarGrid grid;
  grid.geometry = geometry;
  grid.kind = kind;
  grid.values.resize(geometry.node_count());
  const auto [nx, ny, nz] = geometry.dims;
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) grid.values[geometry.index(i, j, k)] = value_at(geometry.node(i, j, k));
  return grid;
}

double esp_at(const std::vector<Vec3>& pos, const std::vector<double>& q, const Vec3& x) {
  double v = 0.0;
  for (std::size_t a = 0; a < pos.size(); ++a) v += q[a] / std::max((x - pos[a]).norm(), kEspSoftening);
  return v;
}

std::vector<double> charges_of(const Molecule& mol) {
  std::vector<double> q;
  q.reserve(mol.size());
  for (const auto& a : mol.atoms()) q.push_back(a.partial_charge);
  return q;
}

}  // namespace

ScalarGrid build_density_grid(const Molecule& mol, double spacing, double padding, std::size_t voxel_budget) {
  return build_density_grid(mol, fit_geometry(mol.positions(), spacing, padding, voxel_budget));
}

ScalarGrid build_density_grid(const Molecule& mol, const GridGeometry& geometry) {
  const auto pos = mol.positions();
  std::vector<double> weight, inv_two_sigma2;
  for (const auto& a : mol.atoms()) {
    const double s = density_sigma(a);
    weight.push_back(static_cast<double>(a.atomic_number));
    inv_two_sigma2.push_back(1.0 / (2.0 * s * s));
  }
  return fill_grid(geometry, FieldKind::density, [&](const Vec3& x) {
    double v = 0.0;
    for (std::size_t a = 0; a < pos.size(); ++a) v += weight[a] * std::exp(-(x - pos[a]).squaredNorm() * inv_two_sigma2[a]);
    return v;
  });
}

ScalarGrid build_esp_grid(const Molecule& mol, const GridGeometry& geometry) {
  const auto pos = mol.positions();
  const auto q = charges_of(mol);
  auto grid = fill_grid(geometry, FieldKind::esp, [&](const Vec3& x) { return esp_at(pos, q, x); });
  if (std::all_of(q.begin(), q.end(), [](double c) { return c == 0.0; }))
    grid.warnings.emplace_back("all partial charges are zero");
  return grid;
}

std::vector<double> perturbed_charges(const Molecule& mol, double shift) {
  auto q = charges_of(mol);
  std::vector<double> w(q.size(), 0.0);
  double total = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    const bool in_pool = shift > 0.0 ? q[a] < 0.0 : q[a] > 0.0;
    if (in_pool) {
      w[a] = std::abs(q[a]);
      total += w[a];
    }
  }
  if (total == 0.0) {
    std::fill(w.begin(), w.end(), 1.0);
    total = static_cast<double>(w.size());
  }
  for (std::size_t a = 0; a < q.size(); ++a) q[a] += shift * w[a] / total;
  return q;
}

ScalarGrid build_fukui_dual_grid(const Molecule& mol, const GridGeometry& geometry, double delta) {
  if (!(delta > 0.0)) throw PreconditionError("fukui delta must be positive");
  const auto pos = mol.positions();
  const auto q0 = charges_of(mol);
  const auto qp = perturbed_charges(mol, +delta);
  const auto qm = perturbed_charges(mol, -delta);
  const double inv_d2 = 1.0 / (delta * delta);
  auto grid = fill_grid(geometry, FieldKind::fukui_dual, [&](const Vec3& x) {
    return (esp_at(pos, qp, x) - 2.0 * esp_at(pos, q0, x) + esp_at(pos, qm, x)) * inv_d2;
  });
  if (std::all_of(q0.begin(), q0.end(), [](double c) { return c == 0.0; }))
    grid.warnings.emplace_back("all partial charges are zero");
  return grid;
}

namespace {

struct Cell {
  std::size_t i, j, k;
  double tx, ty, tz;
};

Cell locate(const GridGeometry& g, const Vec3& p) {
  if (!g.contains(p)) throw PreconditionError("sample point outside grid bounds");
  std::size_t idx[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    const double u = (p[a] - g.origin[a]) / g.spacing;
    const double max_cell = static_cast<double>(g.dims[a] - 2);
    const double c = std::clamp(std::floor(u), 0.0, max_cell);
    idx[a] = static_cast<std::size_t>(c);
    t[a] = std::clamp(u - c, 0.0, 1.0);
  }
  return {idx[0], idx[1], idx[2], t[0], t[1], t[2]};
}

template <typename V, typename F>
V trilinear(const Cell& c, F&& corner) {
  const V c00 = corner(c.i, c.j, c.k) * (1 - c.tx) + corner(c.i + 1, c.j, c.k) * c.tx;
  const V c10 = corner(c.i, c.j + 1, c.k) * (1 - c.tx) + corner(c.i + 1, c.j + 1, c.k) * c.tx;
  const V c01 = corner(c.i, c.j, c.k + 1) * (1 - c.tx) + corner(c.i + 1, c.j, c.k + 1) * c.tx;
  const V c11 = corner(c.i, c.j + 1, c.k + 1) * (1 - c.tx) + corner(c.i + 1, c.j + 1, c.k + 1) * c.tx;
  const V c0 = c00 * (1 - c.ty) + c10 * c.ty;
  const V c1 = c01 * (1 - c.ty) + c11 * c.ty;
  return c0 * (1 - c.tz) + c1 * c.tz;
}

}  // namespace

double trilinear_sample(const ScalarGrid& grid, const Vec3& point) {
  const Cell c = locate(grid.geometry, point);
  return trilinear<double>(c, [&](std::size_t i, std::size_t j, std::size_t k) { return grid.at(i, j, k); });
}

Vec3 sample_gradient(const ScalarGrid& grid, const Vec3& point) {
  const auto& g = grid.geometry;
  const Cell c = locate(g, point);
  auto node_gradient = [&](std::size_t i, std::size_t j, std::size_t k) -> Vec3 {
    const std::size_t n[3] = {i, j, k};
    Vec3 out;
    for (int a = 0; a < 3; ++a) {
      std::size_t lo[3] = {i, j, k}, hi[3] = {i, j, k};
      lo[a] = n[a] > 0 ? n[a] - 1 : n[a];
      hi[a] = n[a] + 1 < g.dims[a] ? n[a] + 1 : n[a];
      const double span = static_cast<double>(hi[a] - lo[a]) * g.spacing;
      out[a] = (grid.at(hi[0], hi[1], hi[2]) - grid.at(lo[0], lo[1], lo[2])) / span;
    }
    return out;
  };
  return trilinear<Vec3>(c, node_gradient);
}

}  // namespace amptcr
