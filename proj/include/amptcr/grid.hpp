#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "amptcr/geometry.hpp"
#include "amptcr/molecule.hpp"

namespace amptcr {

enum class FieldKind { density, esp, fukui_dual };

std::string to_string(FieldKind kind);

// Placement of a uniform axis-aligned lattice: node (i, j, k) sits at
// origin + spacing * (i, j, k).
struct GridGeometry {
  Vec3 origin = Vec3::Zero();
  double spacing = 1.0;
  std::array<std::size_t, 3> dims{2, 2, 2};

  std::size_t node_count() const noexcept { return dims[0] * dims[1] * dims[2]; }
  // x-fastest linear index.
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return i + dims[0] * (j + dims[1] * k);
  }
  Vec3 node(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return origin + spacing * Vec3(double(i), double(j), double(k));
  }
  Vec3 upper() const noexcept {
    return origin + spacing * Vec3(double(dims[0] - 1), double(dims[1] - 1), double(dims[2] - 1));
  }
  bool contains(const Vec3& p, double slack = 1e-9) const noexcept;
  void validate() const;
};

struct ScalarGrid {
  GridGeometry geometry;
  FieldKind kind = FieldKind::density;
  std::vector<double> values;  // x-fastest, size == geometry.node_count()
  std::vector<std::string> warnings;

  double at(std::size_t i, std::size_t j, std::size_t k) const { return values[geometry.index(i, j, k)]; }
  double min_value() const;
  double max_value() const;
  void validate() const;
};

inline constexpr double kDefaultSpacing = 0.4;          // Å
inline constexpr double kDefaultPadding = 4.0;          // Å
inline constexpr std::size_t kDefaultVoxelBudget = 10'000'000;
inline constexpr double kEspSoftening = 0.1;            // Å
inline constexpr double kDefaultFukuiDelta = 0.1;       // e

// Lattice covering the atoms' bounding box grown by `padding` on every side,
// centred on the box centre. Centring makes the node set symmetric under axis
// reflections of the box, so a mirrored molecule gets a mirrored lattice.
GridGeometry fit_geometry(const std::vector<Vec3>& points, double spacing, double padding,
                          std::size_t voxel_budget = kDefaultVoxelBudget);

// Gaussian pseudo-density: sum_a Z_a * exp(-|x - r_a|^2 / (2 sigma_a^2)),
// sigma_a = vdW radius / 2 (PQR radius when present).
ScalarGrid build_density_grid(const Molecule& mol, double spacing = kDefaultSpacing,
                              double padding = kDefaultPadding,
                              std::size_t voxel_budget = kDefaultVoxelBudget);
ScalarGrid build_density_grid(const Molecule& mol, const GridGeometry& geometry);

// Softened Coulomb potential sum_a q_a / max(|x - r_a|, 0.1 Å), in e/Å.
ScalarGrid build_esp_grid(const Molecule& mol, const GridGeometry& geometry);

// Charge vector after shifting the total charge by `shift`. A positive shift
// (electron removal) is drawn from the negatively charged atoms, a negative
// shift (electron addition) lands on the positively charged ones, each pool
// weighted by |q_a|. An empty pool falls back to a uniform spread.
std::vector<double> perturbed_charges(const Molecule& mol, double shift);

// Second charge-difference of the ESP: [V(+delta) - 2 V(0) + V(-delta)] / delta^2.
// Positive near electron-rich atoms, negative near electron-poor ones.
ScalarGrid build_fukui_dual_grid(const Molecule& mol, const GridGeometry& geometry,
                                 double delta = kDefaultFukuiDelta);

// Trilinear interpolation; throws PreconditionError outside the grid box.
double trilinear_sample(const ScalarGrid& grid, const Vec3& point);

// Gradient of the trilinear interpolant of central-difference node gradients.
Vec3 sample_gradient(const ScalarGrid& grid, const Vec3& point);

// Pseudo-density sigma for an atom.
double density_sigma(const Atom& atom);

}  // namespace amptcr
