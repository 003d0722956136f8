#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amptcr/alignment.hpp"
#include "amptcr/cloud.hpp"
#include "amptcr/fingerprint.hpp"
#include "amptcr/grid.hpp"
#include "amptcr/mesh.hpp"
#include "amptcr/molecule.hpp"
#include "amptcr/surface.hpp"
#include "amptcr/topology.hpp"

namespace amptcr {

// Frame the sampling lattice is laid in. `molecule` uses the atoms' own
// principal axes, so the lattice (and therefore the mesh) follows the
// molecule when it moves; `world` uses the input coordinate axes.
enum class GridFrame { molecule, world };

enum class ChargeMode { automatic, none, electronegativity };

struct SurfaceSettings {
  double spacing = kDefaultSpacing;
  double padding = kDefaultPadding;
  std::size_t voxel_budget = kDefaultVoxelBudget;
  double isovalue_factor = kDefaultIsovalueFactor;
  std::size_t n_points = kDefaultPointCount;
  FieldKind scalar = FieldKind::esp;  // esp or fukui_dual
  double fukui_delta = kDefaultFukuiDelta;
  GridFrame grid_frame = GridFrame::molecule;
  ChargeMode charges = ChargeMode::automatic;
  double bond_tolerance = kDefaultBondTolerance;
  TopologyConfig topology;
  int fp_radius = kDefaultFingerprintRadius;
  std::size_t fp_bits = kDefaultFingerprintBits;
  std::uint64_t seed = 0;

  void validate() const;
};

// Bonds derived when missing; charges assigned per `charges`. In automatic
// mode externally supplied charges (any non-zero) are kept, otherwise the
// electronegativity scheme runs.
Molecule prepare_molecule(const Molecule& mol, const SurfaceSettings& settings);

// Rotation and translation taking the molecule into its gridding frame
// (x_local = rotation * x + translation).
struct RigidMotion {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};
RigidMotion gridding_frame(const Molecule& mol);

struct SurfaceBuild {
  Molecule molecule;         // prepared (bonds, charges)
  SurfaceMesh mesh;          // input frame, scalars normalized
  SampledSurface sample;     // input frame
  std::vector<std::string> warnings;
};

// grids -> isosurface -> property annotation -> normalization -> sampling.
SurfaceBuild build_surface(const Molecule& prepared, const SurfaceSettings& settings);

struct CloudBuild {
  SurfaceBuild surface;
  AmptcrCloud cloud;
  Fingerprint fingerprint;
};

// Full per-molecule pipeline ending in an aligned cloud. An ambiguous
// alignment is recorded as a warning and resolved by centring only.
CloudBuild build_cloud(const Molecule& mol, const SurfaceSettings& settings, std::uint64_t config_hash = 0);

std::string scalar_kind_name(FieldKind kind);

}  // namespace amptcr
