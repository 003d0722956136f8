#include "amptcr/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "amptcr/error.hpp"

namespace amptcr {

void SurfaceSettings::validate() const {
  if (!(spacing > 0.0)) throw PreconditionError("spacing must be positive");
  if (!(padding >= 0.0)) throw PreconditionError("padding must be non-negative");
  if (!(isovalue_factor > 0.0 && isovalue_factor < 1.0)) throw PreconditionError("isovalue factor must lie in (0, 1)");
  if (n_points < 8) throw PreconditionError("n_points must be at least 8");
  if (scalar != FieldKind::esp && scalar != FieldKind::fukui_dual)
    throw PreconditionError("scalar kind must be esp or fukui_dual");
  if (!(fukui_delta > 0.0)) throw PreconditionError("fukui delta must be positive");
  if (!(bond_tolerance > 0.0)) throw PreconditionError("bond tolerance must be positive");
  topology.validate();
  Fingerprint(fp_bits, fp_radius);
}

std::string scalar_kind_name(FieldKind kind) { return to_string(kind); }

Molecule prepare_molecule(const Molecule& mol, const SurfaceSettings& settings) {
  Molecule out = mol.bonds().empty() ? derive_bonds(mol, settings.bond_tolerance) : mol;
  const bool has_charges =
      std::any_of(out.atoms().begin(), out.atoms().end(), [](const Atom& a) { return a.partial_charge != 0.0; });
  switch (settings.charges) {
    case ChargeMode::none:
      return out;
    case ChargeMode::electronegativity:
      return assign_charges(out, ChargeScheme::electronegativity);
    case ChargeMode::automatic:
      return has_charges ? out : assign_charges(out, ChargeScheme::electronegativity);
  }
  return out;
}

RigidMotion gridding_frame(const Molecule& mol) {
  // Atomic-number weighted principal axes; each axis oriented by the weighted
  // third moment. Symmetric molecules keep whatever the eigensolver returns.
  double total = 0.0;
  Vec3 c = Vec3::Zero();
  for (const auto& a : mol.atoms()) {
    total += a.atomic_number;
    c += a.atomic_number * a.position;
  }
  c /= total;
  Mat3 cov = Mat3::Zero();
  for (const auto& a : mol.atoms()) cov += a.atomic_number * (a.position - c) * (a.position - c).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov / total);

  RigidMotion m;
  for (int k = 0; k < 3; ++k) {
    Vec3 axis = eig.eigenvectors().col(2 - k);
    double moment = 0.0;
    for (const auto& a : mol.atoms()) moment += a.atomic_number * std::pow((a.position - c).dot(axis), 3);
    if (moment < -1e-9) axis = -axis;
    m.rotation.row(k) = axis.transpose();
  }
  if (m.rotation.determinant() < 0.0) m.rotation.row(2) *= -1.0;
  m.translation = -(m.rotation * c);
  return m;
}

SurfaceBuild build_surface(const Molecule& prepared, const SurfaceSettings& settings) {
  settings.validate();
  SurfaceBuild out;
  out.molecule = prepared;

  RigidMotion frame;
  if (settings.grid_frame == GridFrame::molecule) frame = gridding_frame(prepared);
  const Molecule local = prepared.transformed(frame.rotation, frame.translation);

  const auto geometry = fit_geometry(local.positions(), settings.spacing, settings.padding, settings.voxel_budget);
  const ScalarGrid density = build_density_grid(local, geometry);
  const ScalarGrid property = settings.scalar == FieldKind::esp
                                  ? build_esp_grid(local, geometry)
                                  : build_fukui_dual_grid(local, geometry, settings.fukui_delta);
  for (const auto& w : property.warnings) out.warnings.push_back(w);

  SurfaceMesh mesh = marching_cubes(density, settings.isovalue_factor * density.max_value());
  mesh = normalize_scalars(annotate_scalars(mesh, property));
  // Back to the input frame: x = R^T (x_local - t).
  const Mat3 back = frame.rotation.transpose();
  out.mesh = transformed(mesh, back, -(back * frame.translation));

  if (settings.n_points > out.mesh.vertices.size())
    throw PreconditionError("requested " + std::to_string(settings.n_points) + " points but the mesh has only " +
                            std::to_string(out.mesh.vertices.size()) + " vertices");
  out.sample = farthest_point_sample(out.mesh, settings.n_points, settings.seed);
  return out;
}

CloudBuild build_cloud(const Molecule& mol, const SurfaceSettings& settings, std::uint64_t config_hash) {
  CloudBuild out;
  out.surface = build_surface(prepare_molecule(mol, settings), settings);
  const auto& sample = out.surface.sample;

  AmptcrCloud& cloud = out.cloud;
  cloud.positions = sample.positions;
  cloud.scalars = sample.scalars;
  cloud.meta.name = mol.name();
  cloud.meta.scalar_kind = scalar_kind_name(settings.scalar);
  cloud.meta.channels = topology_channel_names(settings.topology.radii);
  cloud.meta.config_hash = config_hash;
  cloud.meta.warnings = out.surface.warnings;

  const auto descriptors = topology_vectors(out.surface.mesh, sample.source_vertex, settings.topology);
  cloud.topo.resize(static_cast<Eigen::Index>(sample.size()),
                    static_cast<Eigen::Index>(topology_channel_count(settings.topology.radii.size())));
  std::size_t empty_rings = 0, curvature_failures = 0;
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    const auto ch = descriptors[i].channels();
    for (std::size_t c = 0; c < ch.size(); ++c) cloud.topo(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = ch[c];
    empty_rings += descriptors[i].empty_ring;
    curvature_failures += descriptors[i].curvature_failed;
  }
  if (empty_rings) cloud.meta.warnings.push_back("empty rings at " + std::to_string(empty_rings) + " points");
  if (curvature_failures)
    cloud.meta.warnings.push_back("curvature fit failed at " + std::to_string(curvature_failures) + " points");

  CanonicalFrame frame;
  try {
    frame = canonical_frame(cloud.positions, cloud.scalars);
  } catch (const AmbiguousAlignment& e) {
    cloud.meta.warnings.push_back(e.what());
    frame.translation = -centroid(cloud.positions);
  }
  cloud = apply_frame(std::move(cloud), frame);

  out.fingerprint = morgan_fingerprint(out.surface.molecule, settings.fp_radius, settings.fp_bits);
  cloud.meta.fingerprint_hex = out.fingerprint.to_hex();
  cloud.validate();
  return out;
}

}  // namespace amptcr
