#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "amptcr/geometry.hpp"

namespace amptcr {

struct Atom {
  int atomic_number = 0;
  Vec3 position = Vec3::Zero();  // Å
  double partial_charge = 0.0;   // e
  int formal_charge = 0;
  std::optional<double> radius;  // Å, from PQR input only
};

using Bond = std::pair<std::size_t, std::size_t>;  // first < second

class Molecule {
 public:
  Molecule() = default;
  // Validates: at least one atom, finite positions, well-formed bond list.
  Molecule(std::string name, std::vector<Atom> atoms, std::vector<Bond> bonds = {});

  const std::string& name() const noexcept { return name_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<Bond>& bonds() const noexcept { return bonds_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  std::vector<Vec3> positions() const;
  double total_charge() const;

  // Adjacency lists built from the bond list, sorted ascending.
  std::vector<std::vector<std::size_t>> neighbors() const;

  Molecule with_charges(const std::vector<double>& charges) const;
  Molecule with_bonds(std::vector<Bond> bonds) const;
  // Applies x -> rotation * x + translation to every atom.
  Molecule transformed(const Mat3& rotation, const Vec3& translation) const;

 private:
  std::string name_;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
};

enum class StructureFormat { pdb, pqr, xyz };

StructureFormat format_from_extension(std::string_view path);

// Parses structure text. PDB atoms keep partial_charge = 0 until charges are
// assigned; PQR charge and radius columns are read as given. Bonds are never
// read from the file: call derive_bonds.
Molecule parse_structure(std::string_view text, StructureFormat format, std::string name = "");

// Reads a file and dispatches on its extension. The molecule name is the file stem.
Molecule read_structure_file(const std::string& path);

inline constexpr double kDefaultBondTolerance = 1.2;

// Bond (i, j) iff |r_i - r_j| <= tolerance * (cov_i + cov_j).
Molecule derive_bonds(const Molecule& mol, double tolerance = kDefaultBondTolerance);

enum class ChargeScheme { none, electronegativity };

// `electronegativity` runs damped pairwise charge equilibration over the bond
// graph; electrons flow toward the atom whose charge-dependent
// electronegativity chi0 + hardness * q is higher. Total charge is conserved.
Molecule assign_charges(const Molecule& mol, ChargeScheme scheme);

double molecular_weight(const Molecule& mol);

// HETATM records with element symbols in columns 77-78, coordinates to 3
// decimals, then END.
std::string format_pdb(const Molecule& mol);

}  // namespace amptcr
