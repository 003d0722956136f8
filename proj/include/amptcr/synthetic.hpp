#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amptcr/molecule.hpp"

namespace amptcr {

// Random covalent-looking cluster grown atom by atom: each new atom bonds to
// a random earlier atom at 1.40-1.60 Å and stays at least 1.30 Å from all
// others. Elements drawn from H, C, N, O, F, S, Cl with fixed weights.
Molecule random_cluster(std::size_t n_atoms, std::uint64_t seed, std::string name = "");

// `count` clusters with sizes uniform in [min_atoms, max_atoms], named
// "mol000", "mol001", ...
std::vector<Molecule> random_clusters(std::size_t count, std::size_t min_atoms, std::size_t max_atoms,
                                      std::uint64_t seed);

}  // namespace amptcr
