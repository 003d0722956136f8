#include "amptcr/synthetic.hpp"

#include <cstdio>
#include <random>

#include "amptcr/error.hpp"
#include "amptcr/hash.hpp"

namespace amptcr {

Molecule random_cluster(std::size_t n_atoms, std::uint64_t seed, std::string name) {
  if (n_atoms < 1) throw PreconditionError("a cluster needs at least one atom");
  static constexpr int kElements[] = {1, 6, 7, 8, 9, 16, 17};
  std::discrete_distribution<int> pick_element({10, 40, 12, 14, 6, 8, 10});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> bond(1.40, 1.60);

  std::vector<Atom> atoms;
  Atom first;
  first.atomic_number = kElements[pick_element(rng)];
  atoms.push_back(first);
  while (atoms.size() < n_atoms) {
    std::uniform_int_distribution<std::size_t> anchor_dist(0, atoms.size() - 1);
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const Vec3& anchor = atoms[anchor_dist(rng)].position;
      Vec3 dir(normal(rng), normal(rng), normal(rng));
      if (dir.norm() < 1e-9) continue;
      const Vec3 pos = anchor + bond(rng) * dir.normalized();
      bool clash = false;
      for (const auto& a : atoms) clash = clash || (a.position - pos).norm() < 1.30;
      if (clash) continue;
      Atom a;
      a.atomic_number = kElements[pick_element(rng)];
      a.position = pos;
      atoms.push_back(a);
      placed = true;
    }
    if (!placed) throw NumericError("could not place atom in random cluster");
  }
  return Molecule(std::move(name), std::move(atoms));
}

std::vector<Molecule> random_clusters(std::size_t count, std::size_t min_atoms, std::size_t max_atoms,
                                      std::uint64_t seed) {
  if (min_atoms < 1 || max_atoms < min_atoms) throw PreconditionError("invalid cluster size range");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(min_atoms, max_atoms);
  std::vector<Molecule> out;
  char name[32];
  for (std::size_t i = 0; i < count; ++i) {
    std::snprintf(name, sizeof name, "mol%03zu", i);
    const std::size_t n = size(rng);
    out.push_back(random_cluster(n, combine_keys(seed, i), name));
  }
  return out;
}

}  // namespace amptcr
