#include <doctest.h>

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>

#include "amptcr/error.hpp"
#include "amptcr/fingerprint.hpp"
#include "amptcr/synthetic.hpp"
#include "test_util.hpp"

using namespace amptcr;
using testutil::atom;

namespace {

Molecule permuted(const Molecule& mol, std::mt19937_64& rng) {
  std::vector<std::size_t> perm(mol.size());  // new index -> old index
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> where(mol.size());
  std::vector<Atom> atoms;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    where[perm[k]] = k;
    atoms.push_back(mol.atoms()[perm[k]]);
  }
  std::vector<Bond> bonds;
  for (const auto& [i, j] : mol.bonds()) bonds.emplace_back(std::min(where[i], where[j]), std::max(where[i], where[j]));
  std::shuffle(bonds.begin(), bonds.end(), rng);
  return Molecule(mol.name(), atoms, bonds);
}

std::size_t brute_popcount(const Fingerprint& f) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < f.size(); ++i) n += f.test(i);
  return n;
}

Fingerprint random_bits(std::mt19937_64& rng, std::size_t nbits, double density) {
  Fingerprint f(nbits, 2);
  std::bernoulli_distribution on(density);
  for (std::size_t i = 0; i < nbits; ++i)
    if (on(rng)) f.set(i);
  return f;
}

}  // namespace

TEST_CASE("atom order does not change the bits") {
  std::mt19937_64 rng(99);
  const auto fixtures = random_clusters(50, 5, 25, 123);
  for (const auto& mol : fixtures) {
    const auto bonded = derive_bonds(mol);
    const auto fp = morgan_fingerprint(bonded);
    CHECK(fp.popcount() > 0);
    CHECK(morgan_fingerprint(permuted(bonded, rng)) == fp);
  }
  const auto asym = derive_bonds(read_structure_file(testutil::data_path("asymmetric20.pdb")));
  CHECK(morgan_fingerprint(permuted(asym, rng)) == morgan_fingerprint(asym));
}

TEST_CASE("small molecules") {
  const Molecule carbon("c", {atom(6, 0, 0, 0)});
  CHECK(morgan_fingerprint(carbon, 0).popcount() == 1);

  const auto methane = derive_bonds(Molecule("ch4", {atom(6, 0, 0, 0), atom(1, 0.63, 0.63, 0.63), atom(1, -0.63, -0.63, 0.63),
                                                     atom(1, -0.63, 0.63, -0.63), atom(1, 0.63, -0.63, -0.63)}));
  const auto ethane = derive_bonds(Molecule("c2h6", {atom(6, 0, 0, 0), atom(6, 1.54, 0, 0), atom(1, -0.36, 1.03, 0),
                                                     atom(1, -0.36, -0.51, 0.89), atom(1, -0.36, -0.51, -0.89),
                                                     atom(1, 1.90, -1.03, 0), atom(1, 1.90, 0.51, 0.89),
                                                     atom(1, 1.90, 0.51, -0.89)}));
  const auto fm = morgan_fingerprint(methane), fe = morgan_fingerprint(ethane);
  CHECK(!(fm == fe));
  // hydrogens only enter through the count: methane is one heavy atom,
  // with one invariant per round
  CHECK(fm.popcount() == 3);
  CHECK(morgan_fingerprint(methane, 0).popcount() == 1);
  CHECK(tanimoto(fm, fe) < 1.0);

  CHECK_THROWS_AS(Fingerprint(1000, 2), PreconditionError);
  CHECK_THROWS_AS(morgan_fingerprint(carbon, -1), PreconditionError);
}

TEST_CASE("hex form round trips") {
  std::mt19937_64 rng(4);
  const auto f = random_bits(rng, 256, 0.3);
  const auto hex = f.to_hex();
  CHECK(hex.size() == 64);
  CHECK(Fingerprint::from_hex(hex, 2) == f);
  Fingerprint one(64, 2);
  one.set(0);
  one.set(9);
  CHECK(one.to_hex() == "0102000000000000");
}

TEST_CASE("tanimoto matches the popcount oracle") {
  std::mt19937_64 rng(8);
  Fingerprint empty(128, 2);
  CHECK(tanimoto(empty, empty) == 1.0);
  auto a = random_bits(rng, 128, 0.2);
  CHECK(tanimoto(a, a) == 1.0);
  Fingerprint left(128, 2), right(128, 2);
  left.set(3);
  right.set(4);
  CHECK(tanimoto(left, right) == 0.0);

  for (int t = 0; t < 200; ++t) {
    const auto x = random_bits(rng, 2048, 0.05 + 0.002 * t), y = random_bits(rng, 2048, 0.3);
    std::size_t both = 0, either = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      both += x.test(i) && y.test(i);
      either += x.test(i) || y.test(i);
    }
    CHECK(x.popcount() == brute_popcount(x));
    CHECK(tanimoto(x, y) == static_cast<double>(both) / static_cast<double>(either));
  }
  CHECK_THROWS_AS(tanimoto(Fingerprint(64, 2), Fingerprint(128, 2)), PreconditionError);
}
