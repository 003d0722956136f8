#include <doctest.h>

#include <cmath>

#include "amptcr/elements.hpp"
#include "amptcr/error.hpp"
#include "amptcr/molecule.hpp"
#include "test_util.hpp"

using namespace amptcr;
using testutil::atom;

TEST_CASE("pdb fixed columns give one oxygen at the origin") {
  const auto mol = parse_structure(
      "ATOM      1  O   HOH A   1       0.000   0.000   0.000  1.00  0.00           O\n", StructureFormat::pdb);
  REQUIRE(mol.size() == 1);
  CHECK(mol.atoms()[0].atomic_number == 8);
  CHECK(mol.atoms()[0].position.norm() == 0.0);
  CHECK(mol.atoms()[0].partial_charge == 0.0);
}

TEST_CASE("xyz text gives one hydrogen") {
  const auto mol = parse_structure("1\n\nH 0 0 0\n", StructureFormat::xyz);
  REQUIRE(mol.size() == 1);
  CHECK(mol.atoms()[0].atomic_number == 1);
}

TEST_CASE("pqr charge and radius columns are read as given") {
  const auto mol = parse_structure("ATOM      1  OW  HOH     1       1.000   2.000   3.000 -0.834 1.7683\n",
                                   StructureFormat::pqr);
  REQUIRE(mol.size() == 1);
  CHECK(mol.atoms()[0].partial_charge == doctest::Approx(-0.834).epsilon(1e-15));
  REQUIRE(mol.atoms()[0].radius.has_value());
  CHECK(*mol.atoms()[0].radius == doctest::Approx(1.7683));
  CHECK(assign_charges(mol, ChargeScheme::none).atoms()[0].partial_charge == mol.atoms()[0].partial_charge);
}

TEST_CASE("parse errors carry a line number or name the symbol") {
  try {
    parse_structure("ATOM      1  O   HOH A   1       0.000   abc     0.000  1.00  0.00           O\n",
                    StructureFormat::pdb);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
  try {
    parse_structure("1\n\nXq 0 0 0\n", StructureFormat::xyz);
    FAIL("expected an unknown element error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("Xq") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_structure("", StructureFormat::xyz), ParseError);
}

TEST_CASE("bond derivation follows the covalent radius sum") {
  // 2 * 0.31 * 1.2 = 0.744 >= 0.74
  const Molecule h2("h2", {atom(1, 0, 0, 0), atom(1, 0, 0, 0.74)});
  CHECK(derive_bonds(h2).bonds().size() == 1);
  const Molecule far("far", {atom(1, 0, 0, 0), atom(1, 10, 0, 0)});
  CHECK(derive_bonds(far).bonds().empty());

  const double a = 104.5 * M_PI / 360.0;
  const Molecule water("water", {atom(8, 0, 0, 0), atom(1, 0.96 * std::sin(a), 0.96 * std::cos(a), 0),
                                 atom(1, -0.96 * std::sin(a), 0.96 * std::cos(a), 0)});
  const auto bonded = derive_bonds(water);
  REQUIRE(bonded.bonds().size() == 2);
  for (const auto& [i, j] : bonded.bonds()) CHECK(bonded.atoms()[i].atomic_number + bonded.atoms()[j].atomic_number == 9);
}

TEST_CASE("electronegativity charges: symmetry, ordering, conservation") {
  const auto h2 = assign_charges(derive_bonds(Molecule("h2", {atom(1, 0, 0, 0), atom(1, 0, 0, 0.74)})),
                                 ChargeScheme::electronegativity);
  CHECK(h2.atoms()[0].partial_charge == 0.0);
  CHECK(h2.atoms()[1].partial_charge == 0.0);

  const auto hf = assign_charges(derive_bonds(Molecule("hf", {atom(1, 0, 0, 0), atom(9, 0, 0, 0.92)})),
                                 ChargeScheme::electronegativity);
  CHECK(hf.atoms()[0].partial_charge > 0.0);
  CHECK(hf.atoms()[1].partial_charge < 0.0);
  CHECK(std::abs(hf.total_charge()) < 1e-12);

  const auto mol = assign_charges(derive_bonds(read_structure_file(testutil::data_path("asymmetric20.pdb"))),
                                  ChargeScheme::electronegativity);
  CHECK(std::abs(mol.total_charge()) < 1e-9);
}

TEST_CASE("molecular weight from the standard mass table") {
  const Molecule water("water", {atom(8, 0, 0, 0), atom(1, 0.96, 0, 0), atom(1, -0.24, 0.93, 0)});
  CHECK(std::abs(molecular_weight(water) - 18.015) < 0.01);
  CHECK(molecular_weight(Molecule("h", {atom(1, 0, 0, 0)})) == doctest::Approx(1.008).epsilon(1e-12));
  CHECK_THROWS_AS(Molecule("empty", {}), PreconditionError);
}

TEST_CASE("element symbols resolve case-insensitively") {
  CHECK(atomic_number_for("CL") == 17);
  CHECK(atomic_number_for("cl") == 17);
  CHECK(!atomic_number_for("Zz").has_value());
  CHECK(element_table().size() == 118);
}

TEST_CASE("format_pdb round-trips through the parser") {
  const auto mol = read_structure_file(testutil::data_path("asymmetric20.pdb"));
  CHECK(mol.size() == 20);
  const auto again = parse_structure(format_pdb(mol), StructureFormat::pdb, "again");
  REQUIRE(again.size() == mol.size());
  for (std::size_t i = 0; i < mol.size(); ++i) {
    CHECK(again.atoms()[i].atomic_number == mol.atoms()[i].atomic_number);
    CHECK((again.atoms()[i].position - mol.atoms()[i].position).norm() < 1e-3);
  }
}
