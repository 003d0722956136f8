#include "amptcr/molecule.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "amptcr/elements.hpp"
#include "amptcr/error.hpp"

namespace amptcr {

Molecule::Molecule(std::string name, std::vector<Atom> atoms, std::vector<Bond> bonds)
    : name_(std::move(name)), atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
  if (atoms_.empty()) throw PreconditionError("molecule '" + name_ + "' has no atoms");
  for (const auto& a : atoms_) {
    if (!a.position.allFinite()) throw PreconditionError("non-finite atom position in '" + name_ + "'");
    element(a.atomic_number);  // range check
  }
  std::set<Bond> seen;
  for (const auto& [i, j] : bonds_) {
    if (i >= j) throw PreconditionError("bond indices must satisfy i < j");
    if (j >= atoms_.size()) throw PreconditionError("bond index out of range");
    if (!seen.insert({i, j}).second) throw PreconditionError("duplicate bond");
  }
}

std::vector<Vec3> Molecule::positions() const {
  std::vector<Vec3> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back(a.position);
  return out;
}

double Molecule::total_charge() const {
  double q = 0.0;
  for (const auto& a : atoms_) q += a.partial_charge;
  return q;
}

std::vector<std::vector<std::size_t>> Molecule::neighbors() const {
  std::vector<std::vector<std::size_t>> adj(atoms_.size());
  for (const auto& [i, j] : bonds_) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  for (auto& n : adj) std::sort(n.begin(), n.end());
  return adj;
}

Molecule Molecule::with_charges(const std::vector<double>& charges) const {
  if (charges.size() != atoms_.size()) throw PreconditionError("charge vector size mismatch");
  Molecule out = *this;
  for (std::size_t i = 0; i < charges.size(); ++i) out.atoms_[i].partial_charge = charges[i];
  return out;
}

Molecule Molecule::with_bonds(std::vector<Bond> bonds) const {
  return Molecule(name_, atoms_, std::move(bonds));
}

Molecule Molecule::transformed(const Mat3& rotation, const Vec3& translation) const {
  Molecule out = *this;
  for (auto& a : out.atoms_) a.position = rotation * a.position + translation;
  return out;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view columns(std::string_view line, std::size_t first, std::size_t last) {
  // 1-based inclusive column range, clipped to the line length.
  if (line.size() < first) return {};
  return line.substr(first - 1, std::min(last, line.size()) - first + 1);
}

double parse_double(std::string_view field, std::size_t line_no, const char* what) {
  field = trim(field);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v))
    throw ParseError(std::string("bad ") + what + " field '" + std::string(field) + "'", line_no);
  return v;
}

int lookup_element(std::string_view symbol, std::size_t line_no) {
  symbol = trim(symbol);
  if (!symbol.empty() && std::isdigit(static_cast<unsigned char>(symbol.front()))) {
    int z = 0;
    auto [ptr, ec] = std::from_chars(symbol.data(), symbol.data() + symbol.size(), z);
    if (ec == std::errc{} && ptr == symbol.data() + symbol.size() && z >= 1 && z <= 118) return z;
  }
  if (auto z = atomic_number_for(symbol)) return *z;
  throw ParseError("unknown element '" + std::string(symbol) + "'", line_no);
}

// Element from a PDB/PQR atom name when no element column is present.
std::string element_from_atom_name(std::string_view name) {
  static constexpr std::array<std::string_view, 11> kTwoLetter = {
      "CL", "BR", "NA", "MG", "ZN", "FE", "LI", "SE", "MN", "CU", "SI"};
  std::string letters;
  for (char c : name)
    if (std::isalpha(static_cast<unsigned char>(c)))
      letters += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    else if (!letters.empty())
      break;
  if (letters.size() >= 2) {
    const std::string two = letters.substr(0, 2);
    if (std::find(kTwoLetter.begin(), kTwoLetter.end(), two) != kTwoLetter.end()) return two;
  }
  return letters.substr(0, 1);
}

int parse_pdb_formal_charge(std::string_view field) {
  field = trim(field);
  if (field.size() != 2) return 0;
  const char digit = field[0], sign = field[1];
  if (!std::isdigit(static_cast<unsigned char>(digit)) || (sign != '+' && sign != '-')) return 0;
  return (sign == '-' ? -1 : 1) * (digit - '0');
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

bool is_atom_record(std::string_view line) {
  return line.starts_with("ATOM") || line.starts_with("HETATM");
}

std::vector<Atom> parse_pdb(std::string_view text) {
  std::vector<Atom> atoms;
  const auto lines = lines_of(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = lines[n];
    const std::size_t line_no = n + 1;
    if (!is_atom_record(line)) continue;
    if (line.size() < 54) throw ParseError("ATOM/HETATM record shorter than 54 columns", line_no);
    Atom a;
    a.position = {parse_double(columns(line, 31, 38), line_no, "x"),
                  parse_double(columns(line, 39, 46), line_no, "y"),
                  parse_double(columns(line, 47, 54), line_no, "z")};
    auto symbol = trim(columns(line, 77, 78));
    std::string inferred;
    if (symbol.empty()) {
      inferred = element_from_atom_name(columns(line, 13, 16));
      symbol = inferred;
    }
    a.atomic_number = lookup_element(symbol, line_no);
    a.formal_charge = parse_pdb_formal_charge(columns(line, 79, 80));
    atoms.push_back(a);
  }
  return atoms;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<Atom> parse_pqr(std::string_view text) {
  std::vector<Atom> atoms;
  const auto lines = lines_of(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = lines[n];
    const std::size_t line_no = n + 1;
    if (!is_atom_record(line)) continue;
    const auto f = split_ws(line);
    // ATOM serial name resName [chain] resSeq x y z charge radius
    if (f.size() < 10) throw ParseError("PQR record needs at least 10 fields", line_no);
    const std::size_t k = f.size();
    Atom a;
    a.position = {parse_double(f[k - 5], line_no, "x"), parse_double(f[k - 4], line_no, "y"),
                  parse_double(f[k - 3], line_no, "z")};
    a.partial_charge = parse_double(f[k - 2], line_no, "charge");
    a.radius = parse_double(f[k - 1], line_no, "radius");
    a.atomic_number = lookup_element(element_from_atom_name(f[2]), line_no);
    atoms.push_back(a);
  }
  return atoms;
}

std::vector<Atom> parse_xyz(std::string_view text, std::string& comment) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError("empty xyz input", 1);
  const auto count_field = trim(lines[0]);
  std::size_t count = 0;
  auto [ptr, ec] = std::from_chars(count_field.data(), count_field.data() + count_field.size(), count);
  if (ec != std::errc{} || ptr != count_field.data() + count_field.size())
    throw ParseError("first line must hold the atom count", 1);
  if (lines.size() < count + 2) throw ParseError("xyz file truncated", lines.size());
  comment = std::string(trim(lines[1]));
  std::vector<Atom> atoms;
  for (std::size_t n = 2; n < count + 2; ++n) {
    const auto f = split_ws(lines[n]);
    if (f.size() < 4) throw ParseError("coordinate line needs element x y z", n + 1);
    Atom a;
    a.atomic_number = lookup_element(f[0], n + 1);
    a.position = {parse_double(f[1], n + 1, "x"), parse_double(f[2], n + 1, "y"),
                  parse_double(f[3], n + 1, "z")};
    atoms.push_back(a);
  }
  return atoms;
}

}  // namespace

StructureFormat format_from_extension(std::string_view path) {
  std::string ext = std::filesystem::path(path).extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".pdb" || ext == ".ent") return StructureFormat::pdb;
  if (ext == ".pqr") return StructureFormat::pqr;
  if (ext == ".xyz") return StructureFormat::xyz;
  throw PreconditionError("unsupported structure extension '" + ext + "'");
}

Molecule parse_structure(std::string_view text, StructureFormat format, std::string name) {
  if (trim(text).empty()) throw ParseError("empty structure text");
  std::vector<Atom> atoms;
  switch (format) {
    case StructureFormat::pdb:
      atoms = parse_pdb(text);
      break;
    case StructureFormat::pqr:
      atoms = parse_pqr(text);
      break;
    case StructureFormat::xyz: {
      std::string comment;
      atoms = parse_xyz(text, comment);
      if (name.empty()) name = comment;
      break;
    }
  }
  if (atoms.empty()) throw ParseError("no ATOM/HETATM records found");
  if (name.empty()) name = "molecule";
  return Molecule(std::move(name), std::move(atoms));
}

Molecule read_structure_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_structure(ss.str(), format_from_extension(path),
                         std::filesystem::path(path).stem().string());
}

// ---------------------------------------------------------------------------

Molecule derive_bonds(const Molecule& mol, double tolerance) {
  const auto& atoms = mol.atoms();
  std::vector<Bond> bonds;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double ri = element(atoms[i].atomic_number).covalent_radius;
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      const double rj = element(atoms[j].atomic_number).covalent_radius;
      if ((atoms[i].position - atoms[j].position).norm() <= tolerance * (ri + rj)) bonds.emplace_back(i, j);
    }
  }
  return mol.with_bonds(std::move(bonds));
}

namespace {

constexpr double kHardness = 4.0;  // Pauling units per elementary charge
constexpr double kFallbackElectronegativity = 2.2;
constexpr double kDamping = 0.5;
constexpr double kChargeTolerance = 1e-6;
constexpr int kMaxChargeIterations = 500;

double electronegativity(int z) {
  const double chi = element(z).electronegativity;
  return chi > 0.0 ? chi : kFallbackElectronegativity;
}

}  // namespace

Molecule assign_charges(const Molecule& mol, ChargeScheme scheme) {
  if (scheme == ChargeScheme::none) return mol;

  const auto& atoms = mol.atoms();
  std::vector<double> q(atoms.size()), chi0(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    q[i] = atoms[i].formal_charge;
    chi0[i] = electronegativity(atoms[i].atomic_number);
  }
  std::vector<double> dq(atoms.size());
  double damping = 1.0;
  for (int it = 1; it <= kMaxChargeIterations; ++it) {
    damping *= kDamping;
    std::fill(dq.begin(), dq.end(), 0.0);
    for (const auto& [i, j] : mol.bonds()) {
      // Positive transfer moves charge +t onto i (i loses electrons to j).
      const double chi_i = chi0[i] + kHardness * q[i];
      const double chi_j = chi0[j] + kHardness * q[j];
      const double t = damping * (chi_j - chi_i) / (2.0 * kHardness);
      dq[i] += t;
      dq[j] -= t;
    }
    double max_update = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] += dq[i];
      max_update = std::max(max_update, std::abs(dq[i]));
    }
    if (max_update < kChargeTolerance) return mol.with_charges(q);
  }
  throw NumericError("charge equilibration did not converge in " + std::to_string(kMaxChargeIterations) +
                     " iterations");
}

double molecular_weight(const Molecule& mol) {
  double w = 0.0;
  for (const auto& a : mol.atoms()) w += element(a.atomic_number).mass;
  return w;
}

std::string format_pdb(const Molecule& mol) {
  std::string out;
  char line[96];
  for (std::size_t i = 0; i < mol.size(); ++i) {
    const auto& a = mol.atoms()[i];
    const std::string sym(element(a.atomic_number).symbol);
    std::string charge = "  ";
    if (a.formal_charge != 0 && std::abs(a.formal_charge) < 10)
      charge = std::to_string(std::abs(a.formal_charge)) + (a.formal_charge < 0 ? "-" : "+");
    std::snprintf(line, sizeof line, "HETATM%5zu %-4s MOL A   1    %8.3f%8.3f%8.3f  1.00  0.00          %2s%2s\n",
                  (i + 1) % 100000, sym.c_str(), a.position.x(), a.position.y(), a.position.z(), sym.c_str(),
                  charge.c_str());
    out += line;
  }
  out += "END\n";
  return out;
}

}  // namespace amptcr
