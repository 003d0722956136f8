#include "amptcr/elements.hpp"

#include <cctype>
#include <iterator>
#include <string>

#include "amptcr/error.hpp"

namespace amptcr {

namespace {

// Masses: IUPAC standard atomic weights. Covalent radii: Cordero et al.
// (single-bond sp3 value for carbon), Pyykko where Cordero has none.
// van der Waals radii: Bondi where tabulated, otherwise Alvarez/Batsanov,
// 2.0 Å for elements without data.
constexpr ElementData kElements[] = {
    {"H", 1, 1.008, 0.31, 1.2, 2.2},
    {"He", 2, 4.002602, 0.28, 1.4, 0.0},
    {"Li", 3, 6.94, 1.28, 1.81, 0.98},
    {"Be", 4, 9.0121831, 0.96, 1.53, 1.57},
    {"B", 5, 10.81, 0.84, 1.92, 2.04},
    {"C", 6, 12.011, 0.76, 1.7, 2.55},
    {"N", 7, 14.007, 0.71, 1.55, 3.04},
    {"O", 8, 15.999, 0.66, 1.52, 3.44},
    {"F", 9, 18.998403163, 0.57, 1.47, 3.98},
    {"Ne", 10, 20.1797, 0.58, 1.54, 0.0},
    {"Na", 11, 22.98976928, 1.66, 2.27, 0.93},
    {"Mg", 12, 24.305, 1.41, 1.73, 1.31},
    {"Al", 13, 26.9815385, 1.21, 1.84, 1.61},
    {"Si", 14, 28.085, 1.11, 2.1, 1.9},
    {"P", 15, 30.973761998, 1.07, 1.8, 2.19},
    {"S", 16, 32.06, 1.05, 1.8, 2.58},
    {"Cl", 17, 35.45, 1.02, 1.75, 3.16},
    {"Ar", 18, 39.948, 1.06, 1.88, 0.0},
    {"K", 19, 39.0983, 2.03, 2.75, 0.82},
    {"Ca", 20, 40.078, 1.76, 2.31, 1.0},
    {"Sc", 21, 44.955908, 1.7, 2.15, 1.36},
    {"Ti", 22, 47.867, 1.6, 2.11, 1.54},
    {"V", 23, 50.9415, 1.53, 2.07, 1.63},
    {"Cr", 24, 51.9961, 1.39, 2.06, 1.66},
    {"Mn", 25, 54.938044, 1.5, 2.05, 1.55},
    {"Fe", 26, 55.845, 1.42, 2.04, 1.83},
    {"Co", 27, 58.933194, 1.38, 2.0, 1.88},
    {"Ni", 28, 58.6934, 1.24, 1.97, 1.91},
    {"Cu", 29, 63.546, 1.32, 1.96, 1.9},
    {"Zn", 30, 65.38, 1.22, 2.01, 1.65},
    {"Ga", 31, 69.723, 1.22, 1.87, 1.81},
    {"Ge", 32, 72.63, 1.2, 2.11, 2.01},
    {"As", 33, 74.921595, 1.19, 1.85, 2.18},
    {"Se", 34, 78.971, 1.2, 1.9, 2.55},
    {"Br", 35, 79.904, 1.2, 1.83, 2.96},
    {"Kr", 36, 83.798, 1.16, 2.02, 0.0},
    {"Rb", 37, 85.4678, 2.2, 3.03, 0.82},
    {"Sr", 38, 87.62, 1.95, 2.49, 0.95},
    {"Y", 39, 88.90584, 1.9, 2.32, 1.22},
    {"Zr", 40, 91.224, 1.75, 2.23, 1.33},
    {"Nb", 41, 92.90637, 1.64, 2.18, 1.6},
    {"Mo", 42, 95.95, 1.54, 2.17, 2.16},
    {"Tc", 43, 97.90721, 1.47, 2.16, 2.1},
    {"Ru", 44, 101.07, 1.46, 2.13, 2.2},
    {"Rh", 45, 102.9055, 1.42, 2.1, 2.28},
    {"Pd", 46, 106.42, 1.39, 2.1, 2.2},
    {"Ag", 47, 107.8682, 1.45, 2.11, 1.93},
    {"Cd", 48, 112.414, 1.44, 2.18, 1.69},
    {"In", 49, 114.818, 1.42, 1.93, 1.78},
    {"Sn", 50, 118.71, 1.39, 2.17, 1.96},
    {"Sb", 51, 121.76, 1.39, 2.06, 2.05},
    {"Te", 52, 127.6, 1.38, 2.06, 2.1},
    {"I", 53, 126.90447, 1.39, 1.98, 2.66},
    {"Xe", 54, 131.293, 1.4, 2.16, 2.6},
    {"Cs", 55, 132.90545196, 2.44, 3.43, 0.79},
    {"Ba", 56, 137.327, 2.15, 2.68, 0.89},
    {"La", 57, 138.90547, 2.07, 2.43, 1.1},
    {"Ce", 58, 140.116, 2.04, 2.42, 1.12},
    {"Pr", 59, 140.90766, 2.03, 2.4, 1.13},
    {"Nd", 60, 144.242, 2.01, 2.39, 1.14},
    {"Pm", 61, 144.91276, 1.99, 2.38, 0.0},
    {"Sm", 62, 150.36, 1.98, 2.36, 1.17},
    {"Eu", 63, 151.964, 1.98, 2.35, 0.0},
    {"Gd", 64, 157.25, 1.96, 2.34, 1.2},
    {"Tb", 65, 158.92535, 1.94, 2.33, 0.0},
    {"Dy", 66, 162.5, 1.92, 2.31, 1.22},
    {"Ho", 67, 164.93033, 1.92, 2.3, 1.23},
    {"Er", 68, 167.259, 1.89, 2.29, 1.24},
    {"Tm", 69, 168.93422, 1.9, 2.27, 1.25},
    {"Yb", 70, 173.045, 1.87, 2.26, 0.0},
    {"Lu", 71, 174.9668, 1.87, 2.24, 1.0},
    {"Hf", 72, 178.49, 1.75, 2.23, 1.3},
    {"Ta", 73, 180.94788, 1.7, 2.22, 1.5},
    {"W", 74, 183.84, 1.62, 2.18, 1.7},
    {"Re", 75, 186.207, 1.51, 2.16, 1.9},
    {"Os", 76, 190.23, 1.44, 2.16, 2.2},
    {"Ir", 77, 192.217, 1.41, 2.13, 2.2},
    {"Pt", 78, 195.084, 1.36, 2.13, 2.2},
    {"Au", 79, 196.966569, 1.36, 2.14, 2.4},
    {"Hg", 80, 200.592, 1.32, 2.23, 1.9},
    {"Tl", 81, 204.38, 1.45, 1.96, 1.8},
    {"Pb", 82, 207.2, 1.46, 2.02, 1.8},
    {"Bi", 83, 208.9804, 1.48, 2.07, 1.9},
    {"Po", 84, 209.0, 1.4, 1.97, 2.0},
    {"At", 85, 210.0, 1.5, 2.02, 2.2},
    {"Rn", 86, 222.0, 1.5, 2.2, 0.0},
    {"Fr", 87, 223.0, 2.6, 3.48, 0.7},
    {"Ra", 88, 226.0, 2.21, 2.83, 0.9},
    {"Ac", 89, 227.0, 2.15, 2.47, 1.1},
    {"Th", 90, 232.0377, 2.06, 2.45, 1.3},
    {"Pa", 91, 231.03588, 2.0, 2.43, 1.5},
    {"U", 92, 238.02891, 1.96, 2.41, 1.7},
    {"Np", 93, 237.0, 1.9, 2.39, 1.3},
    {"Pu", 94, 244.0, 1.87, 2.43, 1.3},
    {"Am", 95, 243.0, 1.8, 2.44, 0.0},
    {"Cm", 96, 247.0, 1.69, 2.45, 0.0},
    {"Bk", 97, 247.0, 1.68, 2.44, 0.0},
    {"Cf", 98, 251.0, 1.68, 2.45, 0.0},
    {"Es", 99, 252.0, 1.65, 2.45, 0.0},
    {"Fm", 100, 257.0, 1.67, 2.45, 0.0},
    {"Md", 101, 258.0, 1.73, 2.46, 0.0},
    {"No", 102, 259.0, 1.76, 2.46, 0.0},
    {"Lr", 103, 262.0, 1.61, 2.46, 0.0},
    {"Rf", 104, 267.0, 1.57, 2.0, 0.0},
    {"Db", 105, 268.0, 1.49, 2.0, 0.0},
    {"Sg", 106, 271.0, 1.43, 2.0, 0.0},
    {"Bh", 107, 274.0, 1.41, 2.0, 0.0},
    {"Hs", 108, 269.0, 1.34, 2.0, 0.0},
    {"Mt", 109, 276.0, 1.29, 2.0, 0.0},
    {"Ds", 110, 281.0, 1.28, 2.0, 0.0},
    {"Rg", 111, 281.0, 1.21, 2.0, 0.0},
    {"Cn", 112, 285.0, 1.22, 2.0, 0.0},
    {"Nh", 113, 286.0, 1.36, 2.0, 0.0},
    {"Fl", 114, 289.0, 1.43, 2.0, 0.0},
    {"Mc", 115, 288.0, 1.62, 2.0, 0.0},
    {"Lv", 116, 293.0, 1.75, 2.0, 0.0},
    {"Ts", 117, 294.0, 1.65, 2.0, 0.0},
    {"Og", 118, 294.0, 1.57, 2.0, 0.0},
};

static_assert(std::size(kElements) == 118);

}  // namespace

std::span<const ElementData> element_table() { return kElements; }

std::optional<int> atomic_number_for(std::string_view symbol) {
  if (symbol.empty() || symbol.size() > 3) return std::nullopt;
  std::string canon;
  canon += static_cast<char>(std::toupper(static_cast<unsigned char>(symbol[0])));
  for (std::size_t i = 1; i < symbol.size(); ++i)
    canon += static_cast<char>(std::tolower(static_cast<unsigned char>(symbol[i])));
  for (const auto& e : kElements)
    if (e.symbol == canon) return e.atomic_number;
  return std::nullopt;
}

const ElementData& element(int atomic_number) {
  if (atomic_number < 1 || atomic_number > 118)
    throw PreconditionError("atomic number out of range: " + std::to_string(atomic_number));
  return kElements[atomic_number - 1];
}

}  // namespace amptcr
