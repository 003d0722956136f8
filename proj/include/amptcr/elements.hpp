#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace amptcr {

struct ElementData {
  std::string_view symbol;
  int atomic_number;
  double mass;              // standard atomic weight, amu
  double covalent_radius;   // Å
  double vdw_radius;        // Å
  double electronegativity; // Pauling; 0 where undefined
};

// Table for H (1) through Og (118), indexed by atomic_number - 1.
std::span<const ElementData> element_table();

// Case-insensitive symbol lookup ("CL", "cl", "Cl" all resolve).
std::optional<int> atomic_number_for(std::string_view symbol);

const ElementData& element(int atomic_number);

}  // namespace amptcr
