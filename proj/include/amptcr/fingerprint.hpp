#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "amptcr/molecule.hpp"

namespace amptcr {

inline constexpr std::size_t kDefaultFingerprintBits = 2048;
inline constexpr int kDefaultFingerprintRadius = 2;

// Fixed-length bitset. Bit i lives in words[i / 64] at position i % 64.
class Fingerprint {
 public:
  Fingerprint() : Fingerprint(kDefaultFingerprintBits, kDefaultFingerprintRadius) {}
  Fingerprint(std::size_t nbits, int radius);

  std::size_t size() const noexcept { return nbits_; }
  int radius() const noexcept { return radius_; }
  bool test(std::size_t i) const;
  void set(std::size_t i);
  std::size_t popcount() const noexcept;
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  // Lowercase hex, two characters per byte, byte b holding bits 8b..8b+7
  // with bit 8b as its least significant bit.
  std::string to_hex() const;
  static Fingerprint from_hex(std::string_view hex, int radius = kDefaultFingerprintRadius);

  bool operator==(const Fingerprint&) const = default;

 private:
  std::size_t nbits_;
  int radius_;
  std::vector<std::uint64_t> words_;
};

// Circular fingerprint over heavy atoms. Initial invariant hashes (atomic
// number, heavy-atom degree, formal charge, attached hydrogens); each round
// hashes the prior invariant with the sorted neighbour invariants, each paired
// with a constant bond placeholder since bond orders are not perceived. Every
// invariant from round 0 through `radius` sets bit (invariant mod nbits).
// Bonds must already be present on the molecule.
Fingerprint morgan_fingerprint(const Molecule& mol, int radius = kDefaultFingerprintRadius,
                               std::size_t nbits = kDefaultFingerprintBits);

// |a & b| / |a | b|, with two empty fingerprints scoring 1.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

}  // namespace amptcr
