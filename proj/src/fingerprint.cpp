#include "amptcr/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <charconv>

#include "amptcr/error.hpp"
#include "amptcr/hash.hpp"

namespace amptcr {

namespace {
constexpr std::uint64_t kBondPlaceholder = 1;
}

Fingerprint::Fingerprint(std::size_t nbits, int radius) : nbits_(nbits), radius_(radius) {
  if (nbits == 0 || !std::has_single_bit(nbits)) throw PreconditionError("fingerprint length must be a power of two");
  if (radius < 0) throw PreconditionError("fingerprint radius must be non-negative");
  words_.assign((nbits + 63) / 64, 0);
}

bool Fingerprint::test(std::size_t i) const {
  if (i >= nbits_) throw PreconditionError("fingerprint bit index out of range");
  return (words_[i / 64] >> (i % 64)) & 1U;
}

void Fingerprint::set(std::size_t i) {
  if (i >= nbits_) throw PreconditionError("fingerprint bit index out of range");
  words_[i / 64] |= std::uint64_t{1} << (i % 64);
}

std::size_t Fingerprint::popcount() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::string Fingerprint::to_hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  const std::size_t nbytes = (nbits_ + 7) / 8;
  out.reserve(2 * nbytes);
  for (std::size_t b = 0; b < nbytes; ++b) {
    const auto byte = static_cast<unsigned>((words_[b / 8] >> (8 * (b % 8))) & 0xffU);
    out.push_back(digits[byte >> 4]);
    out.push_back(digits[byte & 0xfU]);
  }
  return out;
}

Fingerprint Fingerprint::from_hex(std::string_view hex, int radius) {
  if (hex.empty() || hex.size() % 2 != 0) throw FormatError("fingerprint hex must have an even, non-zero length");
  Fingerprint fp(hex.size() * 4, radius);
  for (std::size_t b = 0; b < hex.size() / 2; ++b) {
    unsigned byte = 0;
    const char* first = hex.data() + 2 * b;
    auto [ptr, ec] = std::from_chars(first, first + 2, byte, 16);
    if (ec != std::errc{} || ptr != first + 2) throw FormatError("invalid fingerprint hex digit");
    fp.words_[b / 8] |= static_cast<std::uint64_t>(byte) << (8 * (b % 8));
  }
  return fp;
}

Fingerprint morgan_fingerprint(const Molecule& mol, int radius, std::size_t nbits) {
  Fingerprint fp(nbits, radius);
  const auto nbrs = mol.neighbors();
  const auto& atoms = mol.atoms();

  std::vector<std::size_t> heavy;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (atoms[i].atomic_number > 1) heavy.push_back(i);

  std::vector<std::uint64_t> inv(atoms.size(), 0);
  for (auto i : heavy) {
    std::int64_t degree = 0, hydrogens = 0;
    for (auto j : nbrs[i]) (atoms[j].atomic_number > 1 ? degree : hydrogens) += 1;
    inv[i] = Fnv1a64{}.i64(atoms[i].atomic_number).i64(degree).i64(atoms[i].formal_charge).i64(hydrogens).value();
    fp.set(inv[i] % nbits);
  }

  std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next = inv;
    for (auto i : heavy) {
      env.clear();
      for (auto j : nbrs[i])
        if (atoms[j].atomic_number > 1) env.emplace_back(kBondPlaceholder, inv[j]);
      std::sort(env.begin(), env.end());
      Fnv1a64 h;
      h.u64(static_cast<std::uint64_t>(r)).u64(inv[i]);
      for (const auto& [bond, n] : env) h.u64(bond).u64(n);
      next[i] = h.value();
      fp.set(next[i] % nbits);
    }
    inv = std::move(next);
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.size() != b.size()) throw PreconditionError("tanimoto needs fingerprints of equal length");
  std::size_t both = 0, either = 0;
  for (std::size_t w = 0; w < a.words().size(); ++w) {
    both += static_cast<std::size_t>(std::popcount(a.words()[w] & b.words()[w]));
    either += static_cast<std::size_t>(std::popcount(a.words()[w] | b.words()[w]));
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace amptcr
