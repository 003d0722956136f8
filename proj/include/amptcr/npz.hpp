#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace amptcr {

using Bytes = std::vector<std::uint8_t>;

// One array in the v1.0 .npy layout. Only little-endian float32 ("<f4") and
// float64 ("<f8") in C order are supported.
struct NpyArray {
  std::string descr = "<f4";
  std::vector<std::size_t> shape;
  Bytes data;  // raw little-endian element bytes

  std::size_t element_count() const noexcept;
  std::size_t element_size() const;
  std::vector<double> to_doubles() const;
};

NpyArray make_f4_array(std::span<const double> values, std::vector<std::size_t> shape);
NpyArray make_f8_array(std::span<const double> values, std::vector<std::size_t> shape);

// Magic, version 1.0, header dict padded with spaces and a newline so the data
// starts on a 64-byte boundary.
Bytes encode_npy(const NpyArray& array);
// `member` only labels error messages.
NpyArray decode_npy(std::span<const std::uint8_t> bytes, std::string_view member = "");

struct ZipMember {
  std::string name;
  Bytes data;
};

// Stored (uncompressed) ZIP with fixed 1980-01-01 timestamps, so equal input
// yields equal bytes.
Bytes build_zip(const std::vector<ZipMember>& members);
// Reads through the central directory; handles stored and deflated members
// and zip64 size fields. CRCs are verified.
std::vector<ZipMember> parse_zip(std::span<const std::uint8_t> bytes);

Bytes read_file_bytes(const std::filesystem::path& path);
// Writes to a temporary sibling, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace amptcr
