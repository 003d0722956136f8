#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "amptcr/cloud.hpp"
#include "amptcr/npz.hpp"

namespace amptcr {

// Archive members: positions.npy (N,3), scalars.npy (N,), topo.npy (N,C), all
// "<f4"; meta.json with name, scalar_kind, n_points, channels, config_hash
// (16 hex digits), fingerprint (hex), warnings and format_version.
Bytes encode_archive(const AmptcrCloud& cloud);
AmptcrCloud decode_archive(std::span<const std::uint8_t> bytes);

void write_archive(const AmptcrCloud& cloud, const std::filesystem::path& path);
AmptcrCloud read_archive(const std::filesystem::path& path);

nlohmann::json meta_to_json(const CloudMeta& meta, std::size_t n_points);
CloudMeta meta_from_json(const nlohmann::json& j);

std::string hash_hex(std::uint64_t h);
std::uint64_t parse_hash_hex(std::string_view s);

// Largest distance of any point from the centroid.
double bounding_radius(const AmptcrCloud& cloud);
// 0.01 x bounding radius.
double default_position_sigma(const AmptcrCloud& cloud);
inline constexpr double kDefaultRotationSigmaDeg = 5.0;

// Gaussian position noise (per coordinate, sigma_pos Å), then one rotation of
// the whole cloud about the origin around a uniformly random axis by an angle
// drawn from N(0, rot_sigma_deg^2) degrees. Vector topology channels rotate
// with the cloud. Scalars are untouched.
AmptcrCloud jitter(const AmptcrCloud& cloud, double sigma_pos, double rot_sigma_deg, std::uint64_t seed);

}  // namespace amptcr
