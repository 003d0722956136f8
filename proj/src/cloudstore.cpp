#include "amptcr/cloudstore.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <random>

#include "amptcr/error.hpp"

namespace amptcr {

namespace {
constexpr int kFormatVersion = 1;

const ZipMember& find_member(const std::vector<ZipMember>& members, std::string_view name) {
  for (const auto& m : members)
    if (m.name == name) return m;
  throw FormatError("archive lacks member " + std::string(name));
}
}  // namespace

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t parse_hash_hex(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw FormatError("invalid hash string '" + std::string(s) + "'");
  return v;
}

nlohmann::json meta_to_json(const CloudMeta& meta, std::size_t n_points) {
  return nlohmann::json{{"format_version", kFormatVersion},
                        {"name", meta.name},
                        {"scalar_kind", meta.scalar_kind},
                        {"n_points", n_points},
                        {"channels", meta.channels},
                        {"config_hash", hash_hex(meta.config_hash)},
                        {"fingerprint", meta.fingerprint_hex},
                        {"warnings", meta.warnings}};
}

CloudMeta meta_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) throw FormatError("meta.json: unsupported format_version");
    CloudMeta m;
    m.name = j.at("name").get<std::string>();
    m.scalar_kind = j.at("scalar_kind").get<std::string>();
    m.channels = j.at("channels").get<std::vector<std::string>>();
    m.config_hash = parse_hash_hex(j.at("config_hash").get<std::string>());
    m.fingerprint_hex = j.value("fingerprint", std::string{});
    m.warnings = j.value("warnings", std::vector<std::string>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("meta.json: ") + e.what());
  }
}

Bytes encode_archive(const AmptcrCloud& cloud) {
  cloud.validate();
  const std::size_t n = cloud.size(), c = cloud.channel_count();
  std::vector<double> pos;
  pos.reserve(3 * n);
  for (const auto& p : cloud.positions) pos.insert(pos.end(), {p.x(), p.y(), p.z()});
  std::vector<double> topo(cloud.topo.data(), cloud.topo.data() + cloud.topo.size());

  std::vector<ZipMember> members;
  members.push_back({"positions.npy", encode_npy(make_f4_array(pos, {n, 3}))});
  members.push_back({"scalars.npy", encode_npy(make_f4_array(cloud.scalars, {n}))});
  members.push_back({"topo.npy", encode_npy(make_f4_array(topo, {n, c}))});
  const std::string meta = meta_to_json(cloud.meta, n).dump(2) + "\n";
  members.push_back({"meta.json", Bytes(meta.begin(), meta.end())});
  return build_zip(members);
}

AmptcrCloud decode_archive(std::span<const std::uint8_t> bytes) {
  const auto members = parse_zip(bytes);
  const auto pos = decode_npy(find_member(members, "positions.npy").data, "positions.npy");
  const auto sca = decode_npy(find_member(members, "scalars.npy").data, "scalars.npy");
  const auto top = decode_npy(find_member(members, "topo.npy").data, "topo.npy");
  const auto& meta_bytes = find_member(members, "meta.json").data;
  nlohmann::json meta_json;
  try {
    meta_json = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("meta.json: ") + e.what());
  }

  if (pos.shape.size() != 2 || pos.shape[1] != 3) throw IntegrityError("positions.npy must have shape (N, 3)");
  const std::size_t n = pos.shape[0];
  if (sca.shape.size() != 1 || sca.shape[0] != n) throw IntegrityError("scalars.npy row count differs from positions");
  if (top.shape.size() != 2 || top.shape[0] != n) throw IntegrityError("topo.npy row count differs from positions");
  if (meta_json.value("n_points", n) != n) throw IntegrityError("meta.json n_points differs from array rows");

  AmptcrCloud cloud;
  cloud.meta = meta_from_json(meta_json);
  const auto p = pos.to_doubles();
  cloud.positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) cloud.positions[i] = Vec3(p[3 * i], p[3 * i + 1], p[3 * i + 2]);
  cloud.scalars = sca.to_doubles();
  const auto t = top.to_doubles();
  cloud.topo = Eigen::Map<const RowMatrix>(t.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(top.shape[1]));
  if (cloud.meta.channels.size() != top.shape[1]) throw IntegrityError("meta.json channel layout differs from topo.npy columns");
  cloud.validate();
  return cloud;
}

void write_archive(const AmptcrCloud& cloud, const std::filesystem::path& path) {
  write_file_atomic(path, encode_archive(cloud));
}

AmptcrCloud read_archive(const std::filesystem::path& path) {
  try {
    return decode_archive(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.filename().string() + ": " + e.what());
  }
}

double bounding_radius(const AmptcrCloud& cloud) {
  const Vec3 c = centroid(cloud.positions);
  double r = 0.0;
  for (const auto& p : cloud.positions) r = std::max(r, (p - c).norm());
  return r;
}

double default_position_sigma(const AmptcrCloud& cloud) { return 0.01 * bounding_radius(cloud); }

AmptcrCloud jitter(const AmptcrCloud& cloud, double sigma_pos, double rot_sigma_deg, std::uint64_t seed) {
  if (!(sigma_pos >= 0.0) || !(rot_sigma_deg >= 0.0)) throw PreconditionError("jitter magnitudes must be non-negative");
  AmptcrCloud out = cloud;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  if (sigma_pos > 0.0)
    for (auto& p : out.positions)
      for (int a = 0; a < 3; ++a) p[a] += sigma_pos * unit(rng);
  if (rot_sigma_deg > 0.0) {
    Vec3 axis;
    do axis = Vec3(unit(rng), unit(rng), unit(rng));
    while (axis.norm() < 1e-12);
    const double angle = rot_sigma_deg * unit(rng) * std::numbers::pi / 180.0;
    out.rotate(axis_angle(axis, angle));
  }
  return out;
}

}  // namespace amptcr
