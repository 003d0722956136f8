#include "amptcr/cloud.hpp"

#include <cmath>

#include "amptcr/error.hpp"

namespace amptcr {

void AmptcrCloud::validate() const {
  const auto n = positions.size();
  if (scalars.size() != n) throw PreconditionError("scalar count differs from point count");
  if (static_cast<std::size_t>(topo.rows()) != n) throw PreconditionError("topology row count differs from point count");
  if (meta.channels.size() != channel_count())
    throw PreconditionError("channel layout names " + std::to_string(meta.channels.size()) + " channels but topo has " +
                            std::to_string(channel_count()));
  for (double s : scalars)
    if (!(s >= -1.0 && s <= 1.0)) throw PreconditionError("scalar outside [-1, 1]");
  for (const auto& p : positions)
    if (!p.allFinite()) throw PreconditionError("non-finite position");
  if (!topo.allFinite()) throw PreconditionError("non-finite topology channel");
}

std::vector<std::size_t> AmptcrCloud::vector_channel_offsets() const {
  std::vector<std::size_t> out;
  const auto& c = meta.channels;
  for (std::size_t i = 0; i + 2 < c.size(); ++i) {
    if (c[i].size() < 3 || !c[i].ends_with(".x")) continue;
    const std::string stem = c[i].substr(0, c[i].size() - 2);
    if (c[i + 1] == stem + ".y" && c[i + 2] == stem + ".z") out.push_back(i);
  }
  return out;
}

void AmptcrCloud::rotate(const Mat3& rotation) {
  for (auto& p : positions) p = rotation * p;
  for (auto off : vector_channel_offsets())
    for (Eigen::Index r = 0; r < topo.rows(); ++r) {
      const Vec3 v(topo(r, off), topo(r, off + 1), topo(r, off + 2));
      const Vec3 w = rotation * v;
      topo(r, off) = w.x();
      topo(r, off + 1) = w.y();
      topo(r, off + 2) = w.z();
    }
}

}  // namespace amptcr
