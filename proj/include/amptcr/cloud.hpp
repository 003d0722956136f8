#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "amptcr/geometry.hpp"

namespace amptcr {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct CloudMeta {
  std::string name;
  std::string scalar_kind;            // "esp" or "fukui_dual"
  std::vector<std::string> channels;  // topology channel layout
  std::uint64_t config_hash = 0;
  std::string fingerprint_hex;        // Morgan bits, may be empty
  std::vector<std::string> warnings;
};

// One molecule's aligned surface record. Held in double precision; stored as
// float32 on disk.
struct AmptcrCloud {
  std::vector<Vec3> positions;  // Å, canonical frame
  std::vector<double> scalars;  // normalized to [-1, 1]
  RowMatrix topo;               // N x C
  CloudMeta meta;

  std::size_t size() const noexcept { return positions.size(); }
  std::size_t channel_count() const noexcept { return static_cast<std::size_t>(topo.cols()); }

  // Row counts agree, scalars within [-1, 1], channel names match C.
  void validate() const;

  // Column offsets of 3-vector channel groups ("<name>.x", ".y", ".z").
  std::vector<std::size_t> vector_channel_offsets() const;
  // Rotate positions and every vector channel group.
  void rotate(const Mat3& rotation);
};

}  // namespace amptcr
