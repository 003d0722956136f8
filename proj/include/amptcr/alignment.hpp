#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "amptcr/cloud.hpp"
#include "amptcr/error.hpp"
#include "amptcr/geometry.hpp"

namespace amptcr {

// Raised when the covariance spectrum cannot fix a unique frame.
class AmbiguousAlignment : public Error {
 public:
  using Error::Error;
};

struct CanonicalFrame {
  Mat3 rotation = Mat3::Identity();  // rows are the canonical axes
  Vec3 translation = Vec3::Zero();

  // x -> rotation * (x + translation)
  Vec3 apply(const Vec3& x) const { return rotation * (x + translation); }
  CanonicalFrame inverse() const;
};

inline constexpr double kEigenGapThreshold = 1e-12;
inline constexpr double kMomentTieThreshold = 1e-9;

// Translation removes the centroid. Axes are the position-covariance
// eigenvectors by descending eigenvalue; each axis points where the
// scalar-weighted third moment sum_i s_i <x_i, e>^3 is non-negative, falling
// back to the unweighted third moment when the weighted one is below 1e-9 in
// magnitude. The last axis is flipped when needed to keep det = +1.
// Throws AmbiguousAlignment when two eigenvalues (or the smallest and zero)
// are closer than 1e-12.
CanonicalFrame canonical_frame(const std::vector<Vec3>& positions, const std::vector<double>& scalars);

// Moves positions and rotates vector topology channels; scalars untouched.
AmptcrCloud apply_frame(AmptcrCloud cloud, const CanonicalFrame& frame);
std::vector<Vec3> apply_frame(const std::vector<Vec3>& positions, const CanonicalFrame& frame);

// Symmetric nearest-neighbour RMSD between two point sets:
// sqrt((sum_a d(a, B)^2 + sum_b d(b, A)^2) / (|A| + |B|)).
double nearest_neighbor_rmsd(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

}  // namespace amptcr
