#include "amptcr/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace amptcr {

CanonicalFrame CanonicalFrame::inverse() const {
  // x = R^T x' - t  ==  R^T (x' + (-R t))
  CanonicalFrame inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(rotation * translation);
  return inv;
}

CanonicalFrame canonical_frame(const std::vector<Vec3>& positions, const std::vector<double>& scalars) {
  if (positions.size() < 4) throw PreconditionError("alignment needs at least four points");
  if (scalars.size() != positions.size()) throw PreconditionError("scalar count differs from point count");

  const Vec3 c = centroid(positions);
  Mat3 cov = Mat3::Zero();
  for (const auto& p : positions) cov += (p - c) * (p - c).transpose();
  cov /= static_cast<double>(positions.size());

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 lambda = eig.eigenvalues();  // ascending
  if (lambda[0] < kEigenGapThreshold) throw AmbiguousAlignment("ambiguous alignment: coplanar point cloud");
  if (lambda[1] - lambda[0] < kEigenGapThreshold || lambda[2] - lambda[1] < kEigenGapThreshold)
    throw AmbiguousAlignment("ambiguous alignment: degenerate covariance spectrum");

  CanonicalFrame frame;
  frame.translation = -c;
  for (int a = 0; a < 3; ++a) {
    Vec3 axis = eig.eigenvectors().col(2 - a);
    double weighted = 0.0, plain = 0.0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const double proj3 = std::pow((positions[i] - c).dot(axis), 3);
      weighted += scalars[i] * proj3;
      plain += proj3;
    }
    const double moment = std::abs(weighted) >= kMomentTieThreshold ? weighted : plain;
    if (moment < 0.0) axis = -axis;
    frame.rotation.row(a) = axis.transpose();
  }
  if (frame.rotation.determinant() < 0.0) frame.rotation.row(2) *= -1.0;
  return frame;
}

std::vector<Vec3> apply_frame(const std::vector<Vec3>& positions, const CanonicalFrame& frame) {
  std::vector<Vec3> out;
  out.reserve(positions.size());
  for (const auto& p : positions) out.push_back(frame.apply(p));
  return out;
}

AmptcrCloud apply_frame(AmptcrCloud cloud, const CanonicalFrame& frame) {
  for (auto& p : cloud.positions) p += frame.translation;
  cloud.rotate(frame.rotation);
  return cloud;
}

double nearest_neighbor_rmsd(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw PreconditionError("RMSD needs two non-empty point sets");
  auto one_way = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double sum = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, (p - q).squaredNorm());
      sum += best;
    }
    return sum;
  };
  return std::sqrt((one_way(a, b) + one_way(b, a)) / static_cast<double>(a.size() + b.size()));
}

}  // namespace amptcr
