#include <doctest.h>

#include <cmath>
#include <random>

#include "amptcr/alignment.hpp"
#include "amptcr/challenge.hpp"
#include "amptcr/pipeline.hpp"
#include "test_util.hpp"

using namespace amptcr;

namespace {

// Anisotropic Gaussian blob with a skewed scalar field.
std::pair<std::vector<Vec3>, std::vector<double>> random_cloud(std::uint64_t seed, std::size_t n = 300) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec3> p;
  std::vector<double> s;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 x(3.0 * g(rng), 2.0 * g(rng), 1.0 * g(rng));
    p.push_back(x);
    s.push_back(std::tanh(0.4 * x.x() - 0.3 * x.y() + 0.5 * x.z() + 0.2));
  }
  return {p, s};
}

double radius(const std::vector<Vec3>& p) {
  const Vec3 c = centroid(p);
  double r = 0.0;
  for (const auto& x : p) r = std::max(r, (x - c).norm());
  return r;
}

AmptcrCloud cloud_of(const std::vector<Vec3>& p, const std::vector<double>& s) {
  AmptcrCloud c;
  c.positions = p;
  c.scalars = s;
  c.meta.channels = {"t1.x", "t1.y", "t1.z", "h"};
  c.topo.resize(static_cast<Eigen::Index>(p.size()), 4);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec3 n = p[i].normalized();
    c.topo.row(static_cast<Eigen::Index>(i)) << n.x(), n.y(), n.z(), 0.1 * static_cast<double>(i);
  }
  return c;
}

}  // namespace

TEST_CASE("frame is a proper rotation and aligning twice is the identity") {
  const auto [p, s] = random_cloud(1);
  const auto f = canonical_frame(p, s);
  CHECK((f.rotation.transpose() * f.rotation - Mat3::Identity()).norm() < 1e-9);
  CHECK(std::abs(f.rotation.determinant() - 1.0) < 1e-9);
  const auto aligned = apply_frame(p, f);
  const auto again = canonical_frame(aligned, s);
  CHECK((again.rotation - Mat3::Identity()).norm() < 1e-9);
  CHECK(again.translation.norm() < 1e-9);
  CHECK(centroid(aligned).norm() < 1e-9);
}

TEST_CASE("alignment commutes with rigid motion") {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [p, s] = random_cloud(100 + seed);
    const Mat3 r = testutil::random_rotation(rng);
    const Vec3 t(1.5, -2.0, 0.25);
    std::vector<Vec3> moved;
    for (const auto& x : p) moved.push_back(r * x + t);
    const auto a = apply_frame(p, canonical_frame(p, s));
    const auto b = apply_frame(moved, canonical_frame(moved, s));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).norm());
    CHECK(worst < 1e-6 * radius(p));
    CHECK(nearest_neighbor_rmsd(a, b) < 1e-6 * radius(p));
  }
}

TEST_CASE("apply_frame: identity, inverse, scalars untouched, vectors rotated") {
  const auto [p, s] = random_cloud(3, 50);
  const AmptcrCloud cloud = cloud_of(p, s);
  const auto same = apply_frame(cloud, CanonicalFrame{});
  CHECK(same.positions == cloud.positions);
  CHECK(same.topo == cloud.topo);

  const auto f = canonical_frame(p, s);
  const auto moved = apply_frame(cloud, f);
  CHECK(moved.scalars == cloud.scalars);
  const auto back = apply_frame(moved, f.inverse());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK((back.positions[i] - p[i]).norm() < 1e-12);
    const auto row = static_cast<Eigen::Index>(i);
    const Vec3 t1 = moved.topo.row(row).head<3>().transpose();
    CHECK((t1 - f.rotation * cloud.topo.row(row).head<3>().transpose()).norm() < 1e-12);
    CHECK(moved.topo(row, 3) == cloud.topo(row, 3));
  }
}

TEST_CASE("symmetric or flat clouds are reported as ambiguous") {
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1);
  CHECK_THROWS_AS(canonical_frame(cube, std::vector<double>(8, 0.5)), AmbiguousAlignment);
  std::vector<Vec3> flat{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 2, 0), Vec3(3, 1, 0), Vec3(-1, 5, 0)};
  CHECK_THROWS_AS(canonical_frame(flat, std::vector<double>(5, 0.1)), AmbiguousAlignment);
}

TEST_CASE("nearest-neighbour rmsd") {
  const std::vector<Vec3> a{Vec3(0, 0, 0), Vec3(1, 0, 0)};
  const std::vector<Vec3> b{Vec3(1, 0, 0), Vec3(0, 0, 0)};
  CHECK(nearest_neighbor_rmsd(a, b) == 0.0);
  const std::vector<Vec3> c{Vec3(0, 0, 0.3)};
  // a -> c: 0.09 and 1.09; c -> a: 0.09
  CHECK(nearest_neighbor_rmsd(a, c) == doctest::Approx(std::sqrt((0.09 + 1.09 + 0.09) / 3.0)).epsilon(1e-14));
}

TEST_CASE("random rotations are proper and reproducible") {
  const auto r = random_rotations(20, 42);
  CHECK(r.size() == 20);
  for (const auto& m : r) {
    CHECK((m.transpose() * m - Mat3::Identity()).norm() < 1e-12);
    CHECK(m.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto again = random_rotations(20, 42);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == again[i]);
}

TEST_CASE("rotation challenge: identical poses, asymmetric molecule, benzene") {
  SurfaceSettings settings;
  settings.n_points = 256;
  const auto mol = read_structure_file(testutil::data_path("asymmetric20.pdb"));

  const auto same = rotation_challenge(mol, settings, {Mat3::Identity(), Mat3::Identity()}, 0.05);
  CHECK(same.pairs == 1);
  CHECK(same.max_rmsd == 0.0);
  CHECK(same.success_rate == 1.0);

  const auto report = rotation_challenge(mol, settings, 20, 2024, 0.05, 2);
  CHECK(report.trials == 20);
  CHECK(report.failed_trials == 0);
  CHECK(report.pairs == 190);
  CHECK(report.success_rate >= 0.95);
  CHECK(report.success_rate <= 1.0);
  const auto j = to_json(report);
  for (const char* key : {"trials", "mean_rmsd", "max_rmsd", "sign_flips", "success_rate"}) CHECK(j.contains(key));

  const auto benzene = rotation_challenge(read_structure_file(testutil::data_path("benzene.pdb")), settings, 20, 2024, 0.05);
  std::size_t flips = 0;
  for (auto f : benzene.sign_flips) {
    CHECK(f <= benzene.trials);
    flips += f;
  }
  CHECK(flips > 0);
}
