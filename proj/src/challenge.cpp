#include "amptcr/challenge.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "amptcr/error.hpp"
#include "amptcr/parallel.hpp"

namespace amptcr {

std::vector<Mat3> random_rotations(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Mat3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const double t2 = 2.0 * std::numbers::pi * u2, t3 = 2.0 * std::numbers::pi * u3;
    Eigen::Quaterniond q(b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3));
    out.push_back(q.normalized().toRotationMatrix());
  }
  return out;
}

namespace {

struct Trial {
  std::vector<Vec3> aligned;
  Mat3 axes;  // canonical axes as rows, in the unposed molecule frame
};

}  // namespace

ChallengeReport rotation_challenge(const Molecule& mol, const SurfaceSettings& settings,
                                   const std::vector<Mat3>& poses, double rmsd_threshold, std::size_t jobs) {
  if (poses.size() < 2) throw PreconditionError("rotation challenge needs at least two trials");
  if (!(rmsd_threshold > 0.0)) throw PreconditionError("RMSD threshold must be positive");
  settings.validate();
  const Molecule prepared = prepare_molecule(mol, settings);

  std::vector<std::optional<Trial>> trials(poses.size());
  std::vector<std::string> errors(poses.size());
  parallel_for(poses.size(), jobs, [&](std::size_t t) {
    try {
      const Molecule posed = prepared.transformed(poses[t], Vec3::Zero());
      const SurfaceBuild build = build_surface(posed, settings);
      const CanonicalFrame frame = canonical_frame(build.sample.positions, build.sample.scalars);
      trials[t] = Trial{apply_frame(build.sample.positions, frame), frame.rotation * poses[t]};
    } catch (const Error& e) {
      errors[t] = e.what();
    }
  });

  ChallengeReport report;
  report.trials = poses.size();
  report.threshold = rmsd_threshold;
  std::vector<const Trial*> ok;
  for (std::size_t t = 0; t < poses.size(); ++t) {
    if (trials[t]) {
      ok.push_back(&*trials[t]);
    } else {
      ++report.failed_trials;
      report.errors.push_back("trial " + std::to_string(t) + ": " + errors[t]);
    }
  }

  for (std::size_t k = 1; k < ok.size(); ++k)
    for (int a = 0; a < 3; ++a)
      if (ok[k]->axes.row(a).dot(ok[0]->axes.row(a)) < 0.0) ++report.sign_flips[a];

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < ok.size(); ++i)
    for (std::size_t j = i + 1; j < ok.size(); ++j) pairs.emplace_back(i, j);
  std::vector<double> rmsd(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t p) {
    rmsd[p] = nearest_neighbor_rmsd(ok[pairs[p].first]->aligned, ok[pairs[p].second]->aligned);
  });

  report.pairs = pairs.size();
  if (!pairs.empty()) {
    std::size_t under = 0;
    double sum = 0.0;
    for (double r : rmsd) {
      sum += r;
      report.max_rmsd = std::max(report.max_rmsd, r);
      under += r < rmsd_threshold;
    }
    report.mean_rmsd = sum / static_cast<double>(pairs.size());
    report.success_rate = static_cast<double>(under) / static_cast<double>(pairs.size());
  }
  return report;
}

ChallengeReport rotation_challenge(const Molecule& mol, const SurfaceSettings& settings, std::size_t n_trials,
                                   std::uint64_t seed, double rmsd_threshold, std::size_t jobs) {
  if (n_trials < 2) throw PreconditionError("rotation challenge needs at least two trials");
  return rotation_challenge(mol, settings, random_rotations(n_trials, seed), rmsd_threshold, jobs);
}

nlohmann::json to_json(const ChallengeReport& r) {
  return nlohmann::json{{"trials", r.trials},
                        {"failed_trials", r.failed_trials},
                        {"errors", r.errors},
                        {"threshold", r.threshold},
                        {"pairs", r.pairs},
                        {"mean_rmsd", r.mean_rmsd},
                        {"max_rmsd", r.max_rmsd},
                        {"sign_flips", r.sign_flips},
                        {"success_rate", r.success_rate}};
}

}  // namespace amptcr
