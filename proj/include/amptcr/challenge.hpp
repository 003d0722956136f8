#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "amptcr/pipeline.hpp"

namespace amptcr {

struct ChallengeReport {
  std::size_t trials = 0;         // poses attempted
  std::size_t failed_trials = 0;  // pipeline errors, excluded from statistics
  std::vector<std::string> errors;
  double threshold = 0.0;  // Å
  std::size_t pairs = 0;
  double mean_rmsd = 0.0;  // Å, over all pairs of successful trials
  double max_rmsd = 0.0;
  std::array<std::size_t, 3> sign_flips{};  // per canonical axis, against the first successful trial
  double success_rate = 0.0;                // fraction of pairs under threshold
};

// Uniformly distributed rotations (Shoemake quaternion sampling).
std::vector<Mat3> random_rotations(std::size_t n, std::uint64_t seed);

// Runs the whole grid -> mesh -> sample -> align pipeline once per pose and
// compares every pair of aligned clouds by nearest-neighbour RMSD. Axis
// sign flips are judged after mapping each trial's canonical axes back into
// the unposed molecule frame.
ChallengeReport rotation_challenge(const Molecule& mol, const SurfaceSettings& settings,
                                   const std::vector<Mat3>& poses, double rmsd_threshold, std::size_t jobs = 1);
ChallengeReport rotation_challenge(const Molecule& mol, const SurfaceSettings& settings, std::size_t n_trials,
                                   std::uint64_t seed, double rmsd_threshold, std::size_t jobs = 1);

nlohmann::json to_json(const ChallengeReport& report);

}  // namespace amptcr
