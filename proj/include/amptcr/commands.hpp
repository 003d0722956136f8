#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "amptcr/config.hpp"
#include "amptcr/evalkit.hpp"

namespace amptcr {

struct BuildEntry {
  std::string name;
  std::string input;   // file name inside the input directory
  std::string status;  // "ok" or "failed:<reason>"
  std::string archive, ply;
  double molecular_weight = 0.0;
  std::vector<std::string> warnings;
};

struct BuildSummary {
  std::uint64_t config_hash = 0;
  std::vector<BuildEntry> entries;  // sorted by input file name
  std::size_t ok = 0, failed = 0;
};

// Structure files recognised by extension (.pdb, .ent, .pqr, .xyz), sorted.
// `input` may also be a single file.
std::vector<std::filesystem::path> list_structures(const std::filesystem::path& input);

// Per molecule: <name>.npz and <name>.ply; plus manifest.json. Failures are
// recorded in the manifest and never stop the run. Output does not depend
// on `jobs`.
BuildSummary cmd_build(const std::filesystem::path& input, const PipelineConfig& config,
                       const std::filesystem::path& out_dir, std::size_t jobs = 1);

nlohmann::json manifest_json(const BuildSummary& summary, const PipelineConfig& config);

// Rotation challenge report for one structure; written to
// <out_dir>/challenge.json when out_dir is non-empty.
nlohmann::json cmd_challenge(const std::filesystem::path& structure, const PipelineConfig& config,
                             std::uint64_t seed, const std::filesystem::path& out_dir = {}, std::size_t jobs = 1);

// "name,value" rows; an optional header row is skipped.
std::vector<std::pair<std::string, double>> read_labels_csv(const std::filesystem::path& path);

struct TrainEvalSummary {
  FoldReport report;
  std::vector<std::string> names;  // dataset order
  std::vector<double> labels;      // after the configured transform
};

// Reads <cloud_dir>/manifest.json and its archives, matches labels by name,
// runs the fold protocol and writes predictions.csv, folds.csv,
// results.json, roc_points.csv (binary), history/fold_<k>.csv and
// models/fold_<k>.npz. Throws PreconditionError listing label names that
// have no built cloud.
TrainEvalSummary cmd_train_eval(const std::filesystem::path& cloud_dir, const std::filesystem::path& labels_file,
                                const PipelineConfig& config, const std::filesystem::path& out_dir);

}  // namespace amptcr
