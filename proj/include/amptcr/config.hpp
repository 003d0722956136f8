#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "amptcr/evalkit.hpp"
#include "amptcr/model.hpp"
#include "amptcr/pipeline.hpp"

namespace amptcr {

enum class LabelTransform { none, log10, mic_binary };

std::string to_string(LabelTransform t);
LabelTransform label_transform_from_string(std::string_view s);
FieldKind scalar_kind_from_string(std::string_view s);

struct PipelineConfig {
  SurfaceSettings surface;
  ModelConfig model;
  FoldPlan folds;
  bool calibrate = true;
  LabelTransform labels = LabelTransform::none;
  std::size_t challenge_trials = 20;
  double challenge_threshold = 0.05;  // Å

  // Cross-module checks: the model's point count follows the surface.
  void validate() const;
  // One seed for surface sampling, training and fold assignment.
  void set_seed(std::uint64_t seed);
};

// Every field is emitted, so the dump with sorted keys is canonical.
nlohmann::json to_json(const PipelineConfig& config);
// Missing keys keep the value in `base`; a top-level "seed" seeds every
// component before component-level seeds are applied. Unknown keys raise
// PreconditionError.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig base = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// 64-bit FNV-1a of the canonical JSON text.
std::uint64_t config_hash(const PipelineConfig& config);

}  // namespace amptcr
