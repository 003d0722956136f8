#include "amptcr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "amptcr/error.hpp"
#include "amptcr/hash.hpp"

namespace amptcr {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw PreconditionError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw PreconditionError("unknown config key '" + where + "." + key + "'");
}

template <class T>
void get(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

std::string to_string(GridFrame f) { return f == GridFrame::molecule ? "molecule" : "world"; }

std::string to_string(ChargeMode m) {
  switch (m) {
    case ChargeMode::automatic:
      return "auto";
    case ChargeMode::none:
      return "none";
    case ChargeMode::electronegativity:
      return "electronegativity";
  }
  return "auto";
}

nlohmann::json surface_json(const SurfaceSettings& s) {
  return {{"spacing", s.spacing},
          {"padding", s.padding},
          {"voxel_budget", s.voxel_budget},
          {"isovalue_factor", s.isovalue_factor},
          {"n_points", s.n_points},
          {"scalar", to_string(s.scalar)},
          {"fukui_delta", s.fukui_delta},
          {"grid_frame", to_string(s.grid_frame)},
          {"charges", to_string(s.charges)},
          {"bond_tolerance", s.bond_tolerance},
          {"radii", s.topology.radii},
          {"cutoff", s.topology.cutoff},
          {"fp_radius", s.fp_radius},
          {"fp_bits", s.fp_bits},
          {"seed", s.seed}};
}

void read_surface(const nlohmann::json& j, SurfaceSettings& s) {
  reject_unknown(j,
                 {"spacing", "padding", "voxel_budget", "isovalue_factor", "n_points", "scalar", "fukui_delta",
                  "grid_frame", "charges", "bond_tolerance", "radii", "cutoff", "fp_radius", "fp_bits", "seed"},
                 "surface");
  get(j, "spacing", s.spacing);
  get(j, "padding", s.padding);
  get(j, "voxel_budget", s.voxel_budget);
  get(j, "isovalue_factor", s.isovalue_factor);
  get(j, "n_points", s.n_points);
  if (j.contains("scalar")) s.scalar = scalar_kind_from_string(j.at("scalar").get<std::string>());
  get(j, "fukui_delta", s.fukui_delta);
  if (j.contains("grid_frame")) {
    const auto f = j.at("grid_frame").get<std::string>();
    if (f == "molecule") s.grid_frame = GridFrame::molecule;
    else if (f == "world") s.grid_frame = GridFrame::world;
    else throw PreconditionError("unknown grid_frame '" + f + "'");
  }
  if (j.contains("charges")) {
    const auto m = j.at("charges").get<std::string>();
    if (m == "auto") s.charges = ChargeMode::automatic;
    else if (m == "none") s.charges = ChargeMode::none;
    else if (m == "electronegativity") s.charges = ChargeMode::electronegativity;
    else throw PreconditionError("unknown charge mode '" + m + "'");
  }
  get(j, "bond_tolerance", s.bond_tolerance);
  get(j, "radii", s.topology.radii);
  get(j, "cutoff", s.topology.cutoff);
  get(j, "fp_radius", s.fp_radius);
  get(j, "fp_bits", s.fp_bits);
  get(j, "seed", s.seed);
}

}  // namespace

std::string to_string(LabelTransform t) {
  switch (t) {
    case LabelTransform::none:
      return "none";
    case LabelTransform::log10:
      return "log10";
    case LabelTransform::mic_binary:
      return "mic_binary";
  }
  return "none";
}

LabelTransform label_transform_from_string(std::string_view s) {
  if (s == "none") return LabelTransform::none;
  if (s == "log10") return LabelTransform::log10;
  if (s == "mic_binary") return LabelTransform::mic_binary;
  throw PreconditionError("unknown label transform '" + std::string(s) + "'");
}

FieldKind scalar_kind_from_string(std::string_view s) {
  if (s == "esp") return FieldKind::esp;
  if (s == "fukui" || s == "fukui_dual") return FieldKind::fukui_dual;
  throw PreconditionError("unknown scalar kind '" + std::string(s) + "' (esp or fukui)");
}

void PipelineConfig::validate() const {
  surface.validate();
  model.validate();
  folds.validate();
  if (model.n_points != surface.n_points) throw PreconditionError("model n_points differs from surface n_points");
  if (model.task == Task::binary && labels == LabelTransform::log10)
    throw PreconditionError("log10 labels need the regression task");
  if (model.task == Task::regression && labels == LabelTransform::mic_binary)
    throw PreconditionError("MIC binarization needs the binary task");
  if (challenge_trials < 2) throw PreconditionError("challenge needs at least two trials");
  if (!(challenge_threshold > 0.0)) throw PreconditionError("challenge threshold must be positive");
}

void PipelineConfig::set_seed(std::uint64_t seed) {
  surface.seed = seed;
  model.seed = seed;
  folds.seed = seed;
}

nlohmann::json to_json(const PipelineConfig& c) {
  return {{"surface", surface_json(c.surface)},
          {"model", to_json(c.model)},
          {"folds", to_json(c.folds)},
          {"calibrate", c.calibrate},
          {"labels", to_string(c.labels)},
          {"challenge", {{"trials", c.challenge_trials}, {"threshold", c.challenge_threshold}}}};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig c) {
  try {
    reject_unknown(j, {"seed", "surface", "model", "folds", "calibrate", "labels", "challenge"}, "config");
    if (j.contains("seed")) c.set_seed(j.at("seed").get<std::uint64_t>());
    if (j.contains("surface")) read_surface(j.at("surface"), c.surface);
    if (j.contains("model")) {
      reject_unknown(j.at("model"),
                     {"n_points", "k_nn", "width", "heads", "layers", "fp_hidden", "fp_weight", "task", "epochs",
                      "batch_size", "learning_rate", "dropout", "geo_mode", "jitter", "jitter_sigma_fraction",
                      "jitter_rotation_deg", "seed"},
                     "model");
      c.model = model_config_from_json(j.at("model"), c.model);
    }
    if (!j.contains("model") || !j.at("model").contains("n_points")) c.model.n_points = c.surface.n_points;
    if (j.contains("folds")) {
      reject_unknown(j.at("folds"), {"mode", "folds", "train_fraction", "seed"}, "folds");
      c.folds = fold_plan_from_json(j.at("folds"), c.folds);
    }
    get(j, "calibrate", c.calibrate);
    if (j.contains("labels")) c.labels = label_transform_from_string(j.at("labels").get<std::string>());
    if (j.contains("challenge")) {
      const auto& ch = j.at("challenge");
      reject_unknown(ch, {"trials", "threshold"}, "challenge");
      get(ch, "trials", c.challenge_trials);
      get(ch, "threshold", c.challenge_threshold);
    }
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw PreconditionError(path.string() + ": " + e.what());
  }
  return pipeline_config_from_json(j);
}

std::uint64_t config_hash(const PipelineConfig& config) { return fnv1a64(to_json(config).dump()); }

}  // namespace amptcr
