#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "amptcr/cloud.hpp"
#include "amptcr/fingerprint.hpp"
#include "amptcr/layers.hpp"

namespace amptcr {

enum class Task { regression, binary };

struct ModelConfig {
  std::size_t n_points = 1024;
  std::size_t k_nn = 20;
  std::size_t width = 64;  // F, even and divisible by heads
  std::size_t heads = 4;
  std::size_t layers = 2;  // attention layers after the two EdgeConv layers
  std::size_t fp_hidden = 32;
  double fp_weight = 0.15;
  Task task = Task::regression;
  std::size_t epochs = 25;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double dropout = 0.1;
  nn::GeoMode geo_mode = nn::GeoMode::displacement;
  bool jitter = true;
  double jitter_sigma_fraction = 0.01;  // of the cloud's bounding radius
  double jitter_rotation_deg = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// fp_weight default for a task: 0.25 for binary, 0.15 for regression.
double default_fp_weight(Task task);

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});
std::string to_string(Task task);
Task task_from_string(std::string_view s);

struct Sample {
  const AmptcrCloud* cloud = nullptr;
  const Fingerprint* fingerprint = nullptr;
  double label = 0.0;
};

class Model {
 public:
  Model(const ModelConfig& config, std::size_t topo_channels, std::size_t fp_bits);

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t topo_channels() const noexcept { return topo_channels_; }
  std::size_t fp_bits() const noexcept { return fp_bits_; }
  const nn::ParamList& params() const noexcept { return params_; }

  // Raw output: standardized label for regression, logit for binary.
  nn::Var forward(const AmptcrCloud& cloud, const Fingerprint& fp, bool train, std::uint64_t dropout_key = 0) const;
  // Label units for regression, probability of the positive class for binary.
  double predict(const AmptcrCloud& cloud, const Fingerprint& fp) const;
  double to_label_units(double raw) const;

  double label_mean = 0.0;
  double label_scale = 1.0;

 private:
  ModelConfig config_;
  std::size_t topo_channels_, fp_bits_;
  nn::Linear ec1_, ec2_, topo_embed_, fuse_, head1_, head2_, fp1_, fp2_;
  std::vector<nn::AttentionParams> attention_;
  nn::ParamList params_;
};

struct TrainResult {
  Model model;
  std::vector<double> history;  // mean training loss per epoch
};

// Fixed-epoch training with Adam (beta 0.9/0.999, eps 1e-8), mini-batches
// averaged, samples reshuffled every epoch, jitter applied on every fetch.
// Regression labels are standardized on the training set; predictions are
// mapped back. Throws NumericError naming epoch and batch on a non-finite
// loss.
TrainResult train(const std::vector<Sample>& data, const ModelConfig& config);

// Archive of "<name>.npy" float64 arrays plus model.json.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

// "epoch,train_loss" rows, epochs numbered from 1.
std::string history_csv(const std::vector<double>& history);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace amptcr
