#include "amptcr/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

#include "amptcr/cloudstore.hpp"
#include "amptcr/error.hpp"
#include "amptcr/hash.hpp"
#include "amptcr/npz.hpp"

namespace amptcr {

using nn::Matrix;
using nn::Var;

void ModelConfig::validate() const {
  if (k_nn < 1) throw PreconditionError("k_nn must be at least 1");
  if (width < 2 || width % 2 != 0) throw PreconditionError("width must be even and at least 2");
  if (heads < 1 || width % heads != 0) throw PreconditionError("width must be divisible by heads");
  if (!(fp_weight >= 0.0 && fp_weight <= 1.0)) throw PreconditionError("fp_weight must lie in [0, 1]");
  if (batch_size < 1) throw PreconditionError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw PreconditionError("learning rate must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw PreconditionError("dropout must lie in [0, 1)");
  if (!(jitter_sigma_fraction >= 0.0) || !(jitter_rotation_deg >= 0.0))
    throw PreconditionError("jitter magnitudes must be non-negative");
  if (fp_hidden < 1) throw PreconditionError("fp_hidden must be at least 1");
}

double default_fp_weight(Task task) { return task == Task::binary ? 0.25 : 0.15; }

std::string to_string(Task task) { return task == Task::binary ? "binary" : "regression"; }

Task task_from_string(std::string_view s) {
  if (s == "regression") return Task::regression;
  if (s == "binary") return Task::binary;
  throw PreconditionError("unknown task '" + std::string(s) + "'");
}

nlohmann::json to_json(const ModelConfig& c) {
  return nlohmann::json{{"n_points", c.n_points},
                        {"k_nn", c.k_nn},
                        {"width", c.width},
                        {"heads", c.heads},
                        {"layers", c.layers},
                        {"fp_hidden", c.fp_hidden},
                        {"fp_weight", c.fp_weight},
                        {"task", to_string(c.task)},
                        {"epochs", c.epochs},
                        {"batch_size", c.batch_size},
                        {"learning_rate", c.learning_rate},
                        {"dropout", c.dropout},
                        {"geo_mode", c.geo_mode == nn::GeoMode::displacement ? "displacement" : "distance"},
                        {"jitter", c.jitter},
                        {"jitter_sigma_fraction", c.jitter_sigma_fraction},
                        {"jitter_rotation_deg", c.jitter_rotation_deg},
                        {"seed", c.seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig c) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("n_points", c.n_points);
  get("k_nn", c.k_nn);
  get("width", c.width);
  get("heads", c.heads);
  get("layers", c.layers);
  get("fp_hidden", c.fp_hidden);
  if (j.contains("task")) {
    c.task = task_from_string(j.at("task").get<std::string>());
    c.fp_weight = default_fp_weight(c.task);
  }
  get("fp_weight", c.fp_weight);
  get("epochs", c.epochs);
  get("batch_size", c.batch_size);
  get("learning_rate", c.learning_rate);
  get("dropout", c.dropout);
  if (j.contains("geo_mode")) {
    const auto m = j.at("geo_mode").get<std::string>();
    if (m == "displacement") c.geo_mode = nn::GeoMode::displacement;
    else if (m == "distance") c.geo_mode = nn::GeoMode::distance;
    else throw PreconditionError("unknown geo_mode '" + m + "'");
  }
  get("jitter", c.jitter);
  get("jitter_sigma_fraction", c.jitter_sigma_fraction);
  get("jitter_rotation_deg", c.jitter_rotation_deg);
  get("seed", c.seed);
  c.validate();
  return c;
}

Model::Model(const ModelConfig& config, std::size_t topo_channels, std::size_t fp_bits)
    : config_(config), topo_channels_(topo_channels), fp_bits_(fp_bits) {
  config_.validate();
  if (topo_channels < 3) throw PreconditionError("topology layout must start with the t1 vector");
  std::mt19937_64 rng(combine_keys(config.seed, 0x6d6f64656cULL));
  const std::size_t f = config.width, half = f / 2;
  ec1_ = nn::Linear::init(8, half, rng);
  ec2_ = nn::Linear::init(2 * half, half, rng);
  topo_embed_ = nn::Linear::init(topo_channels, half, rng);
  fuse_ = nn::Linear::init(3 * half, f, rng);
  for (std::size_t l = 0; l < config.layers; ++l)
    attention_.push_back(nn::AttentionParams::init(f, config.heads, config.dropout, config.geo_mode, rng));
  head1_ = nn::Linear::init(2 * f, f, rng);
  head2_ = nn::Linear::init(f, 1, rng);
  fp1_ = nn::Linear::init(fp_bits, config.fp_hidden, rng);
  fp2_ = nn::Linear::init(config.fp_hidden, 1, rng);

  ec1_.collect("edgeconv1", params_);
  ec2_.collect("edgeconv2", params_);
  topo_embed_.collect("topo_embed", params_);
  fuse_.collect("fuse", params_);
  for (std::size_t l = 0; l < attention_.size(); ++l) attention_[l].collect("attention" + std::to_string(l), params_);
  head1_.collect("head1", params_);
  head2_.collect("head2", params_);
  fp1_.collect("fp1", params_);
  fp2_.collect("fp2", params_);
}

Var Model::forward(const AmptcrCloud& cloud, const Fingerprint& fp, bool train, std::uint64_t key) const {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  if (cloud.channel_count() != topo_channels_) throw PreconditionError("cloud channel count differs from the model's");
  if (fp.size() != fp_bits_) throw PreconditionError("fingerprint length differs from the model's");

  Matrix p(n, 3), q(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.row(i) = cloud.positions[static_cast<std::size_t>(i)].transpose();
    q(i, 0) = cloud.scalars[static_cast<std::size_t>(i)];
  }
  const Matrix t1 = cloud.topo.leftCols(3);
  const auto graph = nn::knn_graph(p, config_.k_nn);

  Matrix e0(n, 4);
  e0 << p, q;
  const Var x0 = nn::constant(std::move(e0));
  const Var ec1 = nn::edge_conv(x0, graph, ec1_);
  const Var ec2 = nn::edge_conv(ec1, graph, ec2_);
  const Var topo = leaky_relu(topo_embed_(nn::constant(cloud.topo)));
  Var x = leaky_relu(fuse_(nn::concat_cols({ec1, ec2, topo})));
  for (std::size_t l = 0; l < attention_.size(); ++l)
    x = nn::relational_attention(x, p, q, t1, attention_[l], train, combine_keys(key, l));

  const Var pooled = nn::concat_cols({nn::max_rows(x), nn::mean_rows(x)});
  const Var out = head2_(leaky_relu(head1_(pooled)));

  Matrix bits(1, static_cast<Eigen::Index>(fp_bits_));
  for (std::size_t i = 0; i < fp_bits_; ++i) bits(0, static_cast<Eigen::Index>(i)) = fp.test(i) ? 1.0 : 0.0;
  const Var fp_scalar = fp2_(leaky_relu(fp1_(nn::constant(std::move(bits)))));
  return nn::fp_blend(out, fp_scalar, config_.fp_weight);
}

double Model::to_label_units(double raw) const {
  if (config_.task == Task::binary) return 1.0 / (1.0 + std::exp(-raw));
  return raw * label_scale + label_mean;
}

double Model::predict(const AmptcrCloud& cloud, const Fingerprint& fp) const {
  return to_label_units(forward(cloud, fp, false).item());
}

namespace {

void check_dataset(const std::vector<Sample>& data) {
  if (data.empty()) throw PreconditionError("training set is empty");
  const auto& ref = *data.front().cloud;
  for (const auto& s : data) {
    if (!s.cloud || !s.fingerprint) throw PreconditionError("training sample without cloud or fingerprint");
    if (s.cloud->meta.channels != ref.meta.channels || s.cloud->meta.scalar_kind != ref.meta.scalar_kind)
      throw PreconditionError("training clouds have inconsistent layouts");
    if (s.fingerprint->size() != data.front().fingerprint->size())
      throw PreconditionError("training fingerprints have inconsistent lengths");
    if (!std::isfinite(s.label)) throw PreconditionError("non-finite training label");
  }
}

}  // namespace

TrainResult train(const std::vector<Sample>& data, const ModelConfig& config) {
  check_dataset(data);
  TrainResult result{Model(config, data.front().cloud->channel_count(), data.front().fingerprint->size()), {}};
  Model& model = result.model;

  if (config.task == Task::regression) {
    double mean = 0.0;
    for (const auto& s : data) mean += s.label;
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (const auto& s : data) var += (s.label - mean) * (s.label - mean);
    var /= static_cast<double>(data.size());
    model.label_mean = mean;
    model.label_scale = var > 1e-24 ? std::sqrt(var) : 1.0;
  } else {
    for (const auto& s : data)
      if (s.label != 0.0 && s.label != 1.0) throw PreconditionError("binary labels must be 0 or 1");
  }

  std::vector<Var> params;
  for (const auto& [name, v] : model.params()) params.push_back(v);
  std::vector<Matrix> m1, m2;
  for (const auto& v : params) {
    m1.push_back(Matrix::Zero(v.rows(), v.cols()));
    m2.push_back(Matrix::Zero(v.rows(), v.cols()));
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  std::uint64_t step = 0;

  std::vector<std::size_t> order(data.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(combine_keys(config.seed, 0x5e11ULL + epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    std::size_t batch = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double inv_b = 1.0 / static_cast<double>(stop - start);
      nn::zero_grad(params);
      for (std::size_t s = start; s < stop; ++s) {
        const Sample& sample = data[order[s]];
        const std::uint64_t key = combine_keys(combine_keys(combine_keys(config.seed, epoch), batch), s - start);
        AmptcrCloud fetched;
        const AmptcrCloud* cloud = sample.cloud;
        if (config.jitter) {
          fetched = jitter(*sample.cloud, config.jitter_sigma_fraction * bounding_radius(*sample.cloud),
                           config.jitter_rotation_deg, combine_keys(key, 0x6a17ULL));
          cloud = &fetched;
        }
        Var loss;
        try {
          const Var raw = model.forward(*cloud, *sample.fingerprint, true, key);
          loss = config.task == Task::regression
                     ? nn::mse_loss(raw, (sample.label - model.label_mean) / model.label_scale)
                     : nn::bce_with_logits(raw, sample.label);
        } catch (const NumericError& e) {
          throw NumericError("epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(batch + 1) + ": " +
                             e.what());
        }
        epoch_loss += loss.item();
        nn::backward(nn::scale(loss, inv_b));
      }
      ++step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        const Matrix& g = params[i].grad();
        if (g.size() == 0) continue;
        m1[i] = beta1 * m1[i] + (1.0 - beta1) * g;
        m2[i] = beta2 * m2[i] + (1.0 - beta2) * g.cwiseProduct(g);
        params[i].mutable_value().array() -=
            config.learning_rate * (m1[i].array() / c1) / ((m2[i].array() / c2).sqrt() + adam_eps);
      }
    }
    result.history.push_back(epoch_loss / static_cast<double>(data.size()));
  }
  nn::zero_grad(params);
  return result;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::vector<ZipMember> members;
  for (const auto& [name, v] : model.params()) {
    const Matrix& m = v.value();
    members.push_back({name + ".npy", encode_npy(make_f8_array(std::span(m.data(), static_cast<std::size_t>(m.size())),
                                                               {static_cast<std::size_t>(m.rows()),
                                                                static_cast<std::size_t>(m.cols())}))});
  }
  nlohmann::json meta{{"config", to_json(model.config())},
                      {"topo_channels", model.topo_channels()},
                      {"fp_bits", model.fp_bits()},
                      {"label_mean", model.label_mean},
                      {"label_scale", model.label_scale}};
  const std::string text = meta.dump(2) + "\n";
  members.push_back({"model.json", Bytes(text.begin(), text.end())});
  write_file_atomic(path, build_zip(members));
}

Model load_model(const std::filesystem::path& path) {
  const auto members = parse_zip(read_file_bytes(path));
  const ZipMember* meta_member = nullptr;
  for (const auto& m : members)
    if (m.name == "model.json") meta_member = &m;
  if (!meta_member) throw FormatError(path.string() + ": missing model.json");
  const auto meta = nlohmann::json::parse(meta_member->data.begin(), meta_member->data.end());
  Model model(model_config_from_json(meta.at("config")), meta.at("topo_channels").get<std::size_t>(),
              meta.at("fp_bits").get<std::size_t>());
  model.label_mean = meta.at("label_mean").get<double>();
  model.label_scale = meta.at("label_scale").get<double>();
  for (const auto& [name, v] : model.params()) {
    const auto it = std::find_if(members.begin(), members.end(), [&](const ZipMember& m) { return m.name == name + ".npy"; });
    if (it == members.end()) throw FormatError(path.string() + ": missing parameter " + name);
    const auto arr = decode_npy(it->data, it->name);
    if (arr.shape.size() != 2 || arr.shape[0] != static_cast<std::size_t>(v.rows()) ||
        arr.shape[1] != static_cast<std::size_t>(v.cols()))
      throw IntegrityError(it->name + ": shape differs from the model layout");
    const auto values = arr.to_doubles();
    Var target = v;
    std::copy(values.begin(), values.end(), target.mutable_value().data());
  }
  return model;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string history_csv(const std::vector<double>& history) {
  std::string out = "epoch,train_loss\n";
  for (std::size_t e = 0; e < history.size(); ++e) out += std::to_string(e + 1) + "," + format_double(history[e]) + "\n";
  return out;
}

}  // namespace amptcr
