#include "amptcr/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "amptcr/challenge.hpp"
#include "amptcr/cloudstore.hpp"
#include "amptcr/error.hpp"
#include "amptcr/npz.hpp"
#include "amptcr/parallel.hpp"
#include "amptcr/surface.hpp"

namespace amptcr {

namespace fs = std::filesystem;

std::vector<fs::path> list_structures(const fs::path& input) {
  if (fs::is_regular_file(input)) return {input};
  if (!fs::is_directory(input)) throw PreconditionError("input " + input.string() + " is not a file or directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(input)) {
    if (!entry.is_regular_file()) continue;
    try {
      format_from_extension(entry.path().string());
      out.push_back(entry.path());
    } catch (const PreconditionError&) {
    }
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

nlohmann::json manifest_json(const BuildSummary& summary, const PipelineConfig& config) {
  nlohmann::json molecules = nlohmann::json::array();
  for (const auto& e : summary.entries) {
    nlohmann::json m{{"name", e.name}, {"input", e.input}, {"status", e.status}, {"warnings", e.warnings}};
    if (e.status == "ok") {
      m["archive"] = e.archive;
      m["ply"] = e.ply;
      m["molecular_weight"] = e.molecular_weight;
    }
    molecules.push_back(std::move(m));
  }
  return {{"format_version", 1},
          {"config_hash", hash_hex(summary.config_hash)},
          {"config", to_json(config)},
          {"ok", summary.ok},
          {"failed", summary.failed},
          {"molecules", std::move(molecules)}};
}

BuildSummary cmd_build(const fs::path& input, const PipelineConfig& config, const fs::path& out_dir,
                       std::size_t jobs) {
  config.validate();
  const auto files = list_structures(input);
  BuildSummary summary;
  summary.config_hash = config_hash(config);
  summary.entries.resize(files.size());
  fs::create_directories(out_dir);

  std::map<std::string, std::size_t> first_use;
  std::vector<bool> duplicate(files.size(), false);
  for (std::size_t i = 0; i < files.size(); ++i)
    if (!first_use.emplace(files[i].stem().string(), i).second) duplicate[i] = true;

  parallel_for(files.size(), jobs, [&](std::size_t i) {
    BuildEntry& e = summary.entries[i];
    e.name = files[i].stem().string();
    e.input = files[i].filename().string();
    if (duplicate[i]) {
      e.status = "failed:duplicate molecule name '" + e.name + "'";
      return;
    }
    try {
      const Molecule mol = read_structure_file(files[i].string());
      const CloudBuild build = build_cloud(mol, config.surface, summary.config_hash);
      e.archive = e.name + ".npz";
      e.ply = e.name + ".ply";
      write_archive(build.cloud, out_dir / e.archive);
      write_file_atomic(out_dir / e.ply, export_ply(build.surface.mesh));
      e.molecular_weight = molecular_weight(mol);
      e.warnings = build.cloud.meta.warnings;
      e.status = "ok";
    } catch (const std::exception& ex) {
      e.status = std::string("failed:") + ex.what();
      e.archive.clear();
      e.ply.clear();
    }
  });
  for (const auto& e : summary.entries) (e.status == "ok" ? summary.ok : summary.failed) += 1;
  write_file_atomic(out_dir / "manifest.json", manifest_json(summary, config).dump(2) + "\n");
  return summary;
}

nlohmann::json cmd_challenge(const fs::path& structure, const PipelineConfig& config, std::uint64_t seed,
                             const fs::path& out_dir, std::size_t jobs) {
  config.validate();
  const Molecule mol = read_structure_file(structure.string());
  const auto report =
      rotation_challenge(mol, config.surface, config.challenge_trials, seed, config.challenge_threshold, jobs);
  nlohmann::json j = to_json(report);
  j["name"] = mol.name();
  j["seed"] = seed;
  j["config_hash"] = hash_hex(config_hash(config));
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file_atomic(out_dir / "challenge.json", j.dump(2) + "\n");
  }
  return j;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::vector<std::pair<std::string, double>> read_labels_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open labels file " + path.string());
  std::vector<std::pair<std::string, double>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) throw ParseError(path.string() + ": expected name,value", lineno);
    const auto name = trim(text.substr(0, comma));
    double value = 0.0;
    if (!parse_number(trim(text.substr(comma + 1)), value)) {
      if (out.empty() && lineno == 1) continue;  // header
      throw ParseError(path.string() + ": bad label value", lineno);
    }
    if (name.empty()) throw ParseError(path.string() + ": empty molecule name", lineno);
    out.emplace_back(std::string(name), value);
  }
  return out;
}

namespace {

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : (v > 0 ? "inf" : v < 0 ? "-inf" : "nan"); }

std::vector<std::string> metric_keys(Task task) {
  return task == Task::regression ? std::vector<std::string>{"r2", "slope", "rmse"}
                                  : std::vector<std::string>{"roc_auc", "precision", "recall"};
}

}  // namespace

TrainEvalSummary cmd_train_eval(const fs::path& cloud_dir, const fs::path& labels_file, const PipelineConfig& config,
                                const fs::path& out_dir) {
  config.validate();
  nlohmann::json manifest;
  {
    std::ifstream in(cloud_dir / "manifest.json");
    if (!in) throw PreconditionError("no manifest.json in " + cloud_dir.string());
    manifest = nlohmann::json::parse(in);
  }
  std::map<std::string, std::string> archives;
  for (const auto& m : manifest.at("molecules"))
    if (m.at("status") == "ok") archives.emplace(m.at("name").get<std::string>(), m.at("archive").get<std::string>());

  std::map<std::string, double> raw_labels;
  std::vector<std::string> unmatched;
  for (const auto& [name, value] : read_labels_csv(labels_file)) {
    if (!raw_labels.emplace(name, value).second) throw PreconditionError("duplicate label for '" + name + "'");
    if (!archives.count(name)) unmatched.push_back(name);
  }
  if (!unmatched.empty()) {
    std::string list;
    for (const auto& n : unmatched) list += (list.empty() ? "" : ", ") + n;
    throw PreconditionError("labels without a built cloud: " + list);
  }

  TrainEvalSummary summary;
  std::vector<double> values;
  for (const auto& [name, value] : raw_labels) {
    summary.names.push_back(name);
    values.push_back(value);
  }
  switch (config.labels) {
    case LabelTransform::none:
      summary.labels = values;
      break;
    case LabelTransform::log10:
      summary.labels = log10_transform(values);
      break;
    case LabelTransform::mic_binary: {
      const auto classes = binarize_mic(values);
      std::vector<std::string> kept;
      for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] == MicClass::excluded) continue;
        kept.push_back(summary.names[i]);
        summary.labels.push_back(classes[i] == MicClass::hit ? 1.0 : 0.0);
      }
      summary.names = std::move(kept);
      break;
    }
  }
  if (summary.names.size() < config.folds.folds)
    throw PreconditionError("only " + std::to_string(summary.names.size()) + " labelled molecules for " +
                            std::to_string(config.folds.folds) + " folds");

  std::vector<AmptcrCloud> clouds;
  std::vector<Fingerprint> fps;
  for (const auto& name : summary.names) {
    clouds.push_back(read_archive(cloud_dir / archives.at(name)));
    fps.push_back(Fingerprint::from_hex(clouds.back().meta.fingerprint_hex, config.surface.fp_radius));
  }

  fs::create_directories(out_dir / "history");
  fs::create_directories(out_dir / "models");
  const TrainFn train_fn = [&](const std::vector<std::size_t>& idx, const std::vector<double>& y, std::size_t fold,
                               std::uint64_t seed) -> Predictor {
    ModelConfig mc = config.model;
    mc.seed = seed;
    std::vector<Sample> samples;
    for (std::size_t k = 0; k < idx.size(); ++k) samples.push_back({&clouds[idx[k]], &fps[idx[k]], y[k]});
    TrainResult result = train(samples, mc);
    const std::string stem = "fold_" + std::to_string(fold);
    write_file_atomic(out_dir / "history" / (stem + ".csv"), history_csv(result.history));
    save_model(result.model, out_dir / "models" / (stem + ".npz"));
    auto model = std::make_shared<Model>(std::move(result.model));
    return [model, &clouds, &fps](std::size_t i) { return model->predict(clouds[i], fps[i]); };
  };

  summary.report = fold_runner(VectorLabels(summary.labels), config.folds, train_fn, config.model.task,
                               config.calibrate);
  const FoldReport& report = summary.report;

  std::ostringstream preds;
  preds << "name,y,yhat_raw,yhat_calibrated,fold,split\n";
  for (const auto& rec : report.folds) {
    if (rec.failed) continue;
    auto rows = [&](const std::vector<std::size_t>& idx, const std::vector<double>& raw,
                    const std::vector<double>& cal, const char* split) {
      for (std::size_t k = 0; k < idx.size(); ++k)
        preds << summary.names[idx[k]] << ',' << csv_number(summary.labels[idx[k]]) << ',' << csv_number(raw[k])
              << ',' << csv_number(cal[k]) << ',' << rec.fold << ',' << split << '\n';
    };
    rows(rec.split.train, rec.train_raw, rec.train_calibrated, "train");
    rows(rec.split.validation, rec.val_raw, rec.val_calibrated, "validation");
  }
  write_file_atomic(out_dir / "predictions.csv", preds.str());

  const auto keys = metric_keys(config.model.task);
  std::ostringstream folds_csv;
  folds_csv << "fold,n_train,n_val,status,p,q";
  for (const char* kind : {"raw", "calibrated"})
    for (const auto& k : keys) folds_csv << ',' << kind << '_' << k;
  folds_csv << '\n';
  nlohmann::json fold_json = nlohmann::json::array();
  for (const auto& rec : report.folds) {
    folds_csv << rec.fold << ',' << rec.split.train.size() << ',' << rec.split.validation.size() << ','
              << (rec.failed ? "failed" : "ok") << ',';
    if (rec.calibration) folds_csv << csv_number(rec.calibration->p) << ',' << csv_number(rec.calibration->q);
    else folds_csv << ',';
    for (const char* kind : {"raw", "calibrated"})
      for (const auto& k : keys) {
        folds_csv << ',';
        if (rec.metrics.contains(kind) && rec.metrics[kind].contains(k)) folds_csv << csv_number(rec.metrics[kind][k]);
      }
    folds_csv << '\n';
    nlohmann::json f{{"fold", rec.fold},
                     {"n_train", rec.split.train.size()},
                     {"n_val", rec.split.validation.size()},
                     {"status", rec.failed ? "failed:" + rec.error : "ok"},
                     {"metrics", rec.metrics}};
    if (rec.calibration) {
      f["p"] = rec.calibration->p;
      f["q"] = rec.calibration->q;
    }
    fold_json.push_back(std::move(f));
  }
  write_file_atomic(out_dir / "folds.csv", folds_csv.str());

  if (config.model.task == Task::binary && !report.pooled_label.empty()) {
    try {
      std::ostringstream roc;
      roc << "threshold,fpr,tpr\n";
      for (const auto& p : roc_curve(report.pooled_raw, report.pooled_label))
        roc << csv_number(p.threshold) << ',' << csv_number(p.fpr) << ',' << csv_number(p.tpr) << '\n';
      write_file_atomic(out_dir / "roc_points.csv", roc.str());
    } catch (const PreconditionError&) {
      // single-class pooled labels: no curve
    }
  }

  const nlohmann::json results{{"config_hash", hash_hex(config_hash(config))},
                               {"config", to_json(config)},
                               {"task", to_string(config.model.task)},
                               {"n_samples", summary.names.size()},
                               {"unlabelled_clouds", archives.size() - raw_labels.size()},
                               {"calibrated", report.calibrated},
                               {"failed_folds", report.failed_folds},
                               {"pooled", report.pooled_metrics},
                               {"fold_summary", report.fold_summary},
                               {"folds", fold_json}};
  write_file_atomic(out_dir / "results.json", results.dump(2) + "\n");
  return summary;
}

}  // namespace amptcr
