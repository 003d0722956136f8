#include "amptcr/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "amptcr/error.hpp"
#include "amptcr/hash.hpp"

namespace amptcr {

namespace {

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

void same_length(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) throw PreconditionError(std::string(what) + ": predictions and labels differ in length");
}

void check_binary(std::span<const double> labels) {
  bool pos = false, neg = false;
  for (double l : labels) {
    if (l == 1.0) pos = true;
    else if (l == 0.0) neg = true;
    else throw PreconditionError("binary labels must be 0 or 1");
  }
  if (!pos || !neg) throw PreconditionError("ROC AUC needs both classes");
}

}  // namespace

CalibrationParams ols_fit(std::span<const double> yhat, std::span<const double> y) {
  same_length(yhat, y, "ols_fit");
  if (y.size() < 2) throw PreconditionError("ols_fit needs at least two points");
  const double my = mean_of(y), mh = mean_of(yhat);
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    cov += (y[i] - my) * (yhat[i] - mh);
    var += (y[i] - my) * (y[i] - my);
  }
  if (var <= 0.0) throw PreconditionError("ols_fit: labels have zero variance");
  CalibrationParams c;
  c.p = cov / var;
  c.q = mh - c.p * my;
  if (std::abs(c.p) <= kMinCalibrationSlope) throw NumericError("uncalibratable: fitted slope is ~0");
  return c;
}

std::vector<double> calibrate(std::span<const double> preds, const CalibrationParams& params) {
  if (std::abs(params.p) <= kMinCalibrationSlope) throw PreconditionError("calibration slope too small");
  std::vector<double> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) out[i] = (preds[i] - params.q) / params.p;
  return out;
}

RegressionMetrics regression_metrics(std::span<const double> preds, std::span<const double> labels) {
  same_length(preds, labels, "regression_metrics");
  if (labels.size() < 2) throw PreconditionError("metrics need at least two points");
  const double my = mean_of(labels);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ss_res += (labels[i] - preds[i]) * (labels[i] - preds[i]);
    ss_tot += (labels[i] - my) * (labels[i] - my);
  }
  if (ss_tot <= 0.0) throw PreconditionError("metrics: labels have zero variance");
  RegressionMetrics m;
  m.r2 = 1.0 - ss_res / ss_tot;
  const double mh = mean_of(preds);
  double cov = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) cov += (labels[i] - my) * (preds[i] - mh);
  m.slope = cov / ss_tot;
  m.rmse = std::sqrt(ss_res / static_cast<double>(labels.size()));
  return m;
}

double roc_auc(std::span<const double> scores, std::span<const double> labels) {
  same_length(scores, labels, "roc_auc");
  check_binary(labels);
  // Mann-Whitney U with midranks for ties.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1.0) {
        rank_sum += midrank;
        ++n_pos;
      }
    i = j;
  }
  const auto np = static_cast<double>(n_pos), nn = static_cast<double>(labels.size() - n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

BinaryMetrics binary_metrics(std::span<const double> scores, std::span<const double> labels, double threshold) {
  BinaryMetrics m;
  m.roc_auc = roc_auc(scores, labels);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold, actual = labels[i] == 1.0;
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
  }
  m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  return m;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const double> labels) {
  same_length(scores, labels, "roc_curve");
  check_binary(labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const double np = static_cast<double>(std::count(labels.begin(), labels.end(), 1.0));
  const double nn = static_cast<double>(labels.size()) - np;
  std::vector<RocPoint> out{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1.0 ? tp : fp) += 1;
    out.push_back({s, static_cast<double>(fp) / nn, static_cast<double>(tp) / np});
  }
  return out;
}

std::vector<MicClass> binarize_mic(std::span<const double> median_um) {
  std::vector<MicClass> out;
  out.reserve(median_um.size());
  for (double v : median_um) {
    if (!(v > 0.0)) throw PreconditionError("MIC values must be positive");
    out.push_back(v <= 1.0 ? MicClass::hit : v > 10.0 ? MicClass::non_hit : MicClass::excluded);
  }
  return out;
}

std::vector<double> log10_transform(std::span<const double> values_um) {
  std::vector<double> out;
  out.reserve(values_um.size());
  for (double v : values_um) {
    if (!(v > 0.0)) throw PreconditionError("log10 transform needs positive values");
    out.push_back(std::log10(v));
  }
  return out;
}

void FoldPlan::validate() const {
  if (folds < 2) throw PreconditionError("fold plan needs at least two folds");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw PreconditionError("train fraction must lie in (0, 1)");
}

std::string to_string(FoldMode mode) { return mode == FoldMode::kfold ? "kfold" : "random"; }

FoldMode fold_mode_from_string(std::string_view s) {
  if (s == "kfold" || s == "kfold_partition") return FoldMode::kfold;
  if (s == "random" || s == "random_split") return FoldMode::random_split;
  throw PreconditionError("unknown fold mode '" + std::string(s) + "'");
}

nlohmann::json to_json(const FoldPlan& plan) {
  return nlohmann::json{{"mode", to_string(plan.mode)},
                        {"folds", plan.folds},
                        {"train_fraction", plan.train_fraction},
                        {"seed", plan.seed}};
}

FoldPlan fold_plan_from_json(const nlohmann::json& j, FoldPlan plan) {
  if (j.contains("mode")) plan.mode = fold_mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("folds")) plan.folds = j.at("folds").get<std::size_t>();
  if (j.contains("train_fraction")) plan.train_fraction = j.at("train_fraction").get<double>();
  if (j.contains("seed")) plan.seed = j.at("seed").get<std::uint64_t>();
  plan.validate();
  return plan;
}

std::vector<FoldSplit> make_folds(const FoldPlan& plan, std::size_t n) {
  plan.validate();
  if (n < plan.folds) throw PreconditionError("dataset smaller than the number of folds");
  std::vector<FoldSplit> out(plan.folds);
  std::vector<std::size_t> order(n);
  if (plan.mode == FoldMode::kfold) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(combine_keys(plan.seed, 0x6b666f6c64ULL));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t f = 0; f < plan.folds; ++f) {
      const std::size_t lo = f * n / plan.folds, hi = (f + 1) * n / plan.folds;
      std::vector<bool> in_val(n, false);
      for (std::size_t i = lo; i < hi; ++i) in_val[order[i]] = true;
      for (std::size_t i = 0; i < n; ++i) (in_val[i] ? out[f].validation : out[f].train).push_back(i);
    }
  } else {
    const auto n_val = static_cast<std::size_t>(std::ceil((1.0 - plan.train_fraction) * static_cast<double>(n) - 1e-9));
    if (n_val < 1 || n_val >= n) throw PreconditionError("random split leaves an empty side");
    for (std::size_t f = 0; f < plan.folds; ++f) {
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(combine_keys(plan.seed, f));
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<bool> in_val(n, false);
      for (std::size_t i = 0; i < n_val; ++i) in_val[order[i]] = true;
      for (std::size_t i = 0; i < n; ++i) (in_val[i] ? out[f].validation : out[f].train).push_back(i);
    }
  }
  return out;
}

namespace {

nlohmann::json metrics_json(Task task, std::span<const double> preds, std::span<const double> labels) {
  try {
    if (task == Task::regression) {
      const auto m = regression_metrics(preds, labels);
      return {{"r2", m.r2}, {"slope", m.slope}, {"rmse", m.rmse}};
    }
    const auto m = binary_metrics(preds, labels);
    return {{"roc_auc", m.roc_auc}, {"precision", m.precision}, {"recall", m.recall}};
  } catch (const PreconditionError& e) {
    return {{"error", e.what()}};
  }
}

void summarize(nlohmann::json& summary, const std::string& key, const std::vector<double>& values) {
  if (values.empty()) return;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double se = 0.0;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / static_cast<double>(values.size() - 1)) / std::sqrt(static_cast<double>(values.size()));
  }
  summary[key] = {{"mean", mean}, {"se", se}, {"n", values.size()}};
}

}  // namespace

FoldReport fold_runner(const LabelSource& labels, const FoldPlan& plan, const TrainFn& train, Task task,
                       bool calibrate_preds) {
  const auto splits = make_folds(plan, labels.size());
  FoldReport report;
  report.task = task;
  report.calibrated = calibrate_preds && task == Task::regression;

  std::vector<std::vector<double>> train_labels(splits.size());
  for (std::size_t f = 0; f < splits.size(); ++f) {
    FoldRecord rec;
    rec.fold = f;
    rec.split = splits[f];
    labels.begin_fold(f);
    try {
      auto& y = train_labels[f];
      for (auto i : rec.split.train) y.push_back(labels.label(i));
      if (task == Task::binary) {
        const bool pos = std::count(y.begin(), y.end(), 1.0) > 0, neg = std::count(y.begin(), y.end(), 0.0) > 0;
        if (!pos || !neg) throw PreconditionError("training labels hold a single class");
      }
      const Predictor predict = train(rec.split.train, y, f, plan.seed + f);
      for (auto i : rec.split.train) rec.train_raw.push_back(predict(i));
      for (auto i : rec.split.validation) rec.val_raw.push_back(predict(i));
      if (report.calibrated) {
        rec.calibration = ols_fit(rec.train_raw, y);
        rec.train_calibrated = calibrate(rec.train_raw, *rec.calibration);
        rec.val_calibrated = calibrate(rec.val_raw, *rec.calibration);
      } else {
        rec.train_calibrated = rec.train_raw;
        rec.val_calibrated = rec.val_raw;
      }
    } catch (const Error& e) {
      rec.failed = true;
      rec.error = e.what();
      ++report.failed_folds;
    }
    report.folds.push_back(std::move(rec));
  }

  // Validation labels are touched from here on only.
  labels.begin_evaluation();
  std::vector<double> fold_primary, fold_secondary, fold_tertiary;
  for (auto& rec : report.folds) {
    if (rec.failed) continue;
    std::vector<double> yv;
    for (auto i : rec.split.validation) yv.push_back(labels.label(i));
    rec.metrics = {{"raw", metrics_json(task, rec.val_raw, yv)}};
    if (report.calibrated) rec.metrics["calibrated"] = metrics_json(task, rec.val_calibrated, yv);
    const auto& m = report.calibrated ? rec.metrics["calibrated"] : rec.metrics["raw"];
    if (!m.contains("error")) {
      if (task == Task::regression) {
        fold_primary.push_back(m["r2"]);
        fold_secondary.push_back(m["slope"]);
        fold_tertiary.push_back(m["rmse"]);
      } else {
        fold_primary.push_back(m["roc_auc"]);
        fold_secondary.push_back(m["precision"]);
        fold_tertiary.push_back(m["recall"]);
      }
    }
    for (std::size_t k = 0; k < rec.split.validation.size(); ++k) {
      report.pooled_index.push_back(rec.split.validation[k]);
      report.pooled_label.push_back(yv[k]);
      report.pooled_raw.push_back(rec.val_raw[k]);
      report.pooled_calibrated.push_back(rec.val_calibrated[k]);
    }
  }
  report.pooled_metrics = {{"raw", metrics_json(task, report.pooled_raw, report.pooled_label)}};
  if (report.calibrated)
    report.pooled_metrics["calibrated"] = metrics_json(task, report.pooled_calibrated, report.pooled_label);
  report.fold_summary = nlohmann::json::object();
  const bool reg = task == Task::regression;
  summarize(report.fold_summary, reg ? "r2" : "roc_auc", fold_primary);
  summarize(report.fold_summary, reg ? "slope" : "precision", fold_secondary);
  summarize(report.fold_summary, reg ? "rmse" : "recall", fold_tertiary);
  return report;
}

}  // namespace amptcr
