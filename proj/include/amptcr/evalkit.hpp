#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "amptcr/model.hpp"

namespace amptcr {

// Fit of predictions on labels: yhat ~ p * y + q.
struct CalibrationParams {
  double p = 1.0;
  double q = 0.0;
};

inline constexpr double kMinCalibrationSlope = 1e-8;

// Closed form p = cov(y, yhat) / var(y), q = mean(yhat) - p mean(y).
// Throws PreconditionError on n < 2 or var(y) = 0, NumericError when
// |p| <= 1e-8 ("uncalibratable").
CalibrationParams ols_fit(std::span<const double> yhat, std::span<const double> y);

// Elementwise (yhat - q) / p.
std::vector<double> calibrate(std::span<const double> preds, const CalibrationParams& params);

struct RegressionMetrics {
  double r2 = 0.0;     // 1 - SS_res / SS_tot
  double slope = 0.0;  // p of ols_fit(preds, labels)
  double rmse = 0.0;
};

struct BinaryMetrics {
  double roc_auc = 0.0;
  double precision = 0.0;  // at score >= 0.5
  double recall = 0.0;
};

RegressionMetrics regression_metrics(std::span<const double> preds, std::span<const double> labels);
// Labels must be 0 or 1 with both classes present.
double roc_auc(std::span<const double> scores, std::span<const double> labels);
BinaryMetrics binary_metrics(std::span<const double> scores, std::span<const double> labels, double threshold = 0.5);

struct RocPoint {
  double threshold, fpr, tpr;
};
// One point per distinct score, descending threshold, starting at (0, 0).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const double> labels);

enum class MicClass { hit, non_hit, excluded };
// <= 1 uM hit, > 10 uM non-hit, otherwise excluded.
std::vector<MicClass> binarize_mic(std::span<const double> median_um);
std::vector<double> log10_transform(std::span<const double> values_um);

enum class FoldMode { kfold, random_split };

struct FoldPlan {
  FoldMode mode = FoldMode::kfold;
  std::size_t folds = 6;
  double train_fraction = 0.9;  // random_split only
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(const nlohmann::json& j, FoldPlan base = {});
std::string to_string(FoldMode mode);
FoldMode fold_mode_from_string(std::string_view s);

struct FoldSplit {
  std::vector<std::size_t> train, validation;  // ascending indices
};

// kfold: one seeded shuffle cut into `folds` near-equal contiguous blocks;
// random_split: independent seeded shuffles with validation size
// ceil((1 - train_fraction) n).
std::vector<FoldSplit> make_folds(const FoldPlan& plan, std::size_t n);

// Label access goes through this interface so tests can audit which labels
// are read while each fold trains.
class LabelSource {
 public:
  virtual ~LabelSource() = default;
  virtual std::size_t size() const = 0;
  virtual double label(std::size_t index) const = 0;
  virtual void begin_fold(std::size_t /*fold*/) const {}
  virtual void begin_evaluation() const {}
};

class VectorLabels : public LabelSource {
 public:
  explicit VectorLabels(std::vector<double> labels) : labels_(std::move(labels)) {}
  std::size_t size() const override { return labels_.size(); }
  double label(std::size_t i) const override { return labels_.at(i); }

 private:
  std::vector<double> labels_;
};

using Predictor = std::function<double(std::size_t index)>;
// Given training indices and their labels, return a predictor usable on any
// index. `seed` is plan.seed + fold.
using TrainFn = std::function<Predictor(const std::vector<std::size_t>& train, const std::vector<double>& labels,
                                        std::size_t fold, std::uint64_t seed)>;

struct FoldRecord {
  std::size_t fold = 0;
  FoldSplit split;
  bool failed = false;
  std::string error;
  std::optional<CalibrationParams> calibration;
  std::vector<double> train_raw, train_calibrated, val_raw, val_calibrated;
  nlohmann::json metrics;  // per-fold validation metrics
};

struct FoldReport {
  Task task = Task::regression;
  bool calibrated = false;
  std::vector<FoldRecord> folds;
  std::size_t failed_folds = 0;
  // Pooled over every successful fold's validation predictions.
  std::vector<std::size_t> pooled_index;
  std::vector<double> pooled_label, pooled_raw, pooled_calibrated;
  nlohmann::json pooled_metrics;   // raw and (when calibrating) calibrated
  nlohmann::json fold_summary;     // mean and standard error of per-fold metrics
};

// For each fold: train on the training labels only, predict training and
// validation indices, and with `calibrate` fit (p, q) on training predictions
// and apply it to both. Validation labels are read only after every fold
// has finished. Binary tasks never calibrate; a binary fold whose training
// labels hold one class fails and is counted.
FoldReport fold_runner(const LabelSource& labels, const FoldPlan& plan, const TrainFn& train, Task task,
                       bool calibrate);

}  // namespace amptcr
