#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "amptcr/error.hpp"
#include "amptcr/evalkit.hpp"

using namespace amptcr;

namespace {

std::vector<double> uniform(std::size_t n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<std::size_t> argsort(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  return idx;
}

double brute_auc(const std::vector<double>& s, const std::vector<double>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1.0 && y[j] == 0.0) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return wins / pairs;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Records label reads and flags any read of a validation label of the fold
// being trained.
class AuditedLabels : public LabelSource {
 public:
  AuditedLabels(std::vector<double> labels, std::vector<FoldSplit> splits)
      : labels_(std::move(labels)), splits_(std::move(splits)) {}
  std::size_t size() const override { return labels_.size(); }
  double label(std::size_t i) const override {
    if (!evaluating_) {
      const auto& val = splits_.at(fold_).validation;
      if (std::binary_search(val.begin(), val.end(), i)) ++leaks;
      ++training_reads;
    } else {
      ++evaluation_reads;
    }
    return labels_.at(i);
  }
  void begin_fold(std::size_t fold) const override { fold_ = fold; }
  void begin_evaluation() const override { evaluating_ = true; }

  mutable std::size_t leaks = 0, training_reads = 0, evaluation_reads = 0;

 private:
  std::vector<double> labels_;
  std::vector<FoldSplit> splits_;
  mutable std::size_t fold_ = 0;
  mutable bool evaluating_ = false;
};

// Shrunken linear "model" of a hidden feature: yhat = 0.25 y + 3 + noise.
TrainFn shrunk_model(const std::vector<double>& truth, double noise, std::uint64_t seed) {
  return [&truth, noise, seed](const std::vector<std::size_t>&, const std::vector<double>&, std::size_t fold,
                               std::uint64_t) -> Predictor {
    return [&truth, noise, seed, fold](std::size_t i) {
      std::mt19937_64 rng(seed * 1000 + i * 7 + fold);
      std::normal_distribution<double> g(0.0, noise);
      return 0.25 * truth[i] + 3.0 + g(rng);
    };
  };
}

}  // namespace

TEST_CASE("ols fit closed forms") {
  std::mt19937_64 rng(1);
  const auto y = uniform(40, rng, -5, 5);
  const auto same = ols_fit(y, y);
  CHECK(std::abs(same.p - 1.0) < 1e-12);
  CHECK(std::abs(same.q) < 1e-12);

  std::vector<double> yhat;
  for (double v : y) yhat.push_back(0.25 * v + 3.0);
  const auto planted = ols_fit(yhat, y);
  CHECK(std::abs(planted.p - 0.25) < 1e-9);
  CHECK(std::abs(planted.q - 3.0) < 1e-9);

  CHECK_THROWS_AS(ols_fit(std::vector<double>{1.0}, std::vector<double>{1.0}), PreconditionError);
  CHECK_THROWS_AS(ols_fit(std::vector<double>{1.0, 2.0}, std::vector<double>{3.0, 3.0}), PreconditionError);
  CHECK_THROWS_AS(ols_fit(std::vector<double>{5.0, 5.0, 5.0}, std::vector<double>{1.0, 2.0, 3.0}), NumericError);
}

TEST_CASE("calibration restores the training slope, keeps ranking and correlation") {
  std::mt19937_64 rng(2);
  const auto y = uniform(60, rng, 0, 10);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<double> yhat;
  for (double v : y) yhat.push_back(0.25 * v + 3.0 + g(rng));

  const CalibrationParams id;
  CHECK(calibrate(yhat, id) == yhat);

  const auto params = ols_fit(yhat, y);
  const auto cal = calibrate(yhat, params);
  const auto refit = ols_fit(cal, y);
  CHECK(std::abs(refit.p - 1.0) < 1e-9);
  CHECK(std::abs(refit.q) < 1e-9);
  // projection: fitting again changes nothing
  const auto twice = calibrate(cal, refit);
  for (std::size_t i = 0; i < cal.size(); ++i) CHECK(std::abs(twice[i] - cal[i]) < 1e-9);
  CHECK(argsort(cal) == argsort(yhat));
  CHECK(std::abs(pearson(cal, y) - pearson(yhat, y)) < 1e-9);
  CHECK(std::abs(regression_metrics(cal, y).slope - 1.0) < 1e-9);
}

TEST_CASE("regression metrics") {
  const std::vector<double> y{1, 2, 3, 4, 5};
  const auto perfect = regression_metrics(y, y);
  CHECK(perfect.r2 == 1.0);
  CHECK(perfect.slope == 1.0);
  CHECK(perfect.rmse == 0.0);

  const std::vector<double> p{1.5, 1.5, 3.5, 3.5, 6.0};
  // SS_res = 0.25 * 4 + 1 = 2, SS_tot = 10
  const auto m = regression_metrics(p, y);
  CHECK(m.r2 == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(m.rmse == doctest::Approx(std::sqrt(2.0 / 5.0)).epsilon(1e-15));
  // slope of p on y: cov = 11 / 10
  CHECK(m.slope == doctest::Approx(1.1).epsilon(1e-14));
}

TEST_CASE("roc auc against the pair-counting oracle") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    auto s = uniform(30, rng);
    std::vector<double> y(30);
    for (std::size_t i = 0; i < 30; ++i) y[i] = i % 3 == 0 ? 1.0 : 0.0;
    std::shuffle(y.begin(), y.end(), rng);
    if (t % 2) // quantized scores exercise ties
      for (auto& v : s) v = std::round(v * 4.0) / 4.0;
    CHECK(std::abs(roc_auc(s, y) - brute_auc(s, y)) < 1e-12);
    // monotone transforms leave AUC unchanged
    std::vector<double> warped;
    for (double v : s) warped.push_back(std::exp(3.0 * v) - 7.0);
    CHECK(roc_auc(warped, y) == roc_auc(s, y));
  }
  const std::vector<double> y{0, 0, 1, 1};
  CHECK(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, y) == 1.0);
  CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, y) == 0.0);
  CHECK(roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, y) == 0.5);
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<double>{1, 1}), PreconditionError);
}

TEST_CASE("precision, recall and roc curve") {
  const std::vector<double> s{0.9, 0.8, 0.6, 0.4, 0.3, 0.55};
  const std::vector<double> y{1, 0, 1, 1, 0, 0};
  const auto m = binary_metrics(s, y);
  // predicted positive: 0.9, 0.8, 0.6, 0.55 -> tp 2, fp 2; fn 1
  CHECK(m.precision == 0.5);
  CHECK(m.recall == doctest::Approx(2.0 / 3.0));
  const auto curve = roc_curve(s, y);
  CHECK(curve.front().fpr == 0.0);
  CHECK(curve.front().tpr == 0.0);
  CHECK(curve.back().fpr == 1.0);
  CHECK(curve.back().tpr == 1.0);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].fpr >= curve[i - 1].fpr);
    CHECK(curve[i].tpr >= curve[i - 1].tpr);
    CHECK(curve[i].threshold < curve[i - 1].threshold);
  }
  // trapezoid area equals the rank statistic
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  CHECK(area == doctest::Approx(roc_auc(s, y)).epsilon(1e-14));
}

TEST_CASE("mic binarization and log transform") {
  const auto c = binarize_mic(std::vector<double>{0.5, 1.0, 5.0, 10.0, 10.01, 50.0});
  CHECK(c == std::vector<MicClass>{MicClass::hit, MicClass::hit, MicClass::excluded, MicClass::excluded,
                                   MicClass::non_hit, MicClass::non_hit});
  CHECK_THROWS_AS(binarize_mic(std::vector<double>{0.0}), PreconditionError);
  const auto l = log10_transform(std::vector<double>{1.0, 100.0, 0.37});
  CHECK(l[0] == 0.0);
  CHECK(l[1] == 2.0);
  CHECK(std::abs(std::pow(10.0, l[2]) - 0.37) < 1e-12);
  CHECK_THROWS_AS(log10_transform(std::vector<double>{-1.0}), PreconditionError);
}

TEST_CASE("fold plans") {
  FoldPlan k;
  k.folds = 6;
  k.seed = 4;
  const auto kf = make_folds(k, 100);
  std::vector<int> seen(100, 0);
  for (const auto& f : kf) {
    CHECK(f.train.size() + f.validation.size() == 100);
    CHECK((f.validation.size() == 16 || f.validation.size() == 17));
    for (auto i : f.validation) ++seen[i];
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));

  FoldPlan r;
  r.mode = FoldMode::random_split;
  r.folds = 24;
  r.train_fraction = 0.9;
  for (std::size_t n : {521u, 100u, 37u}) {
    for (const auto& f : make_folds(r, n)) {
      CHECK(f.validation.size() == static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n) - 1e-9)));
      std::set<std::size_t> all(f.train.begin(), f.train.end());
      all.insert(f.validation.begin(), f.validation.end());
      CHECK(all.size() == n);
    }
  }
  CHECK(make_folds(r, 100)[0].validation != make_folds(r, 100)[1].validation);

  FoldPlan bad;
  bad.folds = 1;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad.folds = 3;
  bad.train_fraction = 1.0;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  CHECK_THROWS_AS(make_folds(k, 5), PreconditionError);
  CHECK(fold_plan_from_json(to_json(r)).folds == 24);
}

TEST_CASE("fold runner calibrates per fold without reading validation labels") {
  std::mt19937_64 rng(5);
  const auto truth = uniform(120, rng, 100, 400);
  for (FoldMode mode : {FoldMode::kfold, FoldMode::random_split}) {
    FoldPlan plan;
    plan.mode = mode;
    plan.folds = 6;
    plan.train_fraction = 0.95;
    plan.seed = 11;
    const AuditedLabels labels(truth, make_folds(plan, truth.size()));
    const auto report = fold_runner(labels, plan, shrunk_model(truth, 5.0, 1), Task::regression, true);
    CHECK(labels.leaks == 0);
    CHECK(labels.training_reads > 0);
    CHECK(labels.evaluation_reads > 0);
    CHECK(report.failed_folds == 0);
    std::set<double> slopes;
    for (const auto& f : report.folds) {
      REQUIRE(f.calibration.has_value());
      slopes.insert(f.calibration->p);
      std::vector<double> y;
      for (auto i : f.split.train) y.push_back(truth[i]);
      CHECK(std::abs(ols_fit(f.train_calibrated, y).p - 1.0) < 1e-9);
    }
    CHECK(slopes.size() == plan.folds);
    CHECK(report.pooled_raw.size() == report.pooled_label.size());
    const double raw_slope = report.pooled_metrics["raw"]["slope"];
    const double cal_slope = report.pooled_metrics["calibrated"]["slope"];
    CHECK(std::abs(raw_slope - 0.25) < 0.05);
    CHECK(std::abs(cal_slope - 1.0) < 0.2);
    CHECK(report.fold_summary.contains("r2"));
  }
}

TEST_CASE("fold runner: seeds, binary mode, failing folds") {
  std::vector<double> y(24);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = i < 4 ? 1.0 : 0.0;
  FoldPlan plan;
  plan.folds = 4;
  plan.seed = 100;
  std::vector<std::uint64_t> seeds;
  const TrainFn fn = [&](const std::vector<std::size_t>&, const std::vector<double>&, std::size_t,
                         std::uint64_t seed) -> Predictor {
    seeds.push_back(seed);
    return [&y](std::size_t i) { return 0.3 + 0.4 * y[i]; };
  };
  const auto report = fold_runner(VectorLabels(y), plan, fn, Task::binary, true);
  CHECK(!report.calibrated);
  for (const auto& f : report.folds)
    if (!f.failed) CHECK(!f.calibration.has_value());
  CHECK(seeds == std::vector<std::uint64_t>{100, 101, 102, 103});

  // all positives in one validation block leaves a single-class training set
  std::vector<double> clustered(12, 0.0);
  const auto splits = make_folds(plan, 12);
  for (auto i : splits[2].validation) clustered[i] = 1.0;
  const auto failing = fold_runner(VectorLabels(clustered), plan, fn, Task::binary, false);
  CHECK(failing.failed_folds >= 1);
  CHECK(failing.folds[2].failed);
  CHECK(failing.folds[2].error.find("single class") != std::string::npos);
}
