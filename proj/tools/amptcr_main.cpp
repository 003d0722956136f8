#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "amptcr/commands.hpp"
#include "amptcr/error.hpp"
#include "amptcr/npz.hpp"
#include "amptcr/synthetic.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kBadConfig = 2;

struct Common {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::optional<std::size_t> points;
  std::optional<std::string> scalar;
};

struct TrainFlags {
  std::optional<double> fp_weight;
  std::optional<std::size_t> folds;
  std::optional<std::string> mode;
  std::optional<std::string> calibrate;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out) {
  cmd->add_option("--config", c.config, "pipeline config JSON")->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", c.out, "output directory");
  if (needs_out) out->required();
  cmd->add_option("--seed", c.seed, "seed for sampling, training and folds");
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--points", c.points, "points per cloud");
  cmd->add_option("--scalar", c.scalar, "surface scalar")->check(CLI::IsMember({"esp", "fukui"}));
}

amptcr::PipelineConfig resolve(const Common& c, const TrainFlags* t) {
  amptcr::PipelineConfig cfg = c.config.empty() ? amptcr::PipelineConfig{} : amptcr::load_pipeline_config(c.config);
  if (c.seed) cfg.set_seed(*c.seed);
  if (c.points) cfg.surface.n_points = cfg.model.n_points = *c.points;
  if (c.scalar) cfg.surface.scalar = amptcr::scalar_kind_from_string(*c.scalar);
  if (t) {
    if (t->fp_weight) cfg.model.fp_weight = *t->fp_weight;
    if (t->folds) cfg.folds.folds = *t->folds;
    if (t->mode) cfg.folds.mode = amptcr::fold_mode_from_string(*t->mode);
    if (t->calibrate) cfg.calibrate = *t->calibrate == "on";
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aligned surface point clouds: build, alignment challenge, fold evaluation"};
  app.require_subcommand(1);

  Common build_opts, challenge_opts, train_opts;
  TrainFlags train_flags;
  std::string build_input, challenge_input, cloud_dir, labels;
  std::optional<std::size_t> trials;
  std::string synth_out;
  std::size_t synth_count = 120, synth_min = 5, synth_max = 25;
  std::uint64_t synth_seed = 0;

  auto* build = app.add_subcommand("build", "structure files -> cloud archives, meshes and manifest");
  build->add_option("input", build_input, "structure file or directory")->required()->check(CLI::ExistingPath);
  add_common(build, build_opts, true);

  auto* challenge = app.add_subcommand("challenge", "rotation challenge on one structure");
  challenge->add_option("structure", challenge_input, "structure file")->required()->check(CLI::ExistingFile);
  challenge->add_option("--trials", trials, "number of random poses");
  add_common(challenge, challenge_opts, false);

  auto* train_eval = app.add_subcommand("train-eval", "fold protocol over built clouds");
  train_eval->add_option("clouds", cloud_dir, "directory written by build")->required()->check(CLI::ExistingDirectory);
  train_eval->add_option("labels", labels, "CSV of name,value")->required()->check(CLI::ExistingFile);
  add_common(train_eval, train_opts, true);
  train_eval->add_option("--fp-weight", train_flags.fp_weight, "fingerprint blend weight")->check(CLI::Range(0.0, 1.0));
  train_eval->add_option("--folds", train_flags.folds, "number of folds");
  train_eval->add_option("--mode", train_flags.mode, "fold protocol")->check(CLI::IsMember({"kfold", "random"}));
  train_eval->add_option("--calibrate", train_flags.calibrate, "post hoc calibration")
      ->check(CLI::IsMember({"on", "off"}));

  auto* synth = app.add_subcommand("synth", "random atom clusters as PDB files plus molecular-weight labels");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--count", synth_count, "number of molecules");
  synth->add_option("--min-atoms", synth_min, "smallest cluster");
  synth->add_option("--max-atoms", synth_max, "largest cluster");
  synth->add_option("--seed", synth_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadConfig;
  }

  if (*synth) {
    try {
      std::filesystem::create_directories(synth_out);
      std::string csv = "name,molecular_weight\n";
      for (const auto& mol : amptcr::random_clusters(synth_count, synth_min, synth_max, synth_seed)) {
        amptcr::write_file_atomic(std::filesystem::path(synth_out) / (mol.name() + ".pdb"), amptcr::format_pdb(mol));
        csv += mol.name() + "," + amptcr::format_double(amptcr::molecular_weight(mol)) + "\n";
      }
      amptcr::write_file_atomic(std::filesystem::path(synth_out) / "labels.csv", csv);
      return kOk;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kFailure;
    }
  }

  amptcr::PipelineConfig cfg;
  try {
    if (*build) cfg = resolve(build_opts, nullptr);
    else if (*challenge) cfg = resolve(challenge_opts, nullptr);
    else cfg = resolve(train_opts, &train_flags);
    if (trials) cfg.challenge_trials = *trials;
    cfg.validate();
  } catch (const amptcr::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kBadConfig;
  }

  try {
    if (*build) {
      const auto summary = amptcr::cmd_build(build_input, cfg, build_opts.out, build_opts.jobs);
      std::cout << "built " << summary.ok << " of " << summary.entries.size() << " molecules\n";
      for (const auto& e : summary.entries)
        if (e.status != "ok") std::cerr << e.input << ": " << e.status << '\n';
      return summary.ok > 0 ? kOk : kFailure;
    }
    if (*challenge) {
      const auto report = amptcr::cmd_challenge(challenge_input, cfg, cfg.surface.seed, challenge_opts.out,
                                                challenge_opts.jobs);
      std::cout << report.dump(2) << '\n';
      return report.at("pairs").get<std::size_t>() > 0 ? kOk : kFailure;
    }
    const auto summary = amptcr::cmd_train_eval(cloud_dir, labels, cfg, train_opts.out);
    std::cout << summary.report.pooled_metrics.dump(2) << '\n';
    return summary.report.failed_folds < summary.report.folds.size() ? kOk : kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
