#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "amptcr/commands.hpp"
#include "amptcr/config.hpp"
#include "amptcr/error.hpp"
#include "amptcr/hash.hpp"
#include "amptcr/model.hpp"
#include "amptcr/molecule.hpp"
#include "amptcr/npz.hpp"
#include "amptcr/synthetic.hpp"
#include "test_util.hpp"

using namespace amptcr;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(AMPTCR_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

const char* kSmallModel = R"({"seed": 3, "surface": {"n_points": 64},
  "model": {"k_nn": 4, "width": 8, "heads": 2, "layers": 1, "fp_hidden": 4, "epochs": 2},
  "folds": {"mode": "kfold", "folds": 3}})";

}  // namespace

TEST_CASE("config json round trip and hash") {
  PipelineConfig cfg;
  cfg.surface.n_points = cfg.model.n_points = 256;
  const auto again = pipeline_config_from_json(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));
  CHECK(config_hash(again) == config_hash(cfg));
  CHECK(config_hash(cfg) == Fnv1a64().text(to_json(cfg).dump()).value());
  PipelineConfig other = cfg;
  other.model.epochs += 1;
  CHECK(config_hash(other) != config_hash(cfg));

  const auto seeded = pipeline_config_from_json({{"seed", 9}, {"model", {{"seed", 4}}}});
  CHECK(seeded.surface.seed == 9);
  CHECK(seeded.folds.seed == 9);
  CHECK(seeded.model.seed == 4);
  CHECK(pipeline_config_from_json({{"surface", {{"n_points", 128}}}}).model.n_points == 128);
  CHECK(pipeline_config_from_json({{"model", {{"task", "binary"}}}, {"labels", "mic_binary"}}).model.fp_weight == 0.25);
  CHECK(pipeline_config_from_json(nlohmann::json::object()).model.fp_weight == 0.15);

  CHECK_THROWS_AS(pipeline_config_from_json({{"bogus", 1}}), PreconditionError);
  CHECK_THROWS_AS(pipeline_config_from_json({{"surface", {{"spacing", -1.0}}}}), PreconditionError);
  CHECK_THROWS_AS(pipeline_config_from_json({{"surface", {{"scalar", "nmr"}}}}), PreconditionError);
  CHECK_THROWS_AS(pipeline_config_from_json({{"labels", "log10"}, {"model", {{"task", "binary"}}}}), PreconditionError);
}

TEST_CASE("labels csv") {
  const auto dir = testutil::scratch_dir("cli_labels");
  write_text(dir / "a.csv", "name,value\nm1, 1.5\n\nm2,-2e3\n");
  const auto rows = read_labels_csv(dir / "a.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].first == "m2");
  CHECK(rows[1].second == -2000.0);
  write_text(dir / "b.csv", "m1,1\nm2,abc\n");
  CHECK_THROWS_AS(read_labels_csv(dir / "b.csv"), ParseError);
}

TEST_CASE("build: one structure gives archive, mesh and manifest entry") {
  const auto dir = testutil::scratch_dir("cli_one");
  fs::create_directories(dir / "in");
  fs::copy_file(testutil::data_path("asymmetric20.pdb"), dir / "in" / "asym.pdb");
  write_text(dir / "in" / "notes.txt", "ignored");
  CHECK(run("build " + (dir / "in").string() + " --out " + (dir / "out").string() + " --points 128", dir / "log") == 0);
  CHECK(fs::exists(dir / "out" / "asym.npz"));
  CHECK(fs::exists(dir / "out" / "asym.ply"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  REQUIRE(manifest["molecules"].size() == 1);
  CHECK(manifest["molecules"][0]["status"] == "ok");
  CHECK(manifest["molecules"][0]["archive"] == "asym.npz");
  CHECK(manifest["config"]["surface"]["n_points"] == 128);
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("build: per-molecule failures are recorded and the run continues") {
  const auto dir = testutil::scratch_dir("cli_fail");
  fs::create_directories(dir / "in");
  fs::copy_file(testutil::data_path("asymmetric20.pdb"), dir / "in" / "asym.pdb");
  write_text(dir / "in" / "broken.xyz", "2\n\nC 0 0 0\n");
  write_text(dir / "in" / "tiny.xyz", "1\n\nH 0 0 0\n");
  const std::string out = (dir / "out").string();
  // a lone hydrogen's surface has far fewer than 1000 vertices
  CHECK(run("build " + (dir / "in").string() + " --out " + out + " --points 1000", dir / "log") == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  REQUIRE(manifest["molecules"].size() == 3);
  std::map<std::string, std::string> status;
  for (const auto& m : manifest["molecules"]) status[m["name"]] = m["status"];
  CHECK(status["asym"] == "ok");
  CHECK(status["broken"].rfind("failed:", 0) == 0);
  CHECK(status["tiny"].find("vertices") != std::string::npos);

  fs::remove(dir / "in" / "asym.pdb");
  CHECK(run("build " + (dir / "in").string() + " --out " + out + "2 --points 1000", dir / "log") == 1);
}

TEST_CASE("build output is byte-identical across runs and worker counts") {
  const auto dir = testutil::scratch_dir("cli_det");
  fs::create_directories(dir / "in");
  for (const auto& mol : random_clusters(4, 5, 12, 17))
    write_file_atomic(dir / "in" / (mol.name() + ".pdb"), format_pdb(mol));
  const std::string in = (dir / "in").string();
  REQUIRE(run("build " + in + " --out " + (dir / "a").string() + " --points 96 --seed 2", dir / "log") == 0);
  REQUIRE(run("build " + in + " --out " + (dir / "b").string() + " --points 96 --seed 2 --jobs 3", dir / "log") == 0);
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const auto name = e.path().filename();
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
}

TEST_CASE("bad configuration exits with status 2") {
  const auto dir = testutil::scratch_dir("cli_bad");
  write_text(dir / "bad.json", R"({"surface": {"isovalue_factor": 2.0}})");
  write_text(dir / "broken.json", "{not json");
  const std::string data = testutil::data_path("benzene.pdb");
  CHECK(run("build " + data + " --out " + (dir / "o").string() + " --config " + (dir / "bad.json").string(), dir / "log") == 2);
  CHECK(run("build " + data + " --out " + (dir / "o").string() + " --config " + (dir / "broken.json").string(), dir / "log") == 2);
  CHECK(run("build " + data + " --out " + (dir / "o").string() + " --scalar nmr", dir / "log") == 2);
  CHECK(run("build " + data, dir / "log") == 2);
  CHECK(!fs::exists(dir / "o"));
}

TEST_CASE("challenge command writes the report") {
  const auto dir = testutil::scratch_dir("cli_challenge");
  CHECK(run("challenge " + testutil::data_path("asymmetric20.pdb") + " --trials 4 --points 128 --out " + dir.string(),
            dir / "log") == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "challenge.json"));
  CHECK(report["trials"] == 4);
  CHECK(report["pairs"] == 6);
  CHECK(report["success_rate"] == 1.0);
}

TEST_CASE("train-eval: regression outputs, binary roc, label errors") {
  const auto dir = testutil::scratch_dir("cli_train");
  fs::create_directories(dir / "mols");
  std::string reg = "name,molecular_weight\n", bin = "name,active\n";
  int k = 0;
  for (const auto& mol : random_clusters(9, 5, 10, 23)) {
    write_file_atomic(dir / "mols" / (mol.name() + ".pdb"), format_pdb(mol));
    reg += mol.name() + "," + format_double(molecular_weight(mol)) + "\n";
    bin += mol.name() + "," + std::string(k++ % 3 == 0 ? "1" : "0") + "\n";
  }
  write_text(dir / "reg.csv", reg);
  write_text(dir / "bin.csv", bin);
  write_text(dir / "small.json", kSmallModel);
  const std::string cfg = " --config " + (dir / "small.json").string();
  const std::string clouds = (dir / "clouds").string();
  REQUIRE(run("build " + (dir / "mols").string() + " --out " + clouds + cfg, dir / "log") == 0);

  REQUIRE(run("train-eval " + clouds + " " + (dir / "reg.csv").string() + " --out " + (dir / "r").string() + cfg,
              dir / "log") == 0);
  CHECK(first_line(dir / "r" / "predictions.csv") == "name,y,yhat_raw,yhat_calibrated,fold,split");
  CHECK(first_line(dir / "r" / "folds.csv").rfind("fold,n_train,n_val,status,p,q", 0) == 0);
  for (int f = 0; f < 3; ++f) {
    CHECK(fs::exists(dir / "r" / "models" / ("fold_" + std::to_string(f) + ".npz")));
    CHECK(first_line(dir / "r" / "history" / ("fold_" + std::to_string(f) + ".csv")) == "epoch,train_loss");
  }
  const auto results = nlohmann::json::parse(slurp(dir / "r" / "results.json"));
  CHECK(results["config"]["model"]["fp_weight"] == 0.15);
  CHECK(results["pooled"].contains("calibrated"));
  CHECK(results["n_samples"] == 9);

  // fp weight and fold flags override the config file
  REQUIRE(run("train-eval " + clouds + " " + (dir / "reg.csv").string() + " --out " + (dir / "r2").string() + cfg +
                  " --fp-weight 0.5 --calibrate off --mode random --folds 2",
              dir / "log") == 0);
  const auto r2 = nlohmann::json::parse(slurp(dir / "r2" / "results.json"));
  CHECK(r2["config"]["model"]["fp_weight"] == 0.5);
  CHECK(r2["calibrated"] == false);
  CHECK(r2["folds"].size() == 2);

  write_text(dir / "bin.json", std::string(kSmallModel).replace(std::string(kSmallModel).find("\"epochs\""), 0,
                                                                 "\"task\": \"binary\", "));
  REQUIRE(run("train-eval " + clouds + " " + (dir / "bin.csv").string() + " --out " + (dir / "b").string() +
                  " --config " + (dir / "bin.json").string(),
              dir / "log") == 0);
  const auto b = nlohmann::json::parse(slurp(dir / "b" / "results.json"));
  CHECK(b["config"]["model"]["fp_weight"] == 0.25);
  std::ifstream roc(dir / "b" / "roc_points.csv");
  std::string line;
  std::getline(roc, line);
  CHECK(line == "threshold,fpr,tpr");
  double last = -1.0;
  std::size_t rows = 0;
  while (std::getline(roc, line)) {
    const double fpr = std::stod(line.substr(line.find(',') + 1));
    CHECK(fpr >= last);
    last = fpr;
    ++rows;
  }
  CHECK(rows >= 2);
  CHECK(last == 1.0);

  write_text(dir / "missing.csv", reg + "ghost1,1\nghost2,2\n");
  CHECK(run("train-eval " + clouds + " " + (dir / "missing.csv").string() + " --out " + (dir / "m").string() + cfg,
            dir / "log") == 1);
  const auto log = slurp(dir / "log");
  CHECK(log.find("ghost1") != std::string::npos);
  CHECK(log.find("ghost2") != std::string::npos);
}

TEST_CASE("train-eval output is byte-identical across runs") {
  const auto dir = testutil::scratch_dir("cli_train_det");
  fs::create_directories(dir / "mols");
  std::string reg = "name,mw\n";
  for (const auto& mol : random_clusters(6, 5, 9, 31)) {
    write_file_atomic(dir / "mols" / (mol.name() + ".pdb"), format_pdb(mol));
    reg += mol.name() + "," + format_double(molecular_weight(mol)) + "\n";
  }
  write_text(dir / "reg.csv", reg);
  write_text(dir / "small.json", kSmallModel);
  const std::string cfg = " --config " + (dir / "small.json").string();
  REQUIRE(run("build " + (dir / "mols").string() + " --out " + (dir / "c").string() + cfg, dir / "log") == 0);
  for (const char* out : {"x", "y"})
    REQUIRE(run("train-eval " + (dir / "c").string() + " " + (dir / "reg.csv").string() + " --out " +
                    (dir / out).string() + cfg,
                dir / "log") == 0);
  for (const char* f : {"predictions.csv", "folds.csv", "results.json", "models/fold_0.npz", "history/fold_1.csv"})
    CHECK(slurp(dir / "x" / f) == slurp(dir / "y" / f));
}
