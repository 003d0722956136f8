#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "amptcr/autodiff.hpp"
#include "amptcr/error.hpp"
#include "amptcr/layers.hpp"
#include "amptcr/model.hpp"
#include "test_util.hpp"

using namespace amptcr;
using namespace amptcr::nn;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

Matrix unit_rows(Matrix m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i).normalize();
  return m;
}

Matrix permute_rows(const Matrix& m, const std::vector<std::uint32_t>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(perm[i]);
  return out;
}

struct Instance {
  Matrix x, p, q, t1;
};

Instance random_instance(std::mt19937_64& rng, Eigen::Index n, Eigen::Index f) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Instance in{random_matrix(n, f, rng), random_matrix(n, 3, rng, 2.0), Matrix(n, 1), unit_rows(random_matrix(n, 3, rng))};
  for (Eigen::Index i = 0; i < n; ++i) in.q(i, 0) = u(rng);
  return in;
}

AttentionParams random_params(std::size_t f, std::size_t h, GeoMode mode, std::mt19937_64& rng) {
  auto a = AttentionParams::init(f, h, 0.0, mode, rng);
  // non-trivial gates, biases and norms so every path carries signal
  a.gate_logits = parameter(random_matrix(static_cast<Eigen::Index>(h), 3, rng));
  a.geo_proj = parameter(random_matrix(a.geo_proj.rows(), a.geo_proj.cols(), rng, 0.5));
  a.quant_proj = parameter(random_matrix(1, static_cast<Eigen::Index>(h), rng));
  a.topo_proj = parameter(random_matrix(1, static_cast<Eigen::Index>(h), rng));
  a.ln3_g = parameter(random_matrix(1, static_cast<Eigen::Index>(f), rng));
  return a;
}

AmptcrCloud toy_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AmptcrCloud c;
  c.meta.channels = {"t1.x", "t1.y", "t1.z", "h"};
  c.topo.resize(static_cast<Eigen::Index>(n), 4);
  for (std::size_t i = 0; i < n; ++i) {
    c.positions.emplace_back(g(rng), g(rng), g(rng));
    c.scalars.push_back(u(rng));
    const Vec3 t = c.positions.back().normalized();
    c.topo.row(static_cast<Eigen::Index>(i)) << t.x(), t.y(), t.z(), u(rng);
  }
  return c;
}

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.n_points = 24;
  cfg.k_nn = 4;
  cfg.width = 8;
  cfg.heads = 2;
  cfg.layers = 1;
  cfg.fp_hidden = 4;
  cfg.batch_size = 2;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("knn: tie rule, brute-force oracle, preconditions") {
  Matrix line(3, 3);
  line << 0, 0, 0, 1, 0, 0, 2, 0, 0;
  const auto g1 = knn_graph(line, 1);
  CHECK(g1.neighbors[1] == 0);
  CHECK(g1.neighbors[0] == 1);
  CHECK(g1.neighbors[2] == 1);
  CHECK_THROWS_AS(knn_graph(line, 3), PreconditionError);
  CHECK_THROWS_AS(knn_graph(line, 0), PreconditionError);

  std::mt19937_64 rng(1);
  const Matrix p = random_matrix(50, 3, rng);
  const auto g = knn_graph(p, 5);
  for (Eigen::Index i = 0; i < 50; ++i) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (Eigen::Index j = 0; j < 50; ++j)
      if (j != i) all.emplace_back((p.row(i) - p.row(j)).squaredNorm(), static_cast<std::uint32_t>(j));
    std::sort(all.begin(), all.end());
    for (std::size_t k = 0; k < 5; ++k) CHECK(g.neighbors[static_cast<std::size_t>(i) * 5 + k] == all[k].second);
  }
}

TEST_CASE("edge convolution") {
  std::mt19937_64 rng(2);
  const auto mlp = Linear::init(8, 5, rng);
  const Matrix pos = random_matrix(10, 3, rng);
  const auto graph = knn_graph(pos, 3);

  Matrix same(10, 4);
  for (Eigen::Index i = 0; i < 10; ++i) same.row(i) << 0.3, -1.0, 2.0, 0.5;
  const auto y = edge_conv(constant(same), graph, mlp);
  Matrix input(1, 8);
  input << 0.3, -1.0, 2.0, 0.5, 0, 0, 0, 0;
  const auto expected = leaky_relu(mlp(constant(input))).value();
  for (Eigen::Index i = 0; i < 10; ++i) CHECK(y.value().row(i) == expected);

  // k = 1: the max is the single neighbour's term
  const Matrix x = random_matrix(10, 4, rng);
  const auto g1 = knn_graph(pos, 1);
  const auto y1 = edge_conv(constant(x), g1, mlp);
  for (Eigen::Index i = 0; i < 10; ++i) {
    const auto j = static_cast<Eigen::Index>(g1.neighbors[static_cast<std::size_t>(i)]);
    Matrix edge(1, 8);
    edge << x.row(i), x.row(j) - x.row(i);
    CHECK((y1.value().row(i) - leaky_relu(mlp(constant(edge))).value()).norm() == 0.0);
  }

  // permuting points permutes outputs
  std::vector<std::uint32_t> perm(10);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto base = edge_conv(constant(x), graph, mlp).value();
  const auto moved = edge_conv(constant(permute_rows(x, perm)), knn_graph(permute_rows(pos, perm), 3), mlp).value();
  CHECK((moved - permute_rows(base, perm)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero gates reduce to vanilla attention bitwise") {
  std::mt19937_64 rng(3);
  for (GeoMode mode : {GeoMode::displacement, GeoMode::distance}) {
    const auto in = random_instance(rng, 12, 8);
    auto params = random_params(8, 2, mode, rng);
    params.gate_logits = parameter(Matrix::Constant(2, 3, -1000.0));  // sigmoid underflows to exactly 0
    params.dropout = 0.2;
    for (bool train : {false, true}) {
      const auto a = relational_attention(constant(in.x), in.p, in.q, in.t1, params, train, 77).value();
      const auto b = vanilla_attention(constant(in.x), params, train, 77).value();
      CHECK(a == b);
    }
  }
}

TEST_CASE("attention with one point attends to itself") {
  std::mt19937_64 rng(4);
  const auto in = random_instance(rng, 1, 8);
  const auto params = random_params(8, 2, GeoMode::displacement, rng);
  AttentionTrace trace;
  relational_attention(constant(in.x), in.p, in.q, in.t1, params, false, 0, &trace);
  for (const auto& w : trace.weights) CHECK(w(0, 0) == 1.0);
  // softmax over a single key returns v itself
  const auto a = relational_attention(constant(in.x), in.p, in.q, in.t1, params, false).value();
  const auto b = vanilla_attention(constant(in.x), params, false).value();
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("attention is permutation equivariant and its softmax rows sum to one") {
  std::mt19937_64 rng(5);
  const auto in = random_instance(rng, 4, 8);
  const auto params = random_params(8, 2, GeoMode::displacement, rng);
  std::vector<std::uint32_t> perm{2, 0, 3, 1};
  AttentionTrace trace;
  const auto base = relational_attention(constant(in.x), in.p, in.q, in.t1, params, false, 0, &trace).value();
  const auto moved = relational_attention(constant(permute_rows(in.x, perm)), permute_rows(in.p, perm),
                                          permute_rows(in.q, perm), permute_rows(in.t1, perm), params, false)
                         .value();
  CHECK((moved - permute_rows(base, perm)).cwiseAbs().maxCoeff() < 1e-9);
  for (const auto& w : trace.weights)
    for (Eigen::Index i = 0; i < w.rows(); ++i) CHECK(std::abs(w.row(i).sum() - 1.0) < 1e-6);

  const auto big = random_instance(rng, 40, 16);
  const auto p16 = random_params(16, 4, GeoMode::displacement, rng);
  AttentionTrace t16;
  relational_attention(constant(big.x), big.p, big.q, big.t1, p16, false, 0, &t16);
  REQUIRE(t16.weights.size() == 4);
  for (const auto& w : t16.weights)
    for (Eigen::Index i = 0; i < w.rows(); ++i) CHECK(std::abs(w.row(i).sum() - 1.0) < 1e-6);
}

TEST_CASE("quantum and topological biases are rotation invariant") {
  std::mt19937_64 rng(6);
  const auto in = random_instance(rng, 10, 8);
  const Mat3 r = testutil::random_rotation(rng);
  const Matrix p2 = in.p * r.transpose(), t2 = in.t1 * r.transpose();
  for (GeoMode mode : {GeoMode::displacement, GeoMode::distance}) {
    const auto params = random_params(8, 2, mode, rng);
    AttentionTrace a, b;
    relational_attention(constant(in.x), in.p, in.q, in.t1, params, false, 0, &a);
    relational_attention(constant(in.x), p2, in.q, t2, params, false, 0, &b);
    for (std::size_t h = 0; h < 2; ++h) {
      CHECK((a.quant[h] - b.quant[h]).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((a.topo[h] - b.topo[h]).cwiseAbs().maxCoeff() < 1e-9);
      const double geo_change = (a.geo[h] - b.geo[h]).cwiseAbs().maxCoeff();
      if (mode == GeoMode::distance) CHECK(geo_change < 1e-9);
      else CHECK(geo_change > 1e-6);  // the displacement form is pose dependent
    }
  }
}

TEST_CASE("gradient checks") {
  std::mt19937_64 rng(7);
  const Matrix x = random_matrix(5, 3, rng), w = random_matrix(3, 4, rng), b = random_matrix(1, 4, rng);
  const double linear = grad_check([](const std::vector<Var>& v) { return sum_all(add_row(matmul(v[0], v[1]), v[2])); },
                                   {x, w, b});
  CHECK(linear < 1e-9);

  const double g0 = grad_check([](const std::vector<Var>& v) { return sum_all(gelu(v[0])); }, {Matrix::Zero(1, 1)});
  CHECK(g0 < 1e-9);
  auto z = parameter(Matrix::Zero(1, 1));
  backward(sum_all(gelu(z)));
  CHECK(z.grad()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  for (GeoMode mode : {GeoMode::displacement, GeoMode::distance}) {
    const auto in = random_instance(rng, 5, 4);
    const auto base = random_params(4, 2, mode, rng);
    const Matrix weights = random_matrix(5, 4, rng);
    auto fn = [&](const std::vector<Var>& v) {
      AttentionParams p = base;
      p.wq = v[1];
      p.wk = v[2];
      p.wv = v[3];
      p.wo = v[4];
      p.geo_proj = v[5];
      p.quant_proj = v[6];
      p.topo_proj = v[7];
      p.gate_logits = v[8];
      p.ln1_g = v[9];
      p.ln2_b = v[10];
      p.ffn1.w = v[11];
      p.ffn2.b = v[12];
      p.ln3_g = v[13];
      return sum_all(mul(relational_attention(v[0], in.p, in.q, in.t1, p, false), constant(weights)));
    };
    const double err = grad_check(fn, {in.x, base.wq.value(), base.wk.value(), base.wv.value(), base.wo.value(),
                                       base.geo_proj.value(), base.quant_proj.value(), base.topo_proj.value(),
                                       base.gate_logits.value(), base.ln1_g.value(), base.ln2_b.value(),
                                       base.ffn1.w.value(), base.ffn2.b.value(), base.ln3_g.value()});
    CHECK(err < 1e-4);
  }

  const Matrix pos = random_matrix(6, 3, rng), feat = random_matrix(6, 3, rng);
  const auto graph = knn_graph(pos, 2);
  const auto mlp = Linear::init(6, 4, rng);
  const double ec = grad_check(
      [&](const std::vector<Var>& v) {
        Linear m{v[1], v[2]};
        return sum_all(mean_rows(max_rows(edge_conv(v[0], graph, m))));
      },
      {feat, mlp.w.value(), mlp.b.value()});
  CHECK(ec < 1e-4);
}

TEST_CASE("non-finite values are caught at the op") {
  Matrix big(1, 1);
  big << 1e308;
  CHECK_THROWS_AS(scale(constant(big), 10.0), NumericError);
  try {
    scale(constant(big), 10.0);
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("scale") != std::string::npos);
  }
}

TEST_CASE("dropout is replayable and off outside training") {
  std::mt19937_64 rng(8);
  const Matrix x = random_matrix(20, 10, rng);
  CHECK(dropout(constant(x), 0.5, 3, false).value() == x);
  const auto a = dropout(constant(x), 0.5, 3, true).value(), b = dropout(constant(x), 0.5, 3, true).value();
  CHECK(a == b);
  CHECK(!(a == dropout(constant(x), 0.5, 4, true).value()));
  const auto zeros = (a.array() == 0.0).count();
  CHECK(zeros > 50);
  CHECK(zeros < 150);
}

TEST_CASE("fingerprint blend") {
  const auto a = scalar(2.5), f = scalar(-4.0);
  CHECK(fp_blend(a, f, 0.0).item() == 2.5);
  CHECK(fp_blend(a, f, 1.0).item() == -4.0);
  CHECK(fp_blend(a, f, 0.25).item() == doctest::Approx(0.75 * 2.5 - 0.25 * 4.0));
  CHECK(default_fp_weight(Task::binary) == 0.25);
  CHECK(default_fp_weight(Task::regression) == 0.15);
  ModelConfig cfg;
  CHECK(model_config_from_json({{"task", "binary"}}).fp_weight == 0.25);
  CHECK(model_config_from_json({{"task", "binary"}, {"fp_weight", 0.4}}).fp_weight == 0.4);
  CHECK_THROWS_AS(model_config_from_json({{"fp_weight", 1.5}}), PreconditionError);
}

TEST_CASE("training: memorization, determinism, zero epochs, archive round trip") {
  const auto cloud = toy_cloud(24, 1);
  Fingerprint fp_pow2(512, 2);
  fp_pow2.set(3);
  fp_pow2.set(100);

  ModelConfig cfg = tiny_config();
  cfg.epochs = 200;
  cfg.jitter = false;
  cfg.dropout = 0.0;
  const auto single = train({{&cloud, &fp_pow2, 3.0}}, cfg);
  REQUIRE(single.history.size() == 200);
  CHECK(single.history.back() < 1e-3);

  std::vector<AmptcrCloud> clouds;
  for (std::uint64_t s = 0; s < 6; ++s) clouds.push_back(toy_cloud(24, 10 + s));
  std::vector<Sample> data;
  for (std::size_t i = 0; i < clouds.size(); ++i) data.push_back({&clouds[i], &fp_pow2, static_cast<double>(i)});
  ModelConfig det = tiny_config();
  det.epochs = 3;
  const auto r1 = train(data, det), r2 = train(data, det);
  CHECK(r1.history == r2.history);
  for (std::size_t i = 0; i < clouds.size(); ++i)
    CHECK(r1.model.predict(clouds[i], fp_pow2) == r2.model.predict(clouds[i], fp_pow2));

  ModelConfig none = tiny_config();
  none.epochs = 0;
  const auto r0 = train(data, none);
  CHECK(r0.history.empty());
  const Model fresh(none, 4, 512);
  REQUIRE(fresh.params().size() == r0.model.params().size());
  for (std::size_t i = 0; i < fresh.params().size(); ++i)
    CHECK(fresh.params()[i].second.value() == r0.model.params()[i].second.value());

  const auto dir = testutil::scratch_dir("neuralcore");
  save_model(r1.model, dir / "m.npz");
  const auto loaded = load_model(dir / "m.npz");
  for (std::size_t i = 0; i < clouds.size(); ++i)
    CHECK(loaded.predict(clouds[i], fp_pow2) == r1.model.predict(clouds[i], fp_pow2));
  CHECK(history_csv({0.5, 0.25}) == "epoch,train_loss\n1,0.5\n2,0.25\n");

  ModelConfig bin = tiny_config();
  bin.task = Task::binary;
  bin.epochs = 1;
  CHECK_THROWS_AS(train({{&cloud, &fp_pow2, 0.5}}, bin), PreconditionError);
  CHECK_THROWS_AS(train({}, det), PreconditionError);
}
