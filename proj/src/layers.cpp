#include "amptcr/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amptcr/error.hpp"
#include "amptcr/hash.hpp"

namespace amptcr::nn {

Matrix init_weight(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  Matrix w(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
  return w;
}

Linear Linear::init(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  return {parameter(init_weight(in, out, rng)), parameter(Matrix::Zero(1, static_cast<Eigen::Index>(out)))};
}

void Linear::collect(const std::string& prefix, ParamList& out) const {
  out.emplace_back(prefix + ".w", w);
  out.emplace_back(prefix + ".b", b);
}

KnnGraph knn_graph(const Matrix& positions, std::size_t k) {
  const auto n = static_cast<std::size_t>(positions.rows());
  if (positions.cols() != 3) throw PreconditionError("knn_graph: positions must be N x 3");
  if (k < 1 || k >= n) throw PreconditionError("knn_graph: need 1 <= k < N (k=" + std::to_string(k) +
                                               ", N=" + std::to_string(n) + ")");
  KnnGraph g;
  g.k = k;
  g.neighbors.resize(n * k);
  std::vector<std::pair<double, std::uint32_t>> cand(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i)
        cand[c++] = {(positions.row(static_cast<Eigen::Index>(i)) - positions.row(static_cast<Eigen::Index>(j))).squaredNorm(),
                     static_cast<std::uint32_t>(j)};
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t m = 0; m < k; ++m) g.neighbors[i * k + m] = cand[m].second;
  }
  return g;
}

Var edge_conv(const Var& x, const KnnGraph& graph, const Linear& mlp, double slope) {
  if (graph.size() != static_cast<std::size_t>(x.rows())) throw PreconditionError("edge_conv: graph size differs from N");
  std::vector<std::uint32_t> self(graph.neighbors.size());
  for (std::size_t e = 0; e < self.size(); ++e) self[e] = static_cast<std::uint32_t>(e / graph.k);
  const Var xi = gather_rows(x, std::move(self));
  const Var xj = gather_rows(x, graph.neighbors);
  const Var h = leaky_relu(mlp(concat_cols({xi, sub(xj, xi)})), slope);
  return segment_max(h, static_cast<Eigen::Index>(graph.k));
}

AttentionParams AttentionParams::init(std::size_t width, std::size_t heads, double dropout, GeoMode mode,
                                      std::mt19937_64& rng) {
  if (heads == 0 || width % heads != 0) throw PreconditionError("attention width must be divisible by heads");
  AttentionParams p;
  p.width = width;
  p.heads = heads;
  p.dropout = dropout;
  p.geo_mode = mode;
  const auto f = static_cast<Eigen::Index>(width), h = static_cast<Eigen::Index>(heads);
  p.wq = parameter(init_weight(width, width, rng) * std::sqrt(0.5));
  p.wk = parameter(init_weight(width, width, rng) * std::sqrt(0.5));
  p.wv = parameter(init_weight(width, width, rng) * std::sqrt(0.5));
  p.wo = parameter(init_weight(width, width, rng) * std::sqrt(0.5));
  p.geo_proj = parameter(init_weight(mode == GeoMode::displacement ? 3 : 1, heads, rng));
  p.quant_proj = parameter(init_weight(1, heads, rng));
  p.topo_proj = parameter(init_weight(1, heads, rng));
  p.gate_logits = parameter(Matrix::Zero(h, 3));
  for (Var* g : {&p.ln1_g, &p.ln2_g, &p.ln3_g}) *g = parameter(Matrix::Ones(1, f));
  for (Var* b : {&p.ln1_b, &p.ln2_b, &p.ln3_b}) *b = parameter(Matrix::Zero(1, f));
  p.ffn1 = Linear::init(width, 4 * width, rng);
  p.ffn2 = Linear::init(4 * width, width, rng);
  return p;
}

void AttentionParams::collect(const std::string& prefix, ParamList& out) const {
  out.emplace_back(prefix + ".wq", wq);
  out.emplace_back(prefix + ".wk", wk);
  out.emplace_back(prefix + ".wv", wv);
  out.emplace_back(prefix + ".wo", wo);
  out.emplace_back(prefix + ".geo_proj", geo_proj);
  out.emplace_back(prefix + ".quant_proj", quant_proj);
  out.emplace_back(prefix + ".topo_proj", topo_proj);
  out.emplace_back(prefix + ".gate_logits", gate_logits);
  out.emplace_back(prefix + ".ln1.g", ln1_g);
  out.emplace_back(prefix + ".ln1.b", ln1_b);
  out.emplace_back(prefix + ".ln2.g", ln2_g);
  out.emplace_back(prefix + ".ln2.b", ln2_b);
  out.emplace_back(prefix + ".ln3.g", ln3_g);
  out.emplace_back(prefix + ".ln3.b", ln3_b);
  ffn1.collect(prefix + ".ffn1", out);
  ffn2.collect(prefix + ".ffn2", out);
}

namespace {

enum Site : std::uint64_t { kAttnOut = 1, kFfnHidden = 2 };

Var attention_block(const Var& x, const AttentionParams& p, std::shared_ptr<const RelationalContext> bias, bool train,
                    std::uint64_t key, AttentionTrace* trace) {
  if (static_cast<std::size_t>(x.cols()) != p.width) throw PreconditionError("attention: feature width mismatch");
  const auto d = static_cast<Eigen::Index>(p.head_dim());
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  const Var h = layer_norm(x, p.ln1_g, p.ln1_b);
  const Var q = matmul(h, p.wq), k = matmul(h, p.wk), v = matmul(h, p.wv);
  const Var gates = bias ? sigmoid(p.gate_logits) : Var{};

  std::vector<Var> heads;
  for (std::size_t hd = 0; hd < p.heads; ++hd) {
    const auto off = static_cast<Eigen::Index>(hd) * d;
    const Var scores = matmul_nt(slice_cols(q, off, d), slice_cols(k, off, d));
    const Var a = bias ? relational_softmax(scores, inv_sqrt_d, bias, p.geo_proj, p.quant_proj, p.topo_proj, gates,
                                            static_cast<Eigen::Index>(hd))
                       : softmax_rows(scale(scores, inv_sqrt_d));
    if (trace && bias) {
      const auto he = static_cast<Eigen::Index>(hd);
      const auto n = x.rows();
      Matrix geo(n, n), quant(n, n);
      Eigen::VectorXd u;
      if (p.geo_mode == GeoMode::displacement) u = bias->positions * p.geo_proj.value().col(he);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          geo(i, j) = p.geo_mode == GeoMode::displacement ? u[i] - u[j] : p.geo_proj.value()(0, he) * bias->distance(i, j);
          quant(i, j) = p.quant_proj.value()(0, he) * (bias->scalars(i, 0) - bias->scalars(j, 0));
        }
      trace->geo.push_back(std::move(geo));
      trace->quant.push_back(std::move(quant));
      trace->topo.push_back(p.topo_proj.value()(0, he) * bias->tdot);
    }
    if (trace) trace->weights.push_back(a.value());
    heads.push_back(matmul(a, slice_cols(v, off, d)));
  }
  const Var attended = dropout(matmul(concat_cols(heads), p.wo), p.dropout, combine_keys(key, kAttnOut), train);
  const Var a = add(x, attended);
  const Var hidden = dropout(gelu(p.ffn1(layer_norm(a, p.ln2_g, p.ln2_b))), p.dropout, combine_keys(key, kFfnHidden), train);
  return add(a, layer_norm(p.ffn2(hidden), p.ln3_g, p.ln3_b));
}

}  // namespace

Var relational_attention(const Var& x, const Matrix& positions, const Matrix& scalars, const Matrix& t1,
                         const AttentionParams& params, bool train, std::uint64_t dropout_key, AttentionTrace* trace) {
  const auto n = x.rows();
  if (positions.rows() != n || positions.cols() != 3 || scalars.rows() != n || scalars.cols() != 1 || t1.rows() != n ||
      t1.cols() != 3)
    throw PreconditionError("relational_attention: P, q, t1 must be N x 3, N x 1, N x 3");
  return attention_block(x, params, make_relational_context(positions, scalars, t1, params.geo_mode), train,
                         dropout_key, trace);
}

Var vanilla_attention(const Var& x, const AttentionParams& params, bool train, std::uint64_t dropout_key) {
  return attention_block(x, params, nullptr, train, dropout_key, nullptr);
}

Var fp_blend(const Var& amptcr_out, const Var& fp_scalar, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw PreconditionError("fp blend weight must lie in [0, 1]");
  return add(scale(amptcr_out, 1.0 - w), scale(fp_scalar, w));
}

}  // namespace amptcr::nn
