#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "amptcr/autodiff.hpp"

namespace amptcr::nn {

// Named parameter list in registration order; the order fixes the optimizer
// state layout and the archive member order.
using ParamList = std::vector<std::pair<std::string, Var>>;

// He-style normal initialisation, deterministic in the engine state.
Matrix init_weight(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

struct Linear {
  Var w;  // in x out
  Var b;  // 1 x out

  static Linear init(std::size_t in, std::size_t out, std::mt19937_64& rng);
  Var operator()(const Var& x) const { return add_row(matmul(x, w), b); }
  void collect(const std::string& prefix, ParamList& out) const;
};

struct KnnGraph {
  std::size_t k = 0;
  std::vector<std::uint32_t> neighbors;  // N x k, row-major, nearest first
  std::size_t size() const noexcept { return k ? neighbors.size() / k : 0; }
};

// Brute-force k nearest neighbours, self excluded, ties to the smaller index.
KnnGraph knn_graph(const Matrix& positions, std::size_t k);

// y_i = max_j leaky_relu(mlp([x_i ; x_j - x_i])) over the k neighbours j of i.
Var edge_conv(const Var& x, const KnnGraph& graph, const Linear& mlp, double slope = 0.2);

struct AttentionParams {
  std::size_t width = 0, heads = 0;
  double dropout = 0.0;
  GeoMode geo_mode = GeoMode::displacement;
  Var wq, wk, wv, wo;   // F x F, applied as x W
  Var geo_proj;         // 3 x H (displacement) or 1 x H (distance)
  Var quant_proj;       // 1 x H
  Var topo_proj;        // 1 x H
  Var gate_logits;      // H x 3
  Var ln1_g, ln1_b;     // before Q/K/V
  Var ln2_g, ln2_b;     // before the feed-forward block
  Var ln3_g, ln3_b;     // after the feed-forward block
  Linear ffn1, ffn2;    // F -> 4F -> F

  static AttentionParams init(std::size_t width, std::size_t heads, double dropout, GeoMode mode,
                              std::mt19937_64& rng);
  std::size_t head_dim() const { return width / heads; }
  void collect(const std::string& prefix, ParamList& out) const;
};

// Per-head bias terms before gating, kept for inspection.
struct AttentionTrace {
  std::vector<Matrix> geo, quant, topo;  // G, E, T per head
  std::vector<Matrix> weights;           // softmax rows per head
};

// x: N x F point features; positions N x 3; scalars N x 1; t1 N x 3.
//   a   = x + dropout(concat_h(softmax(QK^T/sqrt(d) + bias_h) V_h) Wo)
//   out = a + ln3(ffn(ln2(a)))
// with Q, K, V taken from ln1(x). `dropout_key` seeds every dropout site.
Var relational_attention(const Var& x, const Matrix& positions, const Matrix& scalars, const Matrix& t1,
                         const AttentionParams& params, bool train, std::uint64_t dropout_key = 0,
                         AttentionTrace* trace = nullptr);

// The same block without relational biases: plain multi-head self-attention.
Var vanilla_attention(const Var& x, const AttentionParams& params, bool train, std::uint64_t dropout_key = 0);

// (1 - w) * amptcr_out + w * fp_scalar.
Var fp_blend(const Var& amptcr_out, const Var& fp_scalar, double w);

}  // namespace amptcr::nn
