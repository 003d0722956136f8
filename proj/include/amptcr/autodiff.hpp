#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "amptcr/cloud.hpp"

// Reverse-mode differentiation over dense row-major float64 matrices. Every
// tensor is two-dimensional; per-point data is laid out point-major (N x F).
namespace amptcr::nn {

using Matrix = RowMatrix;

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows back
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
  bool requires_grad = false;
  const char* op = "leaf";

  void accumulate(Matrix g);
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double item() const;  // value of a 1 x 1 tensor
  bool requires_grad() const { return node_->requires_grad; }
  const std::shared_ptr<Node>& node() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<Node> node_;
};

Var constant(Matrix value);
Var parameter(Matrix value);
Var scalar(double v);

// Seeds d(loss)/d(loss) = 1 and propagates to every reachable tensor that
// requires a gradient. `loss` must be 1 x 1.
void backward(const Var& loss);
void zero_grad(std::span<Var> params);

// Elementwise and linear algebra. Every op checks its output for non-finite
// values and throws NumericError naming the op.
Var matmul(const Var& a, const Var& b);     // a b
Var matmul_nt(const Var& a, const Var& b);  // a b^T
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);           // Hadamard
Var scale(const Var& a, double c);
Var scale_by(const Var& a, const Var& s);      // s is 1 x 1
Var add_row(const Var& a, const Var& row);     // broadcast 1 x F over rows
Var sigmoid(const Var& a);
Var gelu(const Var& a);                        // exact, erf based
Var leaky_relu(const Var& a, double slope = 0.2);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);  // per row
Var softmax_rows(const Var& a);
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var pick(const Var& a, Eigen::Index r, Eigen::Index c);  // 1 x 1
Var gather_rows(const Var& a, std::vector<std::uint32_t> index);
Var segment_max(const Var& a, Eigen::Index group);  // max over consecutive row groups
Var mean_rows(const Var& a);                          // 1 x F
Var max_rows(const Var& a);                           // 1 x F
Var sum_all(const Var& a);                            // 1 x 1
// out_ij = u_i - u_j for a column vector u.
Var outer_diff(const Var& u);
// Inverted dropout. The mask is a pure function of (key, element index), so
// a replay with the same key drops the same elements.
Var dropout(const Var& a, double rate, std::uint64_t key, bool train);
Var mse_loss(const Var& pred, double target);
Var bce_with_logits(const Var& logit, double target);

enum class GeoMode { displacement, distance };

// Per-sample constants for relational attention.
struct RelationalContext {
  Matrix positions;  // N x 3
  Matrix scalars;    // N x 1
  Matrix t1;         // N x 3
  Matrix tdot;       // N x N, <t1_i, t1_j>
  Matrix distance;   // N x N, filled only for GeoMode::distance
  GeoMode mode = GeoMode::displacement;
};

std::shared_ptr<const RelationalContext> make_relational_context(const Matrix& positions, const Matrix& scalars,
                                                                 const Matrix& t1, GeoMode mode);

// Row softmax of one head's gated logits
//   z_ij = c * s_ij + ((g0 * G_ij + g1 * E_ij) + g2 * T_ij)
// with G_ij = geo_proj[:, h] . (P_i - P_j) (or geo_proj[0, h] * |P_i - P_j|),
// E_ij = quant_proj[0, h] * (q_i - q_j), T_ij = topo_proj[0, h] * <t1_i, t1_j>
// and (g0, g1, g2) = gates row h. Throws NumericError on non-finite logits.
Var relational_softmax(const Var& scores, double c, std::shared_ptr<const RelationalContext> ctx, const Var& geo_proj,
                       const Var& quant_proj, const Var& topo_proj, const Var& gates, Eigen::Index head);

// Shared kernel: numerically stable softmax of each row, in place.
void softmax_rows_inplace(Matrix& m);

// Central finite differences against reverse-mode gradients for every entry
// of every input. Returns the max of |a - n| / max(|a|, |n|, 1e-8).
double grad_check(const std::function<Var(const std::vector<Var>&)>& fn, const std::vector<Matrix>& inputs,
                  double eps = 1e-5);

}  // namespace amptcr::nn
