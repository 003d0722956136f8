#include "amptcr/autodiff.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_set>

#include "amptcr/error.hpp"
#include "amptcr/hash.hpp"

namespace amptcr::nn {

void Node::accumulate(Matrix g) {
  if (grad.size() == 0) grad = std::move(g);
  else grad += g;
}

double Var::item() const {
  if (rows() != 1 || cols() != 1) throw PreconditionError("item() needs a 1 x 1 tensor");
  return value()(0, 0);
}

namespace {

Var make(Matrix value, const char* op, std::vector<Var> inputs, std::function<void(Node&)> bw) {
  if (!value.allFinite()) throw NumericError(std::string("non-finite values after ") + op);
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = op;
  for (const auto& v : inputs) n->requires_grad = n->requires_grad || v.requires_grad();
  if (n->requires_grad) {
    for (const auto& v : inputs) n->parents.push_back(v.node());
    n->backward = std::move(bw);
  }
  return Var(std::move(n));
}

// Parent i of `self`, or nullptr when it needs no gradient.
Node* wants(Node& self, std::size_t i) {
  Node* p = self.parents[i].get();
  return p->requires_grad ? p : nullptr;
}

void same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw PreconditionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
}

void is_scalar(const Var& s, const char* op) {
  if (s.rows() != 1 || s.cols() != 1) throw PreconditionError(std::string(op) + ": expected a 1 x 1 tensor");
}

double uniform_from_key(std::uint64_t key, std::uint64_t i) {
  return static_cast<double>(mix64(combine_keys(key, i)) >> 11) * 0x1.0p-53;
}

}  // namespace

Var constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

Var parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

Var scalar(double v) { return constant(Matrix::Constant(1, 1, v)); }

void backward(const Var& loss) {
  is_scalar(loss, "backward");
  if (!loss.requires_grad()) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss.node()->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && n->grad.size() != 0) n->backward(*n);
  }
}

void zero_grad(std::span<Var> params) {
  for (auto& p : params) p.node()->grad.resize(0, 0);
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw PreconditionError("matmul: inner dimensions differ");
  return make(a.value() * b.value(), "matmul", {a, b}, [](Node& s) {
    const auto& A = s.parents[0]->value;
    const auto& B = s.parents[1]->value;
    if (auto* p = wants(s, 0)) p->accumulate(s.grad * B.transpose());
    if (auto* p = wants(s, 1)) p->accumulate(A.transpose() * s.grad);
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  if (a.cols() != b.cols()) throw PreconditionError("matmul_nt: inner dimensions differ");
  return make(a.value() * b.value().transpose(), "matmul_nt", {a, b}, [](Node& s) {
    const auto& A = s.parents[0]->value;
    const auto& B = s.parents[1]->value;
    if (auto* p = wants(s, 0)) p->accumulate(s.grad * B);
    if (auto* p = wants(s, 1)) p->accumulate(s.grad.transpose() * A);
  });
}

Var add(const Var& a, const Var& b) {
  same_shape(a, b, "add");
  return make(a.value() + b.value(), "add", {a, b}, [](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(s.grad);
    if (auto* p = wants(s, 1)) p->accumulate(s.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  same_shape(a, b, "sub");
  return make(a.value() - b.value(), "sub", {a, b}, [](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(s.grad);
    if (auto* p = wants(s, 1)) p->accumulate(-s.grad);
  });
}

Var mul(const Var& a, const Var& b) {
  same_shape(a, b, "mul");
  return make(a.value().cwiseProduct(b.value()), "mul", {a, b}, [](Node& s) {
    const auto& A = s.parents[0]->value;
    const auto& B = s.parents[1]->value;
    if (auto* p = wants(s, 0)) p->accumulate(s.grad.cwiseProduct(B));
    if (auto* p = wants(s, 1)) p->accumulate(s.grad.cwiseProduct(A));
  });
}

Var scale(const Var& a, double c) {
  return make(a.value() * c, "scale", {a}, [c](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(s.grad * c);
  });
}

Var scale_by(const Var& a, const Var& k) {
  is_scalar(k, "scale_by");
  return make(a.value() * k.item(), "scale_by", {a, k}, [](Node& s) {
    const double kv = s.parents[1]->value(0, 0);
    if (auto* p = wants(s, 0)) p->accumulate(s.grad * kv);
    if (auto* p = wants(s, 1)) p->accumulate(Matrix::Constant(1, 1, s.grad.cwiseProduct(s.parents[0]->value).sum()));
  });
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw PreconditionError("add_row: row shape mismatch");
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return make(std::move(out), "add_row", {a, row}, [](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(s.grad);
    if (auto* p = wants(s, 1)) p->accumulate(s.grad.colwise().sum());
  });
}

Var sigmoid(const Var& a) {
  Matrix y = a.value().unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  return make(y, "sigmoid", {a}, [y](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(s.grad.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var gelu(const Var& a) {
  const Matrix x = a.value();
  Matrix y = x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0)); });
  return make(std::move(y), "gelu", {a}, [x](Node& s) {
    if (auto* p = wants(s, 0)) {
      const Matrix d = x.unaryExpr([](double v) {
        const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
        const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
        return cdf + v * pdf;
      });
      p->accumulate(s.grad.cwiseProduct(d));
    }
  });
}

Var leaky_relu(const Var& a, double slope) {
  const Matrix x = a.value();
  Matrix y = x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
  return make(std::move(y), "leaky_relu", {a}, [x, slope](Node& s) {
    if (auto* p = wants(s, 0))
      p->accumulate(s.grad.cwiseProduct(x.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; })));
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const auto f = x.cols();
  if (gamma.rows() != 1 || gamma.cols() != f || beta.rows() != 1 || beta.cols() != f)
    throw PreconditionError("layer_norm: parameter shape mismatch");
  const Matrix& X = x.value();
  Matrix xhat(X.rows(), f);
  Eigen::VectorXd inv_std(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const double mu = X.row(r).mean();
    const double var = (X.row(r).array() - mu).square().mean();
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (X.row(r).array() - mu) * inv_std[r];
  }
  Matrix y = xhat;
  y.array().rowwise() *= gamma.value().row(0).array();
  y.rowwise() += beta.value().row(0);
  return make(std::move(y), "layer_norm", {x, gamma, beta}, [xhat, inv_std](Node& s) {
    const auto& g = s.parents[1]->value;
    if (auto* p = wants(s, 0)) {
      Matrix gx = s.grad;
      gx.array().rowwise() *= g.row(0).array();
      Matrix dx(gx.rows(), gx.cols());
      for (Eigen::Index r = 0; r < gx.rows(); ++r) {
        const double m1 = gx.row(r).mean();
        const double m2 = gx.row(r).cwiseProduct(xhat.row(r)).mean();
        dx.row(r) = inv_std[r] * (gx.row(r).array() - m1 - xhat.row(r).array() * m2);
      }
      p->accumulate(dx);
    }
    if (auto* p = wants(s, 1)) p->accumulate(s.grad.cwiseProduct(xhat).colwise().sum());
    if (auto* p = wants(s, 2)) p->accumulate(s.grad.colwise().sum());
  });
}

void softmax_rows_inplace(Matrix& y) {
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double m = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
}

namespace {

// d(loss)/d(logits) for a row softmax with output y and upstream gradient g.
Matrix softmax_backward(const Matrix& y, const Matrix& g) {
  Matrix dx = g.cwiseProduct(y);
  const Eigen::VectorXd rs = dx.rowwise().sum();
  for (Eigen::Index r = 0; r < y.rows(); ++r) dx.row(r) -= y.row(r) * rs[r];
  return dx;
}

}  // namespace

Var softmax_rows(const Var& a) {
  Matrix y = a.value();
  softmax_rows_inplace(y);
  return make(y, "softmax_rows", {a}, [y](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(softmax_backward(y, s.grad));
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw PreconditionError("concat_cols: nothing to concatenate");
  const auto rows = parts.front().rows();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw PreconditionError("concat_cols: row counts differ");
    total += p.cols();
  }
  Matrix out(rows, total);
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    offsets.push_back(off);
    off += p.cols();
  }
  return make(std::move(out), "concat_cols", parts, [offsets](Node& s) {
    for (std::size_t i = 0; i < s.parents.size(); ++i)
      if (auto* p = wants(s, i)) p->accumulate(s.grad.middleCols(offsets[i], p->value.cols()));
  });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw PreconditionError("slice_cols: out of range");
  return make(a.value().middleCols(start, count), "slice_cols", {a}, [start, count](Node& s) {
    if (auto* p = wants(s, 0)) {
      Matrix g = Matrix::Zero(p->value.rows(), p->value.cols());
      g.middleCols(start, count) = s.grad;
      p->accumulate(g);
    }
  });
}

Var pick(const Var& a, Eigen::Index r, Eigen::Index c) {
  if (r < 0 || c < 0 || r >= a.rows() || c >= a.cols()) throw PreconditionError("pick: out of range");
  return make(Matrix::Constant(1, 1, a.value()(r, c)), "pick", {a}, [r, c](Node& s) {
    if (auto* p = wants(s, 0)) {
      Matrix g = Matrix::Zero(p->value.rows(), p->value.cols());
      g(r, c) = s.grad(0, 0);
      p->accumulate(g);
    }
  });
}

Var gather_rows(const Var& a, std::vector<std::uint32_t> index) {
  Matrix out(static_cast<Eigen::Index>(index.size()), a.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= a.rows()) throw PreconditionError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(index[i]);
  }
  return make(std::move(out), "gather_rows", {a}, [index = std::move(index)](Node& s) {
    if (auto* p = wants(s, 0)) {
      Matrix g = Matrix::Zero(p->value.rows(), p->value.cols());
      for (std::size_t i = 0; i < index.size(); ++i) g.row(index[i]) += s.grad.row(static_cast<Eigen::Index>(i));
      p->accumulate(g);
    }
  });
}

Var segment_max(const Var& a, Eigen::Index group) {
  if (group < 1 || a.rows() % group != 0) throw PreconditionError("segment_max: rows not divisible by group size");
  const Eigen::Index n = a.rows() / group, f = a.cols();
  Matrix out(n, f);
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(n * f));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < f; ++c) {
      Eigen::Index best = i * group;
      for (Eigen::Index r = i * group + 1; r < (i + 1) * group; ++r)
        if (a.value()(r, c) > a.value()(best, c)) best = r;
      out(i, c) = a.value()(best, c);
      arg[static_cast<std::size_t>(i * f + c)] = best;
    }
  return make(std::move(out), "segment_max", {a}, [arg = std::move(arg), f](Node& s) {
    if (auto* p = wants(s, 0)) {
      Matrix g = Matrix::Zero(p->value.rows(), f);
      for (Eigen::Index i = 0; i < s.grad.rows(); ++i)
        for (Eigen::Index c = 0; c < f; ++c) g(arg[static_cast<std::size_t>(i * f + c)], c) += s.grad(i, c);
      p->accumulate(g);
    }
  });
}

Var mean_rows(const Var& a) {
  const auto n = static_cast<double>(a.rows());
  return make(a.value().colwise().mean(), "mean_rows", {a}, [n](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(s.grad.replicate(p->value.rows(), 1) / n);
  });
}

Var max_rows(const Var& a) {
  if (a.rows() < 1) throw PreconditionError("max_rows: empty input");
  return segment_max(a, a.rows());
}

Var sum_all(const Var& a) {
  return make(Matrix::Constant(1, 1, a.value().sum()), "sum_all", {a}, [](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(Matrix::Constant(p->value.rows(), p->value.cols(), s.grad(0, 0)));
  });
}

Var outer_diff(const Var& u) {
  if (u.cols() != 1) throw PreconditionError("outer_diff: expected a column vector");
  const auto n = u.rows();
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = u.value()(i, 0) - u.value()(j, 0);
  return make(std::move(out), "outer_diff", {u}, [](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(s.grad.rowwise().sum() - s.grad.colwise().sum().transpose());
  });
}

Var dropout(const Var& a, double rate, std::uint64_t key, bool train) {
  if (!(rate >= 0.0 && rate < 1.0)) throw PreconditionError("dropout rate must lie in [0, 1)");
  if (!train || rate == 0.0) return a;
  Matrix mask(a.rows(), a.cols());
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    mask.data()[i] = uniform_from_key(key, static_cast<std::uint64_t>(i)) < rate ? 0.0 : keep;
  return make(a.value().cwiseProduct(mask), "dropout", {a}, [mask](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(s.grad.cwiseProduct(mask));
  });
}

Var mse_loss(const Var& pred, double target) {
  is_scalar(pred, "mse_loss");
  const double d = pred.item() - target;
  return make(Matrix::Constant(1, 1, d * d), "mse_loss", {pred}, [d](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(Matrix::Constant(1, 1, 2.0 * d * s.grad(0, 0)));
  });
}

Var bce_with_logits(const Var& logit, double target) {
  is_scalar(logit, "bce_with_logits");
  const double z = logit.item();
  // max(z, 0) - z t + log(1 + exp(-|z|))
  const double loss = std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::abs(z)));
  const double prob = 1.0 / (1.0 + std::exp(-z));
  return make(Matrix::Constant(1, 1, loss), "bce_with_logits", {logit}, [prob, target](Node& s) {
    if (auto* p = wants(s, 0)) p->accumulate(Matrix::Constant(1, 1, (prob - target) * s.grad(0, 0)));
  });
}

std::shared_ptr<const RelationalContext> make_relational_context(const Matrix& positions, const Matrix& scalars,
                                                                 const Matrix& t1, GeoMode mode) {
  const auto n = positions.rows();
  if (positions.cols() != 3 || scalars.rows() != n || scalars.cols() != 1 || t1.rows() != n || t1.cols() != 3)
    throw PreconditionError("relational context: P, q, t1 must be N x 3, N x 1, N x 3");
  auto ctx = std::make_shared<RelationalContext>();
  ctx->positions = positions;
  ctx->scalars = scalars;
  ctx->t1 = t1;
  ctx->tdot = t1 * t1.transpose();
  ctx->mode = mode;
  if (mode == GeoMode::distance) {
    ctx->distance.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) ctx->distance(i, j) = (positions.row(i) - positions.row(j)).norm();
  }
  return ctx;
}

Var relational_softmax(const Var& scores, double c, std::shared_ptr<const RelationalContext> ctx_ptr,
                       const Var& geo_proj, const Var& quant_proj, const Var& topo_proj, const Var& gates,
                       Eigen::Index head) {
  if (!ctx_ptr) throw PreconditionError("relational_softmax: missing context");
  const RelationalContext& ctx = *ctx_ptr;
  const auto n = scores.rows();
  if (scores.cols() != n) throw PreconditionError("relational_softmax: scores must be square");
  if (ctx.positions.rows() != n || ctx.scalars.rows() != n || ctx.t1.rows() != n)
    throw PreconditionError("relational_softmax: context size differs from N");
  const bool displacement = ctx.mode == GeoMode::displacement;
  if (!displacement && (ctx.distance.rows() != n || ctx.distance.cols() != n))
    throw PreconditionError("relational_softmax: distance matrix missing");
  if (geo_proj.rows() != (displacement ? 3 : 1) || head >= geo_proj.cols() || head >= quant_proj.cols() ||
      head >= topo_proj.cols() || gates.cols() != 3 || head >= gates.rows())
    throw PreconditionError("relational_softmax: parameter shape mismatch");

  const double g0 = gates.value()(head, 0), g1 = gates.value()(head, 1), g2 = gates.value()(head, 2);
  const double we = quant_proj.value()(0, head), wt = topo_proj.value()(0, head);
  // Displacement mode: G_ij = u_i - u_j with u = P w.
  Eigen::VectorXd u;
  double wg = 0.0;
  if (displacement) u = ctx.positions * geo_proj.value().col(head);
  else wg = geo_proj.value()(0, head);
  const Matrix& tdot = ctx.tdot;

  Matrix y(n, n);
  const Matrix& s = scores.value();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double qi = ctx.scalars(i, 0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double geo = displacement ? u[i] - u[j] : wg * ctx.distance(i, j);
      const double bias = (g0 * geo + g1 * (we * (qi - ctx.scalars(j, 0)))) + g2 * (wt * tdot(i, j));
      y(i, j) = s(i, j) * c + bias;
    }
  }
  if (!y.allFinite()) throw NumericError("non-finite attention logits");
  softmax_rows_inplace(y);

  return make(y, "relational_softmax", {scores, geo_proj, quant_proj, topo_proj, gates},
              [y, c, head, ctx_ptr, u, g0, g1, g2, we, wt, wg, displacement](Node& self) {
                const RelationalContext& ctx = *ctx_ptr;
                const Matrix dz = softmax_backward(y, self.grad);
                const Eigen::VectorXd rows = dz.rowwise().sum();
                const Eigen::VectorXd cols = dz.colwise().sum().transpose();
                const Eigen::VectorXd q = ctx.scalars.col(0);
                // sum_ij dz_ij (v_i - v_j) = v . (rows - cols)
                const Eigen::VectorXd net = rows - cols;
                const double sum_e = q.dot(net);
                const double sum_t = (dz * ctx.t1).cwiseProduct(ctx.t1).sum();
                const double sum_g = displacement ? u.dot(net) : wg * dz.cwiseProduct(ctx.distance).sum();
                if (auto* p = wants(self, 0)) p->accumulate(dz * c);
                if (auto* p = wants(self, 1)) {
                  Matrix d = Matrix::Zero(p->value.rows(), p->value.cols());
                  if (displacement) d.col(head) = g0 * (ctx.positions.transpose() * net);
                  else d(0, head) = g0 * dz.cwiseProduct(ctx.distance).sum();
                  p->accumulate(std::move(d));
                }
                if (auto* p = wants(self, 2)) {
                  Matrix d = Matrix::Zero(p->value.rows(), p->value.cols());
                  d(0, head) = g1 * sum_e;
                  p->accumulate(std::move(d));
                }
                if (auto* p = wants(self, 3)) {
                  Matrix d = Matrix::Zero(p->value.rows(), p->value.cols());
                  d(0, head) = g2 * sum_t;
                  p->accumulate(std::move(d));
                }
                if (auto* p = wants(self, 4)) {
                  Matrix d = Matrix::Zero(p->value.rows(), p->value.cols());
                  d(head, 0) = sum_g;
                  d(head, 1) = we * sum_e;
                  d(head, 2) = wt * sum_t;
                  p->accumulate(std::move(d));
                }
              });
}

double grad_check(const std::function<Var(const std::vector<Var>&)>& fn, const std::vector<Matrix>& inputs,
                  double eps) {
  if (!(eps > 0.0)) throw PreconditionError("grad_check: eps must be positive");
  std::vector<Var> vars;
  for (const auto& m : inputs) vars.push_back(parameter(m));
  backward(fn(vars));
  std::vector<Matrix> analytic;
  for (const auto& v : vars) analytic.push_back(v.grad().size() ? v.grad() : Matrix::Zero(v.rows(), v.cols()));

  auto eval = [&](std::size_t which, Eigen::Index idx, double delta) {
    std::vector<Var> probe;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      Matrix m = inputs[i];
      if (i == which) m.data()[idx] += delta;
      probe.push_back(constant(std::move(m)));
    }
    return fn(probe).item();
  };

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (Eigen::Index k = 0; k < inputs[i].size(); ++k) {
      const double numeric = (eval(i, k, eps) - eval(i, k, -eps)) / (2.0 * eps);
      const double a = analytic[i].data()[k];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
  return worst;
}

}  // namespace amptcr::nn
