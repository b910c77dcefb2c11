#pragma once

// Tape-based reverse-mode automatic differentiation over Eigen matrices.
// Small closed op set, enough for transformer encoders: every op records a
// backward closure on the tape; backward() replays them in reverse.

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace postergen::ad {

using Matrix = Eigen::MatrixXd;

class Tape;

// Lightweight handle into a Tape. Valid only for the tape that produced it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  // Registers a leaf holding `value`. Gradients accumulate for every node;
  // leaves that represent constants simply never have their grads read.
  Var input(Matrix value);

  const Matrix& value(Var v) const;
  const Matrix& grad(Var v) const;

  // c = a * b
  Var matmul(Var a, Var b);
  // c = a * b^T
  Var matmul_nt(Var a, Var b);
  // elementwise sum, equal shapes
  Var add(Var a, Var b);
  // broadcast a 1 x cols row vector over every row of a
  Var add_rowvec(Var a, Var v);
  // add a constant matrix (no gradient flows into c)
  Var add_const(Var a, const Matrix& c);
  Var scale(Var a, double s);
  Var softmax_rows(Var a);
  // per-row layer normalization with learnable gain/bias (1 x cols each)
  Var layer_norm_rows(Var a, Var gain, Var bias, double eps = 1e-5);
  // exact (erf-based) GELU
  Var gelu(Var a);
  Var sigmoid(Var a);
  Var rows(Var a, int start, int count);
  Var cols(Var a, int start, int count);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  // out.row(i) = a.row(indices[i]); repeated indices accumulate gradient
  Var gather_rows(Var a, std::vector<int> indices);
  // 1x1 mean over all entries
  Var mean_all(Var a);
  // 1x1 weighted binary cross entropy: sum_i w_i * (y_i ? -ln p_i : -ln(1-p_i))
  // with p clamped to [1e-7, 1-1e-7]; y and w are constants shaped like p.
  Var weighted_bce(Var p, const Matrix& y, const Matrix& w);

  // Seeds d(loss) = 1 (loss must be 1x1) and runs the reverse sweep.
  void backward(Var loss);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&)> backfn;  // empty for leaves
  };

  Var push(Matrix value, std::function<void(Tape&)> backfn = nullptr);
  Matrix& grad_ref(Var v) { return nodes_[v.id].grad; }
  void check(Var v, const char* where) const;

  std::vector<Node> nodes_;
};

}  // namespace postergen::ad
