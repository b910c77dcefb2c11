#include "postergen/autodiff.hpp"

#include "postergen/attention.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace postergen::ad {

namespace {
constexpr double kBceClamp = 1e-7;
constexpr double kInvSqrt2 = 0.7071067811865475244;   // 1/sqrt(2)
constexpr double kInvSqrt2Pi = 0.3989422804014326779; // 1/sqrt(2*pi)
}  // namespace

Var Tape::push(Matrix value, std::function<void(Tape&)> backfn) {
  Node node;
  node.value = std::move(value);
  node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  node.backfn = std::move(backfn);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::check(Var v, const char* where) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument(std::string(where) + ": var not on this tape");
}

Var Tape::input(Matrix value) { return push(std::move(value)); }

const Matrix& Tape::value(Var v) const {
  check(v, "value");
  return nodes_[v.id].value;
}

const Matrix& Tape::grad(Var v) const {
  check(v, "grad");
  return nodes_[v.id].grad;
}

Var Tape::matmul(Var a, Var b) {
  check(a, "matmul");
  check(b, "matmul");
  const Matrix& A = nodes_[a.id].value;
  const Matrix& B = nodes_[b.id].value;
  if (A.cols() != B.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  Var out = push(A * B);
  nodes_[out.id].backfn = [a, b, out](Tape& t) {
    const Matrix& g = t.nodes_[out.id].grad;
    t.grad_ref(a) += g * t.nodes_[b.id].value.transpose();
    t.grad_ref(b) += t.nodes_[a.id].value.transpose() * g;
  };
  return out;
}

Var Tape::matmul_nt(Var a, Var b) {
  check(a, "matmul_nt");
  check(b, "matmul_nt");
  const Matrix& A = nodes_[a.id].value;
  const Matrix& B = nodes_[b.id].value;
  if (A.cols() != B.cols()) throw std::invalid_argument("matmul_nt: column dimension mismatch");
  Var out = push(A * B.transpose());
  nodes_[out.id].backfn = [a, b, out](Tape& t) {
    const Matrix& g = t.nodes_[out.id].grad;
    t.grad_ref(a) += g * t.nodes_[b.id].value;
    t.grad_ref(b) += g.transpose() * t.nodes_[a.id].value;
  };
  return out;
}

Var Tape::add(Var a, Var b) {
  check(a, "add");
  check(b, "add");
  const Matrix& A = nodes_[a.id].value;
  const Matrix& B = nodes_[b.id].value;
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("add: shape mismatch");
  Var out = push(A + B);
  nodes_[out.id].backfn = [a, b, out](Tape& t) {
    const Matrix& g = t.nodes_[out.id].grad;
    t.grad_ref(a) += g;
    t.grad_ref(b) += g;
  };
  return out;
}

Var Tape::add_rowvec(Var a, Var v) {
  check(a, "add_rowvec");
  check(v, "add_rowvec");
  const Matrix& A = nodes_[a.id].value;
  const Matrix& V = nodes_[v.id].value;
  if (V.rows() != 1 || V.cols() != A.cols())
    throw std::invalid_argument("add_rowvec: expected 1 x cols(a) vector");
  Matrix out_val = A;
  out_val.rowwise() += V.row(0);
  Var out = push(std::move(out_val));
  nodes_[out.id].backfn = [a, v, out](Tape& t) {
    const Matrix& g = t.nodes_[out.id].grad;
    t.grad_ref(a) += g;
    t.grad_ref(v) += g.colwise().sum();
  };
  return out;
}

Var Tape::add_const(Var a, const Matrix& c) {
  check(a, "add_const");
  const Matrix& A = nodes_[a.id].value;
  if (A.rows() != c.rows() || A.cols() != c.cols())
    throw std::invalid_argument("add_const: shape mismatch");
  Var out = push(A + c);
  nodes_[out.id].backfn = [a, out](Tape& t) { t.grad_ref(a) += t.nodes_[out.id].grad; };
  return out;
}

Var Tape::scale(Var a, double s) {
  check(a, "scale");
  Var out = push(nodes_[a.id].value * s);
  nodes_[out.id].backfn = [a, s, out](Tape& t) { t.grad_ref(a) += s * t.nodes_[out.id].grad; };
  return out;
}

Var Tape::softmax_rows(Var a) {
  check(a, "softmax_rows");
  if (nodes_[a.id].value.cols() == 0) throw std::invalid_argument("softmax_rows: empty rows");
  Matrix y = nodes_[a.id].value;
  softmax_rows_inplace(y);
  Var out = push(std::move(y));
  nodes_[out.id].backfn = [a, out](Tape& t) {
    const Matrix& y = t.nodes_[out.id].value;
    const Matrix& g = t.nodes_[out.id].grad;
    Matrix& ga = t.grad_ref(a);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double dot = g.row(r).cwiseProduct(y.row(r)).sum();
      ga.row(r) += (g.row(r).array() - dot).matrix().cwiseProduct(y.row(r));
    }
  };
  return out;
}

Var Tape::layer_norm_rows(Var a, Var gain, Var bias, double eps) {
  check(a, "layer_norm_rows");
  check(gain, "layer_norm_rows");
  check(bias, "layer_norm_rows");
  const Matrix& X = nodes_[a.id].value;
  const Matrix& G = nodes_[gain.id].value;
  const Matrix& B = nodes_[bias.id].value;
  if (G.rows() != 1 || B.rows() != 1 || G.cols() != X.cols() || B.cols() != X.cols())
    throw std::invalid_argument("layer_norm_rows: gain/bias must be 1 x cols(a)");
  const Eigen::Index n = X.rows(), d = X.cols();
  // Stash normalized rows and per-row inverse std for the backward pass.
  auto xhat = std::make_shared<Matrix>(n, d);
  auto inv_std = std::make_shared<Eigen::VectorXd>(n);
  Matrix y(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mu = X.row(r).mean();
    const double var = (X.row(r).array() - mu).square().mean();
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)(r) = is;
    xhat->row(r) = (X.row(r).array() - mu) * is;
    y.row(r) = xhat->row(r).cwiseProduct(G.row(0)) + B.row(0);
  }
  Var out = push(std::move(y));
  nodes_[out.id].backfn = [a, gain, bias, out, xhat, inv_std](Tape& t) {
    const Matrix& g = t.nodes_[out.id].grad;
    const Matrix& G = t.nodes_[gain.id].value;
    Matrix& ga = t.grad_ref(a);
    Matrix& gg = t.grad_ref(gain);
    Matrix& gb = t.grad_ref(bias);
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      gg.row(0) += g.row(r).cwiseProduct(xhat->row(r));
      gb.row(0) += g.row(r);
      const Eigen::RowVectorXd dxhat = g.row(r).cwiseProduct(G.row(0));
      const double m1 = dxhat.mean();
      const double m2 = dxhat.cwiseProduct(xhat->row(r)).mean();
      ga.row(r) += (*inv_std)(r) *
                   (dxhat.array() - m1 - xhat->row(r).array() * m2).matrix();
    }
  };
  return out;
}

Var Tape::gelu(Var a) {
  check(a, "gelu");
  const Matrix& X = nodes_[a.id].value;
  Matrix y(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    const double x = X(i);
    y(i) = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  }
  Var out = push(std::move(y));
  nodes_[out.id].backfn = [a, out](Tape& t) {
    const Matrix& X = t.nodes_[a.id].value;
    const Matrix& g = t.nodes_[out.id].grad;
    Matrix& ga = t.grad_ref(a);
    for (Eigen::Index i = 0; i < X.size(); ++i) {
      const double x = X(i);
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      ga(i) += g(i) * (cdf + x * pdf);
    }
  };
  return out;
}

Var Tape::sigmoid(Var a) {
  check(a, "sigmoid");
  const Matrix& X = nodes_[a.id].value;
  Matrix y(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    const double x = X(i);
    y(i) = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
  }
  Var out = push(std::move(y));
  nodes_[out.id].backfn = [a, out](Tape& t) {
    const Matrix& y = t.nodes_[out.id].value;
    const Matrix& g = t.nodes_[out.id].grad;
    t.grad_ref(a).array() += g.array() * y.array() * (1.0 - y.array());
  };
  return out;
}

Var Tape::rows(Var a, int start, int count) {
  check(a, "rows");
  const Matrix& A = nodes_[a.id].value;
  if (start < 0 || count < 0 || start + count > A.rows())
    throw std::invalid_argument("rows: slice out of range");
  Var out = push(A.middleRows(start, count));
  nodes_[out.id].backfn = [a, start, count, out](Tape& t) {
    t.grad_ref(a).middleRows(start, count) += t.nodes_[out.id].grad;
  };
  return out;
}

Var Tape::cols(Var a, int start, int count) {
  check(a, "cols");
  const Matrix& A = nodes_[a.id].value;
  if (start < 0 || count < 0 || start + count > A.cols())
    throw std::invalid_argument("cols: slice out of range");
  Var out = push(A.middleCols(start, count));
  nodes_[out.id].backfn = [a, start, count, out](Tape& t) {
    t.grad_ref(a).middleCols(start, count) += t.nodes_[out.id].grad;
  };
  return out;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
  Eigen::Index total = 0;
  const Eigen::Index cols = nodes_[parts[0].id].value.cols();
  for (Var p : parts) {
    check(p, "concat_rows");
    if (nodes_[p.id].value.cols() != cols)
      throw std::invalid_argument("concat_rows: column mismatch");
    total += nodes_[p.id].value.rows();
  }
  Matrix out_val(total, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& P = nodes_[p.id].value;
    out_val.middleRows(at, P.rows()) = P;
    at += P.rows();
  }
  Var out = push(std::move(out_val));
  nodes_[out.id].backfn = [parts, out](Tape& t) {
    const Matrix& g = t.nodes_[out.id].grad;
    Eigen::Index at = 0;
    for (Var p : parts) {
      const Eigen::Index r = t.nodes_[p.id].value.rows();
      t.grad_ref(p) += g.middleRows(at, r);
      at += r;
    }
  };
  return out;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
  Eigen::Index total = 0;
  const Eigen::Index rows = nodes_[parts[0].id].value.rows();
  for (Var p : parts) {
    check(p, "concat_cols");
    if (nodes_[p.id].value.rows() != rows)
      throw std::invalid_argument("concat_cols: row mismatch");
    total += nodes_[p.id].value.cols();
  }
  Matrix out_val(rows, total);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& P = nodes_[p.id].value;
    out_val.middleCols(at, P.cols()) = P;
    at += P.cols();
  }
  Var out = push(std::move(out_val));
  nodes_[out.id].backfn = [parts, out](Tape& t) {
    const Matrix& g = t.nodes_[out.id].grad;
    Eigen::Index at = 0;
    for (Var p : parts) {
      const Eigen::Index c = t.nodes_[p.id].value.cols();
      t.grad_ref(p) += g.middleCols(at, c);
      at += c;
    }
  };
  return out;
}

Var Tape::gather_rows(Var a, std::vector<int> indices) {
  check(a, "gather_rows");
  const Matrix& A = nodes_[a.id].value;
  for (int i : indices)
    if (i < 0 || i >= A.rows()) throw std::invalid_argument("gather_rows: index out of range");
  Matrix out_val(static_cast<Eigen::Index>(indices.size()), A.cols());
  for (size_t r = 0; r < indices.size(); ++r) out_val.row(static_cast<Eigen::Index>(r)) = A.row(indices[r]);
  Var out = push(std::move(out_val));
  nodes_[out.id].backfn = [a, indices = std::move(indices), out](Tape& t) {
    const Matrix& g = t.nodes_[out.id].grad;
    Matrix& ga = t.grad_ref(a);
    for (size_t r = 0; r < indices.size(); ++r)
      ga.row(indices[r]) += g.row(static_cast<Eigen::Index>(r));
  };
  return out;
}

Var Tape::mean_all(Var a) {
  check(a, "mean_all");
  const Matrix& A = nodes_[a.id].value;
  if (A.size() == 0) throw std::invalid_argument("mean_all: empty matrix");
  Matrix out_val(1, 1);
  out_val(0, 0) = A.mean();
  Var out = push(std::move(out_val));
  nodes_[out.id].backfn = [a, out](Tape& t) {
    const Matrix& A = t.nodes_[a.id].value;
    t.grad_ref(a).array() += t.nodes_[out.id].grad(0, 0) / static_cast<double>(A.size());
  };
  return out;
}

Var Tape::weighted_bce(Var p, const Matrix& y, const Matrix& w) {
  check(p, "weighted_bce");
  const Matrix& P = nodes_[p.id].value;
  if (P.rows() != y.rows() || P.cols() != y.cols() || P.rows() != w.rows() || P.cols() != w.cols())
    throw std::invalid_argument("weighted_bce: shape mismatch");
  double loss = 0.0;
  for (Eigen::Index i = 0; i < P.size(); ++i) {
    const double pc = std::min(std::max(P(i), kBceClamp), 1.0 - kBceClamp);
    loss += w(i) * (y(i) > 0.5 ? -std::log(pc) : -std::log(1.0 - pc));
  }
  Matrix out_val(1, 1);
  out_val(0, 0) = loss;
  Var out = push(std::move(out_val));
  nodes_[out.id].backfn = [p, y, w, out](Tape& t) {
    const double g = t.nodes_[out.id].grad(0, 0);
    const Matrix& P = t.nodes_[p.id].value;
    Matrix& gp = t.grad_ref(p);
    for (Eigen::Index i = 0; i < P.size(); ++i) {
      // Zero gradient where the clamp binds (subgradient convention).
      if (P(i) < kBceClamp || P(i) > 1.0 - kBceClamp) continue;
      gp(i) += g * w(i) * (y(i) > 0.5 ? -1.0 / P(i) : 1.0 / (1.0 - P(i)));
    }
  };
  return out;
}

void Tape::backward(Var loss) {
  check(loss, "backward");
  const Matrix& L = nodes_[loss.id].value;
  if (L.rows() != 1 || L.cols() != 1)
    throw std::invalid_argument("backward: loss must be 1x1");
  for (Node& n : nodes_) n.grad.setZero();
  nodes_[loss.id].grad(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i)
    if (nodes_[i].backfn) nodes_[i].backfn(*this);
}

}  // namespace postergen::ad
