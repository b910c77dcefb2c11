#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace postergen {

/// Sentence -> graph reference edges by index: (sentence i, graph j) with
/// 0 <= i < n and 0 <= j < m. Duplicates are ignored.
using ReferenceEdges = std::vector<std::pair<int, int>>;

/// Builds the additive attention bias matrix A of order n+m (sentences
/// first, captions after). For each graph with referring sentence set J of
/// size t > 0:
///   A[n+g, j] += h1/t and A[j, n+g] += h1/t   for every j in J,
///   A[j, k]   += h2/t                          for every j != k in J.
/// Graphs nobody refers to contribute nothing. The result is symmetric,
/// zero on the diagonal, nonnegative, and nonzero only at linked
/// sentence-caption pairs and co-referring sentence pairs.
Eigen::MatrixXd build_attention_bias(int n, int m, const ReferenceEdges& refs,
                                     double h1, double h2);

/// Row-wise softmax with sequential scalar arithmetic (max-shifted), so that
/// results are reproducible bit-for-bit across runs and identical between
/// the biased and unbiased paths when the bias is zero.
void softmax_rows_inplace(Eigen::MatrixXd& scores);

/// softmax(Q K^T / sqrt(d_k) + A). Every output row sums to 1. With A = 0
/// this is exactly standard scaled dot-product attention. Throws
/// std::invalid_argument on dimension mismatch.
Eigen::MatrixXd biased_attention(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& K,
                                 const Eigen::MatrixXd& A, int d_k);

} // namespace postergen
