#include "postergen/attention.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace postergen {

Eigen::MatrixXd build_attention_bias(int n, int m, const ReferenceEdges& refs,
                                     double h1, double h2) {
  if (n < 0 || m < 0) throw std::invalid_argument("build_attention_bias: negative size");
  Eigen::MatrixXd bias = Eigen::MatrixXd::Zero(n + m, n + m);

  // Referring sentence sets, deduplicated per graph.
  std::vector<std::set<int>> referrers(m);
  for (const auto& [sentence, graph] : refs) {
    if (sentence < 0 || sentence >= n || graph < 0 || graph >= m)
      throw std::invalid_argument("build_attention_bias: reference index out of range");
    referrers[graph].insert(sentence);
  }

  for (int g = 0; g < m; ++g) {
    const auto& J = referrers[g];
    const int t = static_cast<int>(J.size());
    if (t == 0) continue;
    const int caption_row = n + g;
    for (int j : J) {
      bias(caption_row, j) += h1 / t;
      bias(j, caption_row) += h1 / t;
    }
    for (int j : J)
      for (int k : J)
        if (j != k) bias(j, k) += h2 / t;
  }
  return bias;
}

void softmax_rows_inplace(Eigen::MatrixXd& scores) {
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    double max_val = scores(r, 0);
    for (Eigen::Index c = 1; c < scores.cols(); ++c)
      if (scores(r, c) > max_val) max_val = scores(r, c);
    double sum = 0.0;
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
      const double e = std::exp(scores(r, c) - max_val);
      scores(r, c) = e;
      sum += e;
    }
    for (Eigen::Index c = 0; c < scores.cols(); ++c) scores(r, c) /= sum;
  }
}

Eigen::MatrixXd biased_attention(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& K,
                                 const Eigen::MatrixXd& A, int d_k) {
  if (Q.cols() != K.cols())
    throw std::invalid_argument("biased_attention: Q and K column counts differ");
  if (Q.rows() != A.rows() || K.rows() != A.cols())
    throw std::invalid_argument("biased_attention: bias matrix shape mismatch");
  if (d_k < 1) throw std::invalid_argument("biased_attention: d_k must be >= 1");

  Eigen::MatrixXd scores = (Q * K.transpose()) / std::sqrt(static_cast<double>(d_k));
  scores += A;
  softmax_rows_inplace(scores);
  return scores;
}

} // namespace postergen
