#include "postergen/baselines.hpp"

#include "postergen/errors.hpp"
#include "postergen/util.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace postergen {

void TextRankConfig::validate() const {
  if (damping <= 0.0 || damping >= 1.0)
    throw ValidationError("textrank: damping must lie in (0, 1)");
  if (convergence_eps <= 0.0) throw ValidationError("textrank: convergence_eps must be positive");
  if (max_iters < 1) throw ValidationError("textrank: max_iters must be >= 1");
  if (length_limit < 1) throw ValidationError("textrank: length_limit must be >= 1");
}

std::vector<int> lead3(const Section& section) {
  if (section.sentences.empty())
    throw ValidationError("lead3: section " + section.id + " has no sentences");
  std::vector<int> out;
  for (int i = 0; i < 3 && i < static_cast<int>(section.sentences.size()); ++i)
    out.push_back(i);
  return out;
}

std::vector<double> textrank_scores(const Section& section, const TextRankConfig& config) {
  config.validate();
  const int n = static_cast<int>(section.sentences.size());
  if (n == 0) throw ValidationError("textrank: section " + section.id + " has no sentences");
  if (n == 1) return {1.0};

  std::vector<std::vector<std::string>> tokens(static_cast<std::size_t>(n));
  std::vector<std::set<std::string>> types(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    tokens[static_cast<std::size_t>(i)] = tokenize(section.sentences[static_cast<std::size_t>(i)].text);
    types[static_cast<std::size_t>(i)].insert(tokens[static_cast<std::size_t>(i)].begin(),
                                              tokens[static_cast<std::size_t>(i)].end());
  }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      int shared = 0;
      for (const std::string& t : types[static_cast<std::size_t>(i)])
        if (types[static_cast<std::size_t>(j)].count(t)) ++shared;
      if (shared == 0) continue;
      const double denom = std::log(static_cast<double>(tokens[static_cast<std::size_t>(i)].size())) +
                           std::log(static_cast<double>(tokens[static_cast<std::size_t>(j)].size()));
      if (denom <= 0.0) continue; // a pair of one-word sentences has no usable weight
      w(i, j) = w(j, i) = static_cast<double>(shared) / denom;
    }
  }

  Eigen::VectorXd degree = w.rowwise().sum();
  std::vector<double> rank(static_cast<std::size_t>(n), 1.0 / n);
  std::vector<double> next(static_cast<std::size_t>(n), 0.0);
  const double d = config.damping;
  for (int iter = 0; iter < config.max_iters; ++iter) {
    double dangling = 0.0;
    for (int j = 0; j < n; ++j)
      if (degree(j) == 0.0) dangling += rank[static_cast<std::size_t>(j)];
    for (int i = 0; i < n; ++i) {
      double in_mass = 0.0;
      for (int j = 0; j < n; ++j)
        if (degree(j) > 0.0 && w(j, i) > 0.0)
          in_mass += w(j, i) / degree(j) * rank[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(i)] = (1.0 - d) / n + d * (in_mass + dangling / n);
    }
    double residual = 0.0;
    for (int i = 0; i < n; ++i)
      residual += std::abs(next[static_cast<std::size_t>(i)] - rank[static_cast<std::size_t>(i)]);
    rank.swap(next);
    if (residual < config.convergence_eps) break;
  }
  return rank;
}

std::vector<int> textrank_extract(const Section& section, const TextRankConfig& config) {
  const std::vector<double> rank = textrank_scores(section, config);
  const int n = static_cast<int>(rank.size());
  std::vector<int> by_rank(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) by_rank[static_cast<std::size_t>(i)] = i;
  std::stable_sort(by_rank.begin(), by_rank.end(), [&](int a, int b) {
    return rank[static_cast<std::size_t>(a)] > rank[static_cast<std::size_t>(b)];
  });

  std::vector<int> selected;
  int used = 0;
  for (int idx : by_rank) {
    const int len = count_words(section.sentences[static_cast<std::size_t>(idx)].text);
    if (used + len > config.length_limit) continue;
    selected.push_back(idx);
    used += len;
  }
  if (selected.empty() && n > 0) selected.push_back(by_rank.front());
  std::sort(selected.begin(), selected.end());
  return selected;
}

namespace {

std::map<std::string, int> token_counts(std::string_view text) {
  std::map<std::string, int> counts;
  for (const std::string& t : tokenize(text)) ++counts[t];
  return counts;
}

double cosine(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, c] : a) {
    na += static_cast<double>(c) * c;
    auto it = b.find(t);
    if (it != b.end()) dot += static_cast<double>(c) * it->second;
  }
  for (const auto& [t, c] : b) nb += static_cast<double>(c) * c;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace

std::vector<double> similarity_graph_scores(const Section& section) {
  std::vector<std::map<std::string, int>> sentence_vectors;
  sentence_vectors.reserve(section.sentences.size());
  for (const Sentence& s : section.sentences) sentence_vectors.push_back(token_counts(s.text));

  std::vector<double> scores;
  scores.reserve(section.graphs.size());
  for (const GraphElement& g : section.graphs) {
    const std::map<std::string, int> cap = token_counts(g.caption);
    double best = 0.0;
    for (const auto& sv : sentence_vectors) best = std::max(best, cosine(cap, sv));
    scores.push_back(best);
  }
  return scores;
}

std::vector<std::string> similarity_graph_select(const Section& section, double threshold) {
  const std::vector<double> scores = similarity_graph_scores(section);
  std::vector<std::string> out;
  for (std::size_t j = 0; j < scores.size(); ++j)
    if (scores[j] >= threshold) out.push_back(section.graphs[j].id);
  return out;
}

double fit_similarity_threshold(const std::vector<AlignedSample>& samples) {
  // Scores and labels over every graph of every sample; the grid sweep then
  // just counts decisions.
  std::vector<std::pair<double, int>> scored;
  for (const AlignedSample& sample : samples) {
    if (sample.section.graphs.empty()) continue;
    const std::vector<double> scores = similarity_graph_scores(sample.section);
    const std::vector<int> labels = sample.graph_labels();
    for (std::size_t j = 0; j < scores.size(); ++j)
      scored.emplace_back(scores[j], labels[j]);
  }
  if (scored.empty()) return 0.5;

  double best_threshold = 0.0;
  long long best_correct = -1;
  for (int step = 0; step <= 100; ++step) {
    const double threshold = step * 0.01;
    long long correct = 0;
    for (const auto& [score, label] : scored) {
      const int pred = score >= threshold ? 1 : 0;
      if (pred == label) ++correct;
    }
    if (correct > best_correct) {
      best_correct = correct;
      best_threshold = threshold;
    }
  }
  return best_threshold;
}

} // namespace postergen
