#pragma once

// Non-neural comparison systems: Lead-3 and TextRank for sentence selection,
// and the caption/sentence cosine-similarity classifier for graphs.

#include "postergen/corpus.hpp"

#include <vector>

namespace postergen {

struct TextRankConfig {
  double damping = 0.85;
  double convergence_eps = 1e-6;
  int max_iters = 100;
  int length_limit = 45; // word budget shared with the extraction model

  void validate() const; // throws ValidationError
};

/// First three sentence indices (fewer when the section is shorter).
/// Throws ValidationError on an empty section.
std::vector<int> lead3(const Section& section);

/// Damped PageRank over the sentence-similarity graph. Edge weight between
/// two sentences is |shared unique tokens| / (log|s_i| + log|s_j|); rank mass
/// of dangling sentences is redistributed uniformly, so the result sums to 1.
std::vector<double> textrank_scores(const Section& section, const TextRankConfig& config);

/// Greedy pick by descending rank under the word budget (same skip rule and
/// single-sentence fallback as the extraction model); document order.
std::vector<int> textrank_extract(const Section& section, const TextRankConfig& config);

/// Per-graph max cosine similarity between the caption and any sentence,
/// over bag-of-token count vectors.
std::vector<double> similarity_graph_scores(const Section& section);

/// Graph ids whose similarity score reaches the threshold.
std::vector<std::string> similarity_graph_select(const Section& section, double threshold);

/// Grid search (step 0.01 over [0, 1]) for the threshold with the best
/// binary accuracy against the gold graph labels; lowest threshold on ties.
double fit_similarity_threshold(const std::vector<AlignedSample>& samples);

} // namespace postergen
