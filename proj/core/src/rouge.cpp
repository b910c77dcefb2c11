#include "postergen/rouge.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "postergen/util.hpp"

namespace postergen {

namespace {

RougeScore from_counts(double overlap, double n_candidate, double n_reference) {
  RougeScore s;
  if (n_candidate <= 0 || n_reference <= 0) return s;
  s.precision = overlap / n_candidate;
  s.recall = overlap / n_reference;
  if (s.precision + s.recall > 0)
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

using NgramCounts = std::map<std::vector<std::string_view>, int>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> gram;
    gram.reserve(n);
    for (int j = 0; j < n; ++j) gram.emplace_back(tokens[i + j]);
    counts[std::move(gram)] += 1;
  }
  return counts;
}

} // namespace

RougeScore rouge_n_tokens(const std::vector<std::string>& candidate,
                          const std::vector<std::string>& reference, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  const auto cand = count_ngrams(candidate, n);
  const auto ref = count_ngrams(reference, n);
  if (cand.empty() || ref.empty()) return {};
  long long overlap = 0, total_cand = 0;
  for (const auto& [gram, count] : cand) {
    total_cand += count;
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  long long total_ref = 0;
  for (const auto& [gram, count] : ref) total_ref += count;
  return from_counts(static_cast<double>(overlap), static_cast<double>(total_cand),
                     static_cast<double>(total_ref));
}

RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n) {
  return rouge_n_tokens(tokenize(candidate), tokenize(reference), n);
}

RougeScore rouge_l_tokens(const std::vector<std::string>& candidate,
                          const std::vector<std::string>& reference) {
  const std::size_t nc = candidate.size(), nr = reference.size();
  if (nc == 0 || nr == 0) return {};
  // Two-row LCS table.
  std::vector<int> prev(nr + 1, 0), cur(nr + 1, 0);
  for (std::size_t i = 1; i <= nc; ++i) {
    for (std::size_t j = 1; j <= nr; ++j) {
      cur[j] = candidate[i - 1] == reference[j - 1] ? prev[j - 1] + 1
                                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return from_counts(prev[nr], static_cast<double>(nc), static_cast<double>(nr));
}

RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
  return rouge_l_tokens(tokenize(candidate), tokenize(reference));
}

// ---------------------------------------------------------------------------
// Greedy oracle selection
// ---------------------------------------------------------------------------

GreedySelection greedy_select(const std::vector<std::string>& sentences,
                              const std::string& panel_text, int word_budget) {
  GreedySelection result;
  const int n = static_cast<int>(sentences.size());
  if (n == 0 || panel_text.empty()) return result;

  std::vector<std::vector<std::string>> sentence_tokens(n);
  std::vector<int> lengths(n);
  for (int i = 0; i < n; ++i) {
    sentence_tokens[i] = tokenize(sentences[i]);
    lengths[i] = static_cast<int>(sentence_tokens[i].size());
  }
  const auto panel_tokens = tokenize(panel_text);

  std::vector<bool> selected(n, false);
  int selected_words = 0;
  double current_f1 = 0.0;

  // Concatenation in document order; candidate scoring rebuilds the token
  // stream so boundary bigrams are counted exactly as at labeling time.
  auto score_with = [&](int candidate) {
    std::vector<std::string> tokens;
    tokens.reserve(selected_words + lengths[candidate]);
    for (int i = 0; i < n; ++i) {
      if (selected[i] || i == candidate)
        tokens.insert(tokens.end(), sentence_tokens[i].begin(), sentence_tokens[i].end());
    }
    return rouge_n_tokens(tokens, panel_tokens, 2).f1;
  };

  while (true) {
    int best = -1;
    double best_f1 = current_f1;
    for (int i = 0; i < n; ++i) {
      if (selected[i]) continue;
      if (word_budget >= 0 && selected_words + lengths[i] > word_budget) continue;
      const double f1 = score_with(i);
      if (f1 > best_f1) {
        best_f1 = f1;
        best = i;
      }
    }
    if (best < 0) break;
    selected[best] = true;
    selected_words += lengths[best];
    current_f1 = best_f1;
    result.trace.push_back({best, best_f1});
  }

  for (int i = 0; i < n; ++i)
    if (selected[i]) result.selected.push_back(i);
  return result;
}

namespace {

std::vector<std::string> sentence_texts(const Section& section) {
  std::vector<std::string> texts;
  texts.reserve(section.sentences.size());
  for (const auto& s : section.sentences) texts.push_back(s.text);
  return texts;
}

} // namespace

std::vector<int> greedy_label_sentences(const std::vector<std::string>& sentences,
                                        const std::string& panel_text) {
  const auto sel = greedy_select(sentences, panel_text, -1);
  std::vector<int> labels(sentences.size(), 0);
  for (int i : sel.selected) labels[i] = 1;
  return labels;
}

std::vector<int> greedy_label_sentences(const Section& section, const std::string& panel_text) {
  return greedy_label_sentences(sentence_texts(section), panel_text);
}

std::vector<int> oracle_extract(const std::vector<std::string>& sentences,
                                const std::string& panel_text, int word_budget) {
  if (word_budget < 1) throw std::invalid_argument("oracle_extract: word_budget must be >= 1");
  return greedy_select(sentences, panel_text, word_budget).selected;
}

std::vector<int> oracle_extract(const Section& section, const std::string& panel_text,
                                int word_budget) {
  return oracle_extract(sentence_texts(section), panel_text, word_budget);
}

} // namespace postergen
