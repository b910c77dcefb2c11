#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "postergen/corpus.hpp"

namespace postergen {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// ROUGE-N with multiset-clipped n-gram counts over the shared tokenizer
/// (lowercase, split on non-alphanumeric runs; no stemming or stopwords).
/// Empty candidate or reference n-gram sets score zero. Throws
/// std::invalid_argument for n < 1.
RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n);
RougeScore rouge_n_tokens(const std::vector<std::string>& candidate,
                          const std::vector<std::string>& reference, int n);

/// ROUGE-L: longest common subsequence of tokens.
/// P = LCS/|candidate|, R = LCS/|reference|.
RougeScore rouge_l(std::string_view candidate, std::string_view reference);
RougeScore rouge_l_tokens(const std::vector<std::string>& candidate,
                          const std::vector<std::string>& reference);

struct GreedyStep {
  int sentence_index; // picked at this step
  double f1;          // ROUGE-2 F1 of the selection after the pick
};

struct GreedySelection {
  std::vector<int> selected;      // document order
  std::vector<GreedyStep> trace;  // pick order; f1 strictly increasing
};

/// Greedy panel-oracle selection: repeatedly adds the sentence that most
/// increases ROUGE-2 F1 of the document-order concatenation against
/// `panel_text`, stopping when no candidate strictly improves. Ties break to
/// the lowest index. With word_budget >= 0, candidates whose tokens would
/// push the selection past the budget are skipped.
GreedySelection greedy_select(const std::vector<std::string>& sentences,
                              const std::string& panel_text, int word_budget = -1);

/// Binary labels from greedy_select with no budget.
std::vector<int> greedy_label_sentences(const std::vector<std::string>& sentences,
                                        const std::string& panel_text);
std::vector<int> greedy_label_sentences(const Section& section,
                                        const std::string& panel_text);

/// Extractive upper-bound baseline: greedy ROUGE-2 optimization under a word
/// budget. Returns selected indices in document order; may be empty when the
/// budget excludes every sentence.
std::vector<int> oracle_extract(const std::vector<std::string>& sentences,
                                const std::string& panel_text, int word_budget);
std::vector<int> oracle_extract(const Section& section, const std::string& panel_text,
                                int word_budget);

} // namespace postergen
