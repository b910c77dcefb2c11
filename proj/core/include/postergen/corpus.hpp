#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "postergen/errors.hpp"

namespace postergen {

enum class GraphKind { figure, table };

std::string to_string(GraphKind kind);
GraphKind graph_kind_from_string(std::string_view s);

/// A figure or table record. The caption must begin with the kind word and
/// the printed number ("Figure 3:" / "Table 1:"); downstream models rely on
/// that prefix to tell captions apart from sentences.
struct GraphElement {
  std::string id;
  GraphKind kind = GraphKind::figure;
  int number = 0;
  std::string caption;
  std::optional<int> gold_label; // 1 = used in the poster
  std::string image_path;        // optional asset for the composer
};

struct Sentence {
  int index = 0;
  std::string text;
  std::optional<int> gold_label;   // 1 = extract into the panel
  std::set<std::string> refs;      // graph ids mentioned by this sentence
};

struct Section {
  std::string id;
  std::string title;
  std::vector<Sentence> sentences;
  std::vector<GraphElement> graphs;
  std::optional<int> gold_important; // 1 = aligned to a poster panel

  const GraphElement* find_graph(std::string_view graph_id) const;
};

struct Paper {
  std::string id;
  std::string title;
  std::vector<Section> sections;
};

/// Gold annotation for one section: alignment flag plus the panel content.
struct PanelAnnotation {
  bool important = false;
  std::string panel_text;
  std::set<std::string> panel_graph_ids;
  std::optional<std::vector<int>> sentence_labels; // derived by the labeler
};

/// section id -> annotation, stored in the sibling annotation file.
using PaperAnnotations = std::map<std::string, PanelAnnotation>;

/// One training unit: a section paired with its gold panel.
struct AlignedSample {
  std::string paper_id;
  Section section;
  std::string panel_text;
  std::set<std::string> panel_graph_ids;
  std::vector<int> derived_sentence_labels; // empty until labeled

  std::vector<int> graph_labels() const; // 0/1 per section graph, from panel_graph_ids
};

using FoldAssignment = std::map<std::string, int>; // paper id -> fold

/// A (kind, number) pair mentioned in running text, e.g. "Figure 9".
struct ReferenceMention {
  GraphKind kind;
  int number;
  bool operator<(const ReferenceMention& o) const {
    return kind != o.kind ? kind < o.kind : number < o.number;
  }
};

/// Finds the graphs a sentence mentions. Recognized patterns: a kind word
/// (figure/fig/figs/table/tab, optional period, optional plural, any case)
/// followed by one or more integers joined by commas/"and"/"&".
/// Mentions with no matching graph are reported through `unresolved` and
/// otherwise ignored. Pure and independent of graph list order.
std::set<std::string> detect_references(std::string_view sentence_text,
                                        const std::vector<GraphElement>& graphs,
                                        std::vector<ReferenceMention>* unresolved = nullptr);

/// Checks every type invariant; throws ValidationError naming the offending
/// field on the first violation.
void validate_paper(const Paper& paper);

/// Fills Sentence::refs for the whole paper via detect_references.
/// Unresolvable mentions become human-readable warnings.
void resolve_references(Paper& paper, std::vector<std::string>* warnings = nullptr);

Paper load_paper(const std::filesystem::path& path,
                 std::vector<std::string>* warnings = nullptr);
void save_paper(const Paper& paper, const std::filesystem::path& path);

PaperAnnotations load_annotations(const std::filesystem::path& path);
void save_annotations(const PaperAnnotations& annotations,
                      const std::filesystem::path& path);

/// Sibling annotation path for a paper file: "<stem>.annotations.json".
std::filesystem::path annotations_path_for(const std::filesystem::path& paper_path);

/// Copies annotation gold fields (importance, sentence labels, graph labels)
/// onto the paper in place.
void apply_annotations(Paper& paper, const PaperAnnotations& annotations);

/// 0/1 importance label per section; sections without an annotation count
/// as not aligned.
std::vector<int> importance_labels(const Paper& paper,
                                   const PaperAnnotations& annotations);

/// Builds the training samples: one per annotated-important section with a
/// panel. Panel graph ids are checked against the section.
std::vector<AlignedSample> make_samples(const Paper& paper,
                                        const PaperAnnotations& annotations);

/// Shuffles papers with the seeded generator and deals them round-robin, so
/// fold sizes differ by at most one and all samples of a paper share a fold.
FoldAssignment split_kfold(const std::vector<std::string>& paper_ids, int k,
                           std::uint64_t seed);
FoldAssignment split_kfold(const std::vector<Paper>& papers, int k,
                           std::uint64_t seed);

FoldAssignment load_folds(const std::filesystem::path& path);
void save_folds(const FoldAssignment& folds, const std::filesystem::path& path);

struct SynthesizedPaper {
  Paper paper;
  PaperAnnotations annotations;
};

/// Knobs for the deterministic synthetic corpus. Defaults give papers whose
/// planted section-importance rule needs both body text and paper context,
/// and whose panel texts are exact concatenations of the planted positive
/// sentences, so gold labels are recoverable by the greedy labeler.
struct SynthesisConfig {
  int min_sections = 6;
  int max_sections = 10;
  int min_sentences = 5;
  int max_sentences = 25;
  int max_graphs = 4;
  int min_sentence_words = 6;
  int max_sentence_words = 12;
  /// Probability that a token is drawn from the shared pool instead of being
  /// unique; raises cross-sentence n-gram collisions.
  double vocab_overlap = 0.15;
  /// Probability that a positive sentence carries the salience marker token.
  double marker_rate = 0.9;
  /// Probability that a negative sentence carries it anyway.
  double marker_noise = 0.05;
};

std::vector<SynthesizedPaper> synthesize_corpus(std::uint64_t seed, int n_papers,
                                                const SynthesisConfig& config = {});

using Corpus = std::vector<std::pair<Paper, PaperAnnotations>>;

/// Directory layout: one "<paper id>.json" per paper plus the sibling
/// annotation file. Papers are returned sorted by id.
Corpus load_corpus(const std::filesystem::path& dir,
                   std::vector<std::string>* warnings = nullptr);
void save_corpus(const std::vector<SynthesizedPaper>& corpus,
                 const std::filesystem::path& dir);

} // namespace postergen
