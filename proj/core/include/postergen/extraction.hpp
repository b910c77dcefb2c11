#pragma once

// Pipeline step two: jointly score the sentences and graph captions of one
// section with a transformer encoder whose attention logits carry the
// additive reference bias, trained with balanced cross entropy
// (loss = loss_sentence + gamma * loss_graph).

#include "postergen/attention.hpp"
#include "postergen/corpus.hpp"
#include "postergen/nn.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace postergen {

struct ModelConfig {
  // joint encoder over units
  int encoder_layers = 3;
  int d_k = 768;
  int d_ff = 1536;
  int heads = 8;

  // reference bias magnitudes
  double h1 = 1e-2;
  double h2 = 1e-3;

  // balanced cross entropy weights
  double alpha_s = 1.0;
  double beta_s = 0.5;
  double alpha_g = 1.0;
  double beta_g = 1.0;
  double gamma = 3.0;

  // optimizer
  double lr = 8e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;

  // ablation switches: "w/o weight", "w/o caption", "w/o section"
  bool use_bias_weight = true;
  bool use_captions = true;
  bool use_sentences = true;

  // per-unit text encoder
  int unit_encoder_layers = 2;
  int vocab_size = 4096;
  int max_unit_tokens = 64;

  // training schedule
  int max_epochs = 30;
  int patience = 5;

  // inference policy
  int word_budget = 45;
  double graph_threshold = 0.5;

  void validate() const; // throws ValidationError
};

struct EncodedUnits {
  Eigen::MatrixXd sentence_matrix; // n x d_k
  Eigen::MatrixXd caption_matrix;  // m x d_k
  Eigen::MatrixXd combined;        // [sentences; captions], (n+m) x d_k
  int n = 0;
  int m = 0;
};

struct ExtractionScores {
  std::vector<double> sentence_scores;
  std::vector<double> graph_scores;
};

struct PanelDraft {
  std::vector<int> sentence_indices;      // document order
  std::vector<std::string> graph_ids;     // section graph order
};

std::string draft_text(const Section& section, const PanelDraft& draft);

/// Sentence->graph edges of a section, as (sentence index, graph index).
ReferenceEdges build_reference_edges(const Section& section);

/// Per-unit balanced cross entropy of the paper's loss equation, with the
/// probability clamped to [1e-7, 1-1e-7] before the log.
double balanced_ce(double p, int y, double alpha, double beta);

/// Mean balanced CE over sentences plus gamma times mean balanced CE over
/// graphs; empty unit sets contribute zero.
double combined_loss(const std::vector<double>& sentence_probs,
                     const std::vector<int>& sentence_labels,
                     const std::vector<double>& graph_probs,
                     const std::vector<int>& graph_labels, const ModelConfig& config);

/// Canonical serialized form of a config, used for checkpoints and for the
/// experiment report's config hash. The parse accepts a partial object and
/// fills missing fields with defaults.
std::string model_config_signature(const ModelConfig& config);
ModelConfig model_config_from_signature(const std::string& json_text);

struct ExtractStepRecord {
  int epoch = 0;
  int step = 0;
  double loss = 0.0;
  double loss_sentence = 0.0;
  double loss_graph = 0.0;
};

struct ExtractEpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double val_rouge2 = 0.0; // NaN when no validation set
};

struct ExtractTrainStats {
  std::vector<ExtractStepRecord> steps;
  std::vector<ExtractEpochRecord> epochs;
  int best_epoch = -1;
  double best_val_rouge2 = 0.0;
  int epochs_run = 0;
};

class ExtractionModel {
 public:
  explicit ExtractionModel(ModelConfig config);

  void init_params(std::uint64_t seed);

  /// Independently encodes each unit and stacks the pooled vectors. Ablation
  /// switches force the corresponding list empty. Throws when no units remain.
  EncodedUnits encode_units(const std::vector<std::string>& sentences,
                            const std::vector<std::string>& captions) const;

  /// Full forward pass over one section.
  ExtractionScores forward(const Section& section) const;

  /// Loss and gradients for one labeled sample; `sample.derived_sentence_labels`
  /// must be filled (run the oracle labeler first).
  struct SampleEval {
    double loss = 0.0;
    double loss_sentence = 0.0;
    double loss_graph = 0.0;
    ExtractionScores scores;
    std::map<std::string, Eigen::MatrixXd> grads; // empty unless requested
  };
  SampleEval evaluate_sample(const AlignedSample& sample, bool with_grads) const;

  ExtractTrainStats train(const std::vector<AlignedSample>& train_samples,
                          const std::vector<AlignedSample>& val_samples,
                          std::uint64_t seed);

  void save(const std::filesystem::path& path) const;
  static ExtractionModel load(const std::filesystem::path& path);

  const ModelConfig& config() const { return config_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

 private:
  struct UnitInputs {
    std::vector<std::vector<std::string>> unit_tokens; // n sentences then m captions
    ReferenceEdges refs;
    int n = 0;
    int m = 0;
  };
  UnitInputs unit_inputs(const Section& section) const;
  ad::Var forward_tape(ad::Tape& tape, nn::ParamBinding& pb, const UnitInputs& units) const;

  ModelConfig config_;
  nn::ParamStore params_;
  bool initialized_ = false;
};

/// Sentences in descending score order, skipping any that would push the
/// running word count past the budget, reported in document order; if nothing
/// fits, the single best-scoring sentence. Graphs pass by threshold.
PanelDraft select_panel_content(const ExtractionScores& scores, const Section& section,
                                int word_budget, double graph_threshold);

} // namespace postergen
