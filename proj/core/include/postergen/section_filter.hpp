#pragma once

// Pipeline step one: score every section's poster-worthiness in paper
// context and keep the ones above threshold. Two ablation switches mirror
// the reduced configurations (title-only input; no paper-level encoder).

#include "postergen/corpus.hpp"
#include "postergen/nn.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace postergen {

enum class FilterInputMode { title_and_body, title_only };

std::string to_string(FilterInputMode mode);
FilterInputMode filter_input_mode_from_string(std::string_view s);

struct SectionFilterConfig {
  FilterInputMode input_mode = FilterInputMode::title_and_body;
  bool use_paper_context = true;
  int context_layers = 2;
  double threshold = 0.5;
  int max_tokens = 512;

  // encoder shape
  int hidden_dim = 768;
  int ffn_dim = 1536;
  int heads = 8;
  int unit_encoder_layers = 2;
  int vocab_size = 4096;

  // optimizer
  double lr = 8e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  int max_epochs = 20;

  void validate() const; // throws ValidationError
};

struct FilterEpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double val_accuracy = 0.0; // NaN when no validation set
};

struct FilterTrainStats {
  std::vector<FilterEpochRecord> epochs;
  int best_epoch = -1;
  double best_val_accuracy = 0.0;
};

class SectionFilterModel {
 public:
  explicit SectionFilterModel(SectionFilterConfig config);

  void init_params(std::uint64_t seed);

  /// Pooled encoder vector for one section (hidden_dim entries).
  Eigen::VectorXd encode_section(const Section& section) const;

  /// One probability per section, document order.
  std::vector<double> score_sections(const Paper& paper) const;

  /// Sections scoring >= threshold in document order; if none pass, the
  /// single best-scoring section (a poster needs content).
  std::vector<Section> filter_sections(const Paper& paper) const;

  /// Unweighted binary cross entropy, one paper per optimization step.
  /// Restores the epoch snapshot with the best validation accuracy when a
  /// validation set is given. Throws TrainingError on NaN loss.
  FilterTrainStats train(const Corpus& train_set, const Corpus& val_set,
                         std::uint64_t seed);

  /// Fraction of sections whose thresholded score matches the gold flag.
  double accuracy(const Corpus& labeled) const;

  void save(const std::filesystem::path& path) const;
  static SectionFilterModel load(const std::filesystem::path& path);

  const SectionFilterConfig& config() const { return config_; }
  nn::ParamStore& params() { return params_; }

 private:
  ad::Var forward(ad::Tape& tape, nn::ParamBinding& pb, const Paper& paper) const;
  std::vector<std::string> section_tokens(const Section& section) const;

  SectionFilterConfig config_;
  nn::ParamStore params_;
  bool initialized_ = false;
};

} // namespace postergen
