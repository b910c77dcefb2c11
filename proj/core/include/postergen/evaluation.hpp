#pragma once

// Cross-validated experiment harness: paper-disjoint folds, rotation
// train/validate/test, ROUGE mean +- std for text and accuracy for graphs.

#include "postergen/corpus.hpp"
#include "postergen/extraction.hpp"
#include "postergen/rouge.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace postergen {

struct RougeTriple {
  RougeScore rouge1;
  RougeScore rouge2;
  RougeScore rougeL;
};

/// Mean per-sample ROUGE of predictions against references (index-aligned).
RougeTriple evaluate_text(const std::vector<std::string>& predictions,
                          const std::vector<std::string>& references);

/// Binary accuracy over every graph of samples that have at least one graph;
/// nullopt when the sample set contains no graphs at all.
std::optional<double> evaluate_graphs(const std::vector<AlignedSample>& samples,
                                      const std::vector<std::set<std::string>>& predicted_ids);

struct FoldResult {
  int fold = 0;
  bool failed = false;
  std::string error; // diagnostic when failed
  int train_papers = 0;
  int val_papers = 0;
  int test_papers = 0;
  int test_samples = 0;
  double rouge1 = 0.0; // F1 means over test samples
  double rouge2 = 0.0;
  double rougeL = 0.0;
  std::optional<double> graph_accuracy;
};

struct MetricAggregate {
  double mean = 0.0;
  double stddev = 0.0; // population std over folds
  int count = 0;       // folds contributing
};

struct ExperimentReport {
  int k = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<FoldResult> folds;
  MetricAggregate rouge1;
  MetricAggregate rouge2;
  MetricAggregate rougeL;
  MetricAggregate graph_accuracy;
};

MetricAggregate aggregate_metric(const std::vector<double>& values);

/// Fold rotation f: test = fold f, validation = fold (f+1) mod k, train =
/// the remaining k-2 folds. A fold whose training diverges is marked failed
/// and skipped in the aggregates. Fully deterministic for a fixed seed.
ExperimentReport run_experiment(const Corpus& corpus, int k, const ModelConfig& config,
                                std::uint64_t seed);

std::string report_to_json(const ExperimentReport& report);
void save_report(const ExperimentReport& report, const std::filesystem::path& path);

} // namespace postergen
