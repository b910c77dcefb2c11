#include "postergen/evaluation.hpp"

#include "postergen/errors.hpp"
#include "postergen/util.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace postergen {

RougeTriple evaluate_text(const std::vector<std::string>& predictions,
                          const std::vector<std::string>& references) {
  if (predictions.size() != references.size())
    throw ValidationError("evaluate_text: predictions and references misaligned");
  RougeTriple mean;
  if (predictions.empty()) return mean;
  auto accumulate = [](RougeScore& into, const RougeScore& s) {
    into.precision += s.precision;
    into.recall += s.recall;
    into.f1 += s.f1;
  };
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    accumulate(mean.rouge1, rouge_n(predictions[i], references[i], 1));
    accumulate(mean.rouge2, rouge_n(predictions[i], references[i], 2));
    accumulate(mean.rougeL, rouge_l(predictions[i], references[i]));
  }
  const double inv = 1.0 / static_cast<double>(predictions.size());
  for (RougeScore* s : {&mean.rouge1, &mean.rouge2, &mean.rougeL}) {
    s->precision *= inv;
    s->recall *= inv;
    s->f1 *= inv;
  }
  return mean;
}

std::optional<double> evaluate_graphs(const std::vector<AlignedSample>& samples,
                                      const std::vector<std::set<std::string>>& predicted_ids) {
  if (samples.size() != predicted_ids.size())
    throw ValidationError("evaluate_graphs: samples and predictions misaligned");
  long long correct = 0, total = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Section& sec = samples[i].section;
    if (sec.graphs.empty()) continue;
    const std::vector<int> labels = samples[i].graph_labels();
    for (std::size_t j = 0; j < sec.graphs.size(); ++j) {
      const int pred = predicted_ids[i].count(sec.graphs[j].id) ? 1 : 0;
      if (pred == labels[j]) ++correct;
      ++total;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

MetricAggregate aggregate_metric(const std::vector<double>& values) {
  MetricAggregate agg;
  agg.count = static_cast<int>(values.size());
  if (values.empty()) return agg;
  double sum = 0.0;
  for (double v : values) sum += v;
  agg.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - agg.mean) * (v - agg.mean);
  agg.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return agg;
}

ExperimentReport run_experiment(const Corpus& corpus, int k, const ModelConfig& config,
                                std::uint64_t seed) {
  config.validate();
  std::vector<std::string> paper_ids;
  paper_ids.reserve(corpus.size());
  for (const auto& [paper, annotations] : corpus) paper_ids.push_back(paper.id);
  const FoldAssignment folds = split_kfold(paper_ids, k, seed);

  // Samples per paper, with missing sentence labels derived by the greedy
  // ROUGE-2 oracle.
  std::vector<std::vector<AlignedSample>> samples_by_paper(corpus.size());
  for (std::size_t pi = 0; pi < corpus.size(); ++pi) {
    samples_by_paper[pi] = make_samples(corpus[pi].first, corpus[pi].second);
    for (AlignedSample& s : samples_by_paper[pi])
      if (s.derived_sentence_labels.empty())
        s.derived_sentence_labels = greedy_label_sentences(s.section, s.panel_text);
  }

  ExperimentReport report;
  report.k = k;
  report.seed = seed;
  report.config_hash = to_hex(fnv1a64(model_config_signature(config)));

  std::vector<double> r1, r2, rl, ga;
  for (int f = 0; f < k; ++f) {
    FoldResult fr;
    fr.fold = f;
    const int val_fold = (f + 1) % k;
    std::vector<AlignedSample> train_samples, val_samples, test_samples;
    for (std::size_t pi = 0; pi < corpus.size(); ++pi) {
      const int fold = folds.at(corpus[pi].first.id);
      auto& bucket = fold == f ? test_samples : fold == val_fold ? val_samples : train_samples;
      bucket.insert(bucket.end(), samples_by_paper[pi].begin(), samples_by_paper[pi].end());
      if (fold == f)
        ++fr.test_papers;
      else if (fold == val_fold)
        ++fr.val_papers;
      else
        ++fr.train_papers;
    }
    fr.test_samples = static_cast<int>(test_samples.size());

    try {
      ExtractionModel model(config);
      const std::uint64_t fold_seed =
          seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(f + 1));
      model.init_params(fold_seed);
      model.train(train_samples, val_samples, fold_seed);

      std::vector<std::string> predictions, references;
      std::vector<std::set<std::string>> predicted_graphs;
      for (const AlignedSample& s : test_samples) {
        const ExtractionScores scores = model.forward(s.section);
        const PanelDraft draft = select_panel_content(scores, s.section, config.word_budget,
                                                      config.graph_threshold);
        predictions.push_back(draft_text(s.section, draft));
        references.push_back(s.panel_text);
        predicted_graphs.emplace_back(draft.graph_ids.begin(), draft.graph_ids.end());
      }
      const RougeTriple rouge = evaluate_text(predictions, references);
      fr.rouge1 = rouge.rouge1.f1;
      fr.rouge2 = rouge.rouge2.f1;
      fr.rougeL = rouge.rougeL.f1;
      fr.graph_accuracy = evaluate_graphs(test_samples, predicted_graphs);

      r1.push_back(fr.rouge1);
      r2.push_back(fr.rouge2);
      rl.push_back(fr.rougeL);
      if (fr.graph_accuracy) ga.push_back(*fr.graph_accuracy);
    } catch (const TrainingError& e) {
      fr.failed = true;
      fr.error = e.what();
    }
    report.folds.push_back(std::move(fr));
  }

  report.rouge1 = aggregate_metric(r1);
  report.rouge2 = aggregate_metric(r2);
  report.rougeL = aggregate_metric(rl);
  report.graph_accuracy = aggregate_metric(ga);
  return report;
}

namespace {

nlohmann::json aggregate_to_json(const MetricAggregate& agg) {
  nlohmann::json j;
  j["mean"] = agg.mean;
  j["stddev"] = agg.stddev;
  j["count"] = agg.count;
  return j;
}

} // namespace

std::string report_to_json(const ExperimentReport& report) {
  nlohmann::json root;
  root["format_version"] = 1;
  root["k"] = report.k;
  root["seed"] = report.seed;
  root["config_hash"] = report.config_hash;
  nlohmann::json jfolds = nlohmann::json::array();
  for (const FoldResult& fr : report.folds) {
    nlohmann::json jf;
    jf["fold"] = fr.fold;
    jf["failed"] = fr.failed;
    if (fr.failed) jf["error"] = fr.error;
    jf["train_papers"] = fr.train_papers;
    jf["val_papers"] = fr.val_papers;
    jf["test_papers"] = fr.test_papers;
    jf["test_samples"] = fr.test_samples;
    if (!fr.failed) {
      jf["rouge1"] = fr.rouge1;
      jf["rouge2"] = fr.rouge2;
      jf["rougeL"] = fr.rougeL;
      jf["graph_accuracy"] = fr.graph_accuracy ? nlohmann::json(*fr.graph_accuracy)
                                               : nlohmann::json(nullptr);
    }
    jfolds.push_back(std::move(jf));
  }
  root["folds"] = std::move(jfolds);
  nlohmann::json agg;
  agg["rouge1"] = aggregate_to_json(report.rouge1);
  agg["rouge2"] = aggregate_to_json(report.rouge2);
  agg["rougeL"] = aggregate_to_json(report.rougeL);
  agg["graph_accuracy"] = aggregate_to_json(report.graph_accuracy);
  root["aggregate"] = std::move(agg);
  return root.dump(2) + "\n";
}

void save_report(const ExperimentReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write report: " + path.string());
  out << report_to_json(report);
}

} // namespace postergen
