#include "postergen/section_filter.hpp"

#include "postergen/errors.hpp"
#include "postergen/util.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>

namespace postergen {

namespace {

nn::TextEncoderConfig encoder_config(const SectionFilterConfig& c) {
  nn::TextEncoderConfig ec;
  ec.layers = c.unit_encoder_layers;
  ec.d_model = c.hidden_dim;
  ec.d_ff = c.ffn_dim;
  ec.heads = c.heads;
  ec.vocab_size = c.vocab_size;
  ec.max_tokens = c.max_tokens;
  return ec;
}

} // namespace

std::string to_string(FilterInputMode mode) {
  return mode == FilterInputMode::title_only ? "title_only" : "title_and_body";
}

FilterInputMode filter_input_mode_from_string(std::string_view s) {
  if (s == "title_and_body") return FilterInputMode::title_and_body;
  if (s == "title_only") return FilterInputMode::title_only;
  throw ValidationError("unknown filter input mode: " + std::string(s));
}

void SectionFilterConfig::validate() const {
  if (context_layers < 0) throw ValidationError("section filter: context_layers must be >= 0");
  if (threshold <= 0.0 || threshold >= 1.0)
    throw ValidationError("section filter: threshold must lie in (0, 1)");
  if (max_tokens < 1) throw ValidationError("section filter: max_tokens must be >= 1");
  if (hidden_dim < 2 || hidden_dim % 2 != 0)
    throw ValidationError("section filter: hidden_dim must be even and >= 2");
  if (heads < 1 || hidden_dim % heads != 0)
    throw ValidationError("section filter: hidden_dim must be divisible by heads");
  if (ffn_dim < 1) throw ValidationError("section filter: ffn_dim must be >= 1");
  if (unit_encoder_layers < 1)
    throw ValidationError("section filter: unit_encoder_layers must be >= 1");
  if (vocab_size < 2) throw ValidationError("section filter: vocab_size must be >= 2");
  if (lr <= 0.0) throw ValidationError("section filter: lr must be positive");
  if (max_epochs < 1) throw ValidationError("section filter: max_epochs must be >= 1");
}

SectionFilterModel::SectionFilterModel(SectionFilterConfig config)
    : config_(std::move(config)) {
  config_.validate();
}

void SectionFilterModel::init_params(std::uint64_t seed) {
  params_ = nn::ParamStore();
  std::mt19937_64 rng(seed);
  nn::init_text_encoder(params_, "enc", encoder_config(config_), rng);
  if (config_.use_paper_context) {
    const nn::LayerDims dims{config_.hidden_dim, config_.ffn_dim, config_.heads};
    for (int l = 0; l < config_.context_layers; ++l)
      nn::init_transformer_layer(params_, "ctx.l" + std::to_string(l), dims, rng);
  }
  nn::gaussian_init(params_.create("head.w", config_.hidden_dim, 1), rng);
  params_.create("head.b", 1, 1);
  initialized_ = true;
}

std::vector<std::string> SectionFilterModel::section_tokens(const Section& section) const {
  std::vector<std::string> toks = tokenize(section.title);
  if (config_.input_mode == FilterInputMode::title_and_body) {
    for (const Sentence& s : section.sentences) {
      if (static_cast<int>(toks.size()) >= config_.max_tokens) break;
      for (std::string& t : tokenize(s.text)) toks.push_back(std::move(t));
    }
  }
  return toks;
}

ad::Var SectionFilterModel::forward(ad::Tape& tape, nn::ParamBinding& pb,
                                    const Paper& paper) const {
  if (!initialized_) throw TrainingError("section filter: parameters not initialized");
  if (paper.sections.empty()) throw ValidationError("section filter: paper has no sections");
  const nn::TextEncoderConfig ec = encoder_config(config_);
  std::vector<ad::Var> rows;
  rows.reserve(paper.sections.size());
  for (const Section& sec : paper.sections)
    rows.push_back(nn::encode_text(tape, pb, "enc", ec, section_tokens(sec)));
  ad::Var x = tape.concat_rows(rows);
  if (config_.use_paper_context) {
    x = tape.add_const(x, nn::sinusoidal_position_encoding(
                              static_cast<int>(paper.sections.size()), config_.hidden_dim));
    const nn::LayerDims dims{config_.hidden_dim, config_.ffn_dim, config_.heads};
    for (int l = 0; l < config_.context_layers; ++l)
      x = nn::transformer_layer(tape, pb, "ctx.l" + std::to_string(l), dims, x, nullptr);
  }
  ad::Var logits = tape.add_rowvec(tape.matmul(x, pb("head.w")), pb("head.b"));
  return tape.sigmoid(logits);
}

Eigen::VectorXd SectionFilterModel::encode_section(const Section& section) const {
  if (!initialized_) throw TrainingError("section filter: parameters not initialized");
  ad::Tape tape;
  nn::ParamBinding pb(tape, params_);
  ad::Var v = nn::encode_text(tape, pb, "enc", encoder_config(config_),
                              section_tokens(section));
  return tape.value(v).row(0).transpose();
}

std::vector<double> SectionFilterModel::score_sections(const Paper& paper) const {
  ad::Tape tape;
  nn::ParamBinding pb(tape, params_);
  const Eigen::MatrixXd probs = tape.value(forward(tape, pb, paper));
  std::vector<double> out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) out[static_cast<std::size_t>(i)] = probs(i, 0);
  return out;
}

std::vector<Section> SectionFilterModel::filter_sections(const Paper& paper) const {
  const std::vector<double> scores = score_sections(paper);
  std::vector<Section> kept;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] >= config_.threshold) kept.push_back(paper.sections[i]);
  if (kept.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
      if (scores[i] > scores[best]) best = i;
    kept.push_back(paper.sections[best]);
  }
  return kept;
}

FilterTrainStats SectionFilterModel::train(const Corpus& train_set, const Corpus& val_set,
                                           std::uint64_t seed) {
  if (train_set.empty()) throw TrainingError("section filter: empty training set");
  if (!initialized_) init_params(seed);

  std::mt19937_64 rng(seed ^ 0x5ec71f17u);
  nn::AdamState adam;
  FilterTrainStats stats;
  nn::ParamStore best_params;
  bool have_best = false;

  for (int epoch = 0; epoch < config_.max_epochs; ++epoch) {
    const std::vector<int> order = shuffled_indices(static_cast<int>(train_set.size()), rng);
    double loss_sum = 0.0;
    int steps = 0;
    for (int idx : order) {
      const auto& [paper, annotations] = train_set[static_cast<std::size_t>(idx)];
      const std::vector<int> labels = importance_labels(paper, annotations);
      ad::Tape tape;
      nn::ParamBinding pb(tape, params_);
      ad::Var probs = forward(tape, pb, paper);
      const Eigen::Index n = tape.value(probs).rows();
      Eigen::MatrixXd y(n, 1), w(n, 1);
      for (Eigen::Index i = 0; i < n; ++i) {
        y(i, 0) = labels[static_cast<std::size_t>(i)];
        w(i, 0) = 1.0 / static_cast<double>(n);
      }
      ad::Var loss = tape.weighted_bce(probs, y, w);
      const double loss_val = tape.value(loss)(0, 0);
      if (!std::isfinite(loss_val))
        throw TrainingError("section filter: loss diverged (non-finite) on paper " + paper.id);
      tape.backward(loss);
      nn::adam_step(params_, adam, pb.grads(), config_.lr, config_.adam_beta1,
                    config_.adam_beta2);
      loss_sum += loss_val;
      ++steps;
    }

    FilterEpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_sum / std::max(steps, 1);
    rec.val_accuracy = std::numeric_limits<double>::quiet_NaN();
    if (!val_set.empty()) {
      rec.val_accuracy = accuracy(val_set);
      if (!have_best || rec.val_accuracy > stats.best_val_accuracy) {
        stats.best_val_accuracy = rec.val_accuracy;
        stats.best_epoch = epoch;
        best_params = params_;
        have_best = true;
      }
    }
    stats.epochs.push_back(rec);
  }
  if (have_best) params_ = best_params;
  return stats;
}

double SectionFilterModel::accuracy(const Corpus& labeled) const {
  long long correct = 0, total = 0;
  for (const auto& [paper, annotations] : labeled) {
    const std::vector<int> labels = importance_labels(paper, annotations);
    const std::vector<double> scores = score_sections(paper);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const int pred = scores[i] >= config_.threshold ? 1 : 0;
      if (pred == labels[i]) ++correct;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

void SectionFilterModel::save(const std::filesystem::path& path) const {
  if (!initialized_) throw TrainingError("section filter: cannot save uninitialized model");
  nlohmann::json root;
  root["format_version"] = 1;
  root["kind"] = "section_filter";
  nlohmann::json jc;
  jc["input_mode"] = to_string(config_.input_mode);
  jc["use_paper_context"] = config_.use_paper_context;
  jc["context_layers"] = config_.context_layers;
  jc["threshold"] = config_.threshold;
  jc["max_tokens"] = config_.max_tokens;
  jc["hidden_dim"] = config_.hidden_dim;
  jc["ffn_dim"] = config_.ffn_dim;
  jc["heads"] = config_.heads;
  jc["unit_encoder_layers"] = config_.unit_encoder_layers;
  jc["vocab_size"] = config_.vocab_size;
  jc["lr"] = config_.lr;
  jc["adam_beta1"] = config_.adam_beta1;
  jc["adam_beta2"] = config_.adam_beta2;
  jc["max_epochs"] = config_.max_epochs;
  root["config"] = std::move(jc);
  root["params"] = nlohmann::json::parse(nn::params_to_json(params_));
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write checkpoint: " + path.string());
  out << root.dump(2) << "\n";
}

SectionFilterModel SectionFilterModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot read checkpoint: " + path.string());
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("checkpoint " + path.string() + ": " + e.what());
  }
  if (root.value("kind", "") != "section_filter")
    throw LoadError("checkpoint " + path.string() + ": not a section_filter checkpoint");
  const nlohmann::json& jc = root.at("config");
  SectionFilterConfig cfg;
  cfg.input_mode = filter_input_mode_from_string(jc.at("input_mode").get<std::string>());
  cfg.use_paper_context = jc.at("use_paper_context").get<bool>();
  cfg.context_layers = jc.at("context_layers").get<int>();
  cfg.threshold = jc.at("threshold").get<double>();
  cfg.max_tokens = jc.at("max_tokens").get<int>();
  cfg.hidden_dim = jc.at("hidden_dim").get<int>();
  cfg.ffn_dim = jc.at("ffn_dim").get<int>();
  cfg.heads = jc.at("heads").get<int>();
  cfg.unit_encoder_layers = jc.at("unit_encoder_layers").get<int>();
  cfg.vocab_size = jc.at("vocab_size").get<int>();
  cfg.lr = jc.at("lr").get<double>();
  cfg.adam_beta1 = jc.at("adam_beta1").get<double>();
  cfg.adam_beta2 = jc.at("adam_beta2").get<double>();
  cfg.max_epochs = jc.at("max_epochs").get<int>();
  SectionFilterModel model(cfg);
  nn::params_from_json(root.at("params").dump(), model.params_);
  model.initialized_ = true;
  return model;
}

} // namespace postergen
