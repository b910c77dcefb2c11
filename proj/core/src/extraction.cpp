#include "postergen/extraction.hpp"

#include "postergen/errors.hpp"
#include "postergen/rouge.hpp"
#include "postergen/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace postergen {

namespace {

constexpr double kProbClamp = 1e-7;

nn::TextEncoderConfig unit_encoder_config(const ModelConfig& c) {
  nn::TextEncoderConfig ec;
  ec.layers = c.unit_encoder_layers;
  ec.d_model = c.d_k;
  ec.d_ff = c.d_ff;
  ec.heads = c.heads;
  ec.vocab_size = c.vocab_size;
  ec.max_tokens = c.max_unit_tokens;
  return ec;
}

} // namespace

void ModelConfig::validate() const {
  if (encoder_layers < 1) throw ValidationError("extraction: encoder_layers must be >= 1");
  if (d_k < 2 || d_k % 2 != 0) throw ValidationError("extraction: d_k must be even and >= 2");
  if (heads < 1 || d_k % heads != 0)
    throw ValidationError("extraction: d_k must be divisible by heads");
  if (d_ff < 1) throw ValidationError("extraction: d_ff must be >= 1");
  if (h1 < 0.0 || h2 < 0.0) throw ValidationError("extraction: h1 and h2 must be >= 0");
  if (alpha_s <= 0.0 || beta_s <= 0.0 || alpha_g <= 0.0 || beta_g <= 0.0)
    throw ValidationError("extraction: loss weights must be positive");
  if (gamma < 0.0) throw ValidationError("extraction: gamma must be >= 0");
  if (lr <= 0.0) throw ValidationError("extraction: lr must be positive");
  if (!use_captions && !use_sentences)
    throw ValidationError("extraction: use_captions and use_sentences cannot both be false");
  if (unit_encoder_layers < 1)
    throw ValidationError("extraction: unit_encoder_layers must be >= 1");
  if (vocab_size < 2) throw ValidationError("extraction: vocab_size must be >= 2");
  if (max_unit_tokens < 1) throw ValidationError("extraction: max_unit_tokens must be >= 1");
  if (max_epochs < 1) throw ValidationError("extraction: max_epochs must be >= 1");
  if (patience < 1) throw ValidationError("extraction: patience must be >= 1");
  if (word_budget < 1) throw ValidationError("extraction: word_budget must be >= 1");
  if (graph_threshold < 0.0 || graph_threshold > 1.0)
    throw ValidationError("extraction: graph_threshold must lie in [0, 1]");
}

std::string draft_text(const Section& section, const PanelDraft& draft) {
  std::vector<std::string> parts;
  parts.reserve(draft.sentence_indices.size());
  for (int idx : draft.sentence_indices)
    parts.push_back(section.sentences.at(static_cast<std::size_t>(idx)).text);
  return join(parts, " ");
}

ReferenceEdges build_reference_edges(const Section& section) {
  std::map<std::string, int> graph_index;
  for (std::size_t j = 0; j < section.graphs.size(); ++j)
    graph_index[section.graphs[j].id] = static_cast<int>(j);
  ReferenceEdges edges;
  for (std::size_t i = 0; i < section.sentences.size(); ++i)
    for (const std::string& gid : section.sentences[i].refs) {
      auto it = graph_index.find(gid);
      if (it != graph_index.end())
        edges.emplace_back(static_cast<int>(i), it->second);
    }
  return edges;
}

double balanced_ce(double p, int y, double alpha, double beta) {
  const double pc = std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
  return y == 1 ? -alpha * std::log(pc) : -beta * std::log(1.0 - pc);
}

double combined_loss(const std::vector<double>& sentence_probs,
                     const std::vector<int>& sentence_labels,
                     const std::vector<double>& graph_probs,
                     const std::vector<int>& graph_labels, const ModelConfig& config) {
  if (sentence_probs.size() != sentence_labels.size() ||
      graph_probs.size() != graph_labels.size())
    throw ValidationError("combined_loss: probabilities and labels misaligned");
  double loss_sentence = 0.0;
  for (std::size_t i = 0; i < sentence_probs.size(); ++i)
    loss_sentence += balanced_ce(sentence_probs[i], sentence_labels[i], config.alpha_s,
                                 config.beta_s);
  if (!sentence_probs.empty()) loss_sentence /= static_cast<double>(sentence_probs.size());
  double loss_graph = 0.0;
  for (std::size_t i = 0; i < graph_probs.size(); ++i)
    loss_graph += balanced_ce(graph_probs[i], graph_labels[i], config.alpha_g, config.beta_g);
  if (!graph_probs.empty()) loss_graph /= static_cast<double>(graph_probs.size());
  return loss_sentence + config.gamma * loss_graph;
}

ExtractionModel::ExtractionModel(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
}

void ExtractionModel::init_params(std::uint64_t seed) {
  params_ = nn::ParamStore();
  std::mt19937_64 rng(seed);
  nn::init_text_encoder(params_, "unit", unit_encoder_config(config_), rng);
  const nn::LayerDims dims{config_.d_k, config_.d_ff, config_.heads};
  for (int l = 0; l < config_.encoder_layers; ++l)
    nn::init_transformer_layer(params_, "joint.l" + std::to_string(l), dims, rng);
  nn::gaussian_init(params_.create("head.w", config_.d_k, 1), rng);
  params_.create("head.b", 1, 1);
  initialized_ = true;
}

ExtractionModel::UnitInputs ExtractionModel::unit_inputs(const Section& section) const {
  UnitInputs units;
  if (config_.use_sentences)
    for (const Sentence& s : section.sentences) units.unit_tokens.push_back(tokenize(s.text));
  units.n = static_cast<int>(units.unit_tokens.size());
  if (config_.use_captions)
    for (const GraphElement& g : section.graphs)
      units.unit_tokens.push_back(tokenize(g.caption));
  units.m = static_cast<int>(units.unit_tokens.size()) - units.n;
  if (units.n + units.m == 0)
    throw ValidationError("extraction: section " + section.id + " yields no units");
  if (config_.use_sentences && config_.use_captions)
    units.refs = build_reference_edges(section);
  return units;
}

ad::Var ExtractionModel::forward_tape(ad::Tape& tape, nn::ParamBinding& pb,
                                      const UnitInputs& units) const {
  if (!initialized_) throw TrainingError("extraction: parameters not initialized");
  const nn::TextEncoderConfig ec = unit_encoder_config(config_);
  std::vector<ad::Var> rows;
  rows.reserve(units.unit_tokens.size());
  for (const auto& toks : units.unit_tokens)
    rows.push_back(nn::encode_text(tape, pb, "unit", ec, toks));
  ad::Var x = tape.concat_rows(rows);
  const int total = units.n + units.m;
  x = tape.add_const(x, nn::sinusoidal_position_encoding(total, config_.d_k));

  // The ablation without the attention weight runs the exact same code path
  // with a zero matrix, so it reduces to the original attention equation.
  const Eigen::MatrixXd bias =
      config_.use_bias_weight
          ? build_attention_bias(units.n, units.m, units.refs, config_.h1, config_.h2)
          : Eigen::MatrixXd::Zero(total, total);
  const nn::LayerDims dims{config_.d_k, config_.d_ff, config_.heads};
  for (int l = 0; l < config_.encoder_layers; ++l)
    x = nn::transformer_layer(tape, pb, "joint.l" + std::to_string(l), dims, x, &bias);

  ad::Var logits = tape.add_rowvec(tape.matmul(x, pb("head.w")), pb("head.b"));
  return tape.sigmoid(logits);
}

EncodedUnits ExtractionModel::encode_units(const std::vector<std::string>& sentences,
                                           const std::vector<std::string>& captions) const {
  if (!initialized_) throw TrainingError("extraction: parameters not initialized");
  const std::vector<std::string> empty;
  const std::vector<std::string>& sents = config_.use_sentences ? sentences : empty;
  const std::vector<std::string>& caps = config_.use_captions ? captions : empty;
  if (sents.empty() && caps.empty())
    throw ValidationError("extraction: no units to encode");
  const nn::TextEncoderConfig ec = unit_encoder_config(config_);
  ad::Tape tape;
  nn::ParamBinding pb(tape, params_);
  EncodedUnits out;
  out.n = static_cast<int>(sents.size());
  out.m = static_cast<int>(caps.size());
  out.sentence_matrix.resize(out.n, config_.d_k);
  out.caption_matrix.resize(out.m, config_.d_k);
  for (int i = 0; i < out.n; ++i)
    out.sentence_matrix.row(i) =
        tape.value(nn::encode_text(tape, pb, "unit", ec, tokenize(sents[i]))).row(0);
  for (int j = 0; j < out.m; ++j)
    out.caption_matrix.row(j) =
        tape.value(nn::encode_text(tape, pb, "unit", ec, tokenize(caps[j]))).row(0);
  out.combined.resize(out.n + out.m, config_.d_k);
  out.combined << out.sentence_matrix, out.caption_matrix;
  return out;
}

ExtractionScores ExtractionModel::forward(const Section& section) const {
  const UnitInputs units = unit_inputs(section);
  ad::Tape tape;
  nn::ParamBinding pb(tape, params_);
  const Eigen::MatrixXd probs = tape.value(forward_tape(tape, pb, units));
  ExtractionScores scores;
  scores.sentence_scores.resize(static_cast<std::size_t>(units.n));
  scores.graph_scores.resize(static_cast<std::size_t>(units.m));
  for (int i = 0; i < units.n; ++i) scores.sentence_scores[static_cast<std::size_t>(i)] = probs(i, 0);
  for (int j = 0; j < units.m; ++j)
    scores.graph_scores[static_cast<std::size_t>(j)] = probs(units.n + j, 0);
  return scores;
}

ExtractionModel::SampleEval ExtractionModel::evaluate_sample(const AlignedSample& sample,
                                                             bool with_grads) const {
  const UnitInputs units = unit_inputs(sample.section);
  std::vector<int> sent_labels;
  if (config_.use_sentences) {
    sent_labels = sample.derived_sentence_labels;
    if (static_cast<int>(sent_labels.size()) != units.n)
      throw TrainingError("extraction: sample " + sample.section.id +
                          " lacks derived sentence labels; run the labeler first");
  }
  std::vector<int> graph_labels = config_.use_captions ? sample.graph_labels() : std::vector<int>{};

  ad::Tape tape;
  nn::ParamBinding pb(tape, params_);
  ad::Var probs = forward_tape(tape, pb, units);

  SampleEval eval;
  ad::Var total;
  bool have_total = false;
  if (units.n > 0) {
    ad::Var ps = tape.rows(probs, 0, units.n);
    Eigen::MatrixXd y(units.n, 1), w(units.n, 1);
    for (int i = 0; i < units.n; ++i) {
      y(i, 0) = sent_labels[static_cast<std::size_t>(i)];
      w(i, 0) = (sent_labels[static_cast<std::size_t>(i)] == 1 ? config_.alpha_s
                                                               : config_.beta_s) /
                static_cast<double>(units.n);
    }
    ad::Var ls = tape.weighted_bce(ps, y, w);
    eval.loss_sentence = tape.value(ls)(0, 0);
    total = ls;
    have_total = true;
  }
  if (units.m > 0) {
    ad::Var pg = tape.rows(probs, units.n, units.m);
    Eigen::MatrixXd y(units.m, 1), w(units.m, 1);
    for (int j = 0; j < units.m; ++j) {
      y(j, 0) = graph_labels[static_cast<std::size_t>(j)];
      w(j, 0) = (graph_labels[static_cast<std::size_t>(j)] == 1 ? config_.alpha_g
                                                                : config_.beta_g) /
                static_cast<double>(units.m);
    }
    ad::Var lg = tape.weighted_bce(pg, y, w);
    eval.loss_graph = tape.value(lg)(0, 0);
    ad::Var scaled = tape.scale(lg, config_.gamma);
    total = have_total ? tape.add(total, scaled) : scaled;
    have_total = true;
  }
  if (!have_total) throw TrainingError("extraction: sample has no labeled units");
  eval.loss = tape.value(total)(0, 0);

  const Eigen::MatrixXd& pv = tape.value(probs);
  eval.scores.sentence_scores.resize(static_cast<std::size_t>(units.n));
  eval.scores.graph_scores.resize(static_cast<std::size_t>(units.m));
  for (int i = 0; i < units.n; ++i)
    eval.scores.sentence_scores[static_cast<std::size_t>(i)] = pv(i, 0);
  for (int j = 0; j < units.m; ++j)
    eval.scores.graph_scores[static_cast<std::size_t>(j)] = pv(units.n + j, 0);

  if (with_grads) {
    tape.backward(total);
    eval.grads = pb.grads();
  }
  return eval;
}

ExtractTrainStats ExtractionModel::train(const std::vector<AlignedSample>& train_samples,
                                         const std::vector<AlignedSample>& val_samples,
                                         std::uint64_t seed) {
  if (train_samples.empty()) throw TrainingError("extraction: empty training set");
  if (!initialized_) init_params(seed);

  std::mt19937_64 rng(seed ^ 0xe87ac71dull);
  nn::AdamState adam;
  ExtractTrainStats stats;
  nn::ParamStore best_params;
  bool have_best = false;
  int stale_epochs = 0;
  int global_step = 0;

  auto validate_rouge2 = [&]() {
    double sum = 0.0;
    for (const AlignedSample& s : val_samples) {
      const ExtractionScores scores = forward(s.section);
      const PanelDraft draft =
          select_panel_content(scores, s.section, config_.word_budget, config_.graph_threshold);
      sum += rouge_n(draft_text(s.section, draft), s.panel_text, 2).f1;
    }
    return val_samples.empty() ? 0.0 : sum / static_cast<double>(val_samples.size());
  };

  for (int epoch = 0; epoch < config_.max_epochs; ++epoch) {
    const std::vector<int> order =
        shuffled_indices(static_cast<int>(train_samples.size()), rng);
    double loss_sum = 0.0;
    for (int idx : order) {
      const AlignedSample& sample = train_samples[static_cast<std::size_t>(idx)];
      SampleEval eval = evaluate_sample(sample, /*with_grads=*/true);
      if (!std::isfinite(eval.loss))
        throw TrainingError("extraction: loss diverged (non-finite) at step " +
                            std::to_string(global_step) + " on section " + sample.section.id);
      nn::adam_step(params_, adam, eval.grads, config_.lr, config_.adam_beta1,
                    config_.adam_beta2);
      ExtractStepRecord rec;
      rec.epoch = epoch;
      rec.step = global_step++;
      rec.loss = eval.loss;
      rec.loss_sentence = eval.loss_sentence;
      rec.loss_graph = eval.loss_graph;
      stats.steps.push_back(rec);
      loss_sum += eval.loss;
    }

    ExtractEpochRecord er;
    er.epoch = epoch;
    er.mean_loss = loss_sum / static_cast<double>(train_samples.size());
    er.val_rouge2 = std::numeric_limits<double>::quiet_NaN();
    stats.epochs_run = epoch + 1;
    if (!val_samples.empty()) {
      er.val_rouge2 = validate_rouge2();
      if (!have_best || er.val_rouge2 > stats.best_val_rouge2) {
        stats.best_val_rouge2 = er.val_rouge2;
        stats.best_epoch = epoch;
        best_params = params_;
        have_best = true;
        stale_epochs = 0;
      } else {
        ++stale_epochs;
      }
    }
    stats.epochs.push_back(er);
    if (!val_samples.empty() && stale_epochs >= config_.patience) break;
  }
  if (have_best) params_ = best_params;
  return stats;
}

PanelDraft select_panel_content(const ExtractionScores& scores, const Section& section,
                                int word_budget, double graph_threshold) {
  if (word_budget < 1) throw std::invalid_argument("select_panel_content: word_budget must be >= 1");
  const std::size_t n = scores.sentence_scores.size();
  if (n > section.sentences.size())
    throw std::invalid_argument("select_panel_content: scores and section misaligned");

  std::vector<int> by_score(n);
  for (std::size_t i = 0; i < n; ++i) by_score[i] = static_cast<int>(i);
  std::stable_sort(by_score.begin(), by_score.end(), [&](int a, int b) {
    return scores.sentence_scores[static_cast<std::size_t>(a)] >
           scores.sentence_scores[static_cast<std::size_t>(b)];
  });

  PanelDraft draft;
  int used = 0;
  for (int idx : by_score) {
    const int len = count_words(section.sentences[static_cast<std::size_t>(idx)].text);
    if (used + len > word_budget) continue; // skip and keep trying shorter ones
    draft.sentence_indices.push_back(idx);
    used += len;
  }
  if (draft.sentence_indices.empty() && n > 0)
    draft.sentence_indices.push_back(by_score.front());
  std::sort(draft.sentence_indices.begin(), draft.sentence_indices.end());

  for (std::size_t j = 0; j < scores.graph_scores.size() && j < section.graphs.size(); ++j)
    if (scores.graph_scores[j] >= graph_threshold)
      draft.graph_ids.push_back(section.graphs[j].id);
  return draft;
}

namespace {

nlohmann::json model_config_to_json(const ModelConfig& c) {
  nlohmann::json j;
  j["encoder_layers"] = c.encoder_layers;
  j["d_k"] = c.d_k;
  j["d_ff"] = c.d_ff;
  j["heads"] = c.heads;
  j["h1"] = c.h1;
  j["h2"] = c.h2;
  j["alpha_s"] = c.alpha_s;
  j["beta_s"] = c.beta_s;
  j["alpha_g"] = c.alpha_g;
  j["beta_g"] = c.beta_g;
  j["gamma"] = c.gamma;
  j["lr"] = c.lr;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["use_bias_weight"] = c.use_bias_weight;
  j["use_captions"] = c.use_captions;
  j["use_sentences"] = c.use_sentences;
  j["unit_encoder_layers"] = c.unit_encoder_layers;
  j["vocab_size"] = c.vocab_size;
  j["max_unit_tokens"] = c.max_unit_tokens;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["word_budget"] = c.word_budget;
  j["graph_threshold"] = c.graph_threshold;
  return j;
}

const char* const kConfigKeys[] = {
    "encoder_layers", "d_k",       "d_ff",        "heads",
    "h1",             "h2",        "alpha_s",     "beta_s",
    "alpha_g",        "beta_g",    "gamma",       "lr",
    "adam_beta1",     "adam_beta2", "use_bias_weight", "use_captions",
    "use_sentences",  "unit_encoder_layers", "vocab_size", "max_unit_tokens",
    "max_epochs",     "patience",  "word_budget", "graph_threshold"};

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c; // partial configs keep the defaults
  c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
  c.d_k = j.value("d_k", c.d_k);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.heads = j.value("heads", c.heads);
  c.h1 = j.value("h1", c.h1);
  c.h2 = j.value("h2", c.h2);
  c.alpha_s = j.value("alpha_s", c.alpha_s);
  c.beta_s = j.value("beta_s", c.beta_s);
  c.alpha_g = j.value("alpha_g", c.alpha_g);
  c.beta_g = j.value("beta_g", c.beta_g);
  c.gamma = j.value("gamma", c.gamma);
  c.lr = j.value("lr", c.lr);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.use_bias_weight = j.value("use_bias_weight", c.use_bias_weight);
  c.use_captions = j.value("use_captions", c.use_captions);
  c.use_sentences = j.value("use_sentences", c.use_sentences);
  c.unit_encoder_layers = j.value("unit_encoder_layers", c.unit_encoder_layers);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.max_unit_tokens = j.value("max_unit_tokens", c.max_unit_tokens);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.word_budget = j.value("word_budget", c.word_budget);
  c.graph_threshold = j.value("graph_threshold", c.graph_threshold);
  return c;
}

} // namespace

std::string model_config_signature(const ModelConfig& config) {
  return model_config_to_json(config).dump();
}

ModelConfig model_config_from_signature(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("model config: ") + e.what());
  }
  if (!j.is_object()) throw LoadError("model config: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : kConfigKeys)
      if (it.key() == key) { known = true; break; }
    if (!known) throw LoadError("model config: unknown field \"" + it.key() + "\"");
  }
  ModelConfig c = model_config_from_json(j);
  c.validate();
  return c;
}

void ExtractionModel::save(const std::filesystem::path& path) const {
  if (!initialized_) throw TrainingError("extraction: cannot save uninitialized model");
  nlohmann::json root;
  root["format_version"] = 1;
  root["kind"] = "extraction";
  root["config"] = model_config_to_json(config_);
  root["params"] = nlohmann::json::parse(nn::params_to_json(params_));
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write checkpoint: " + path.string());
  out << root.dump(2) << "\n";
}

ExtractionModel ExtractionModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot read checkpoint: " + path.string());
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("checkpoint " + path.string() + ": " + e.what());
  }
  if (root.value("kind", "") != "extraction")
    throw LoadError("checkpoint " + path.string() + ": not an extraction checkpoint");
  ExtractionModel model(model_config_from_json(root.at("config")));
  nn::params_from_json(root.at("params").dump(), model.params_);
  model.initialized_ = true;
  return model;
}

} // namespace postergen
