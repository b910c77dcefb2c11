// postergen: turn a structured paper record into a tikzposter document.
//
// Every pipeline stage is its own subcommand so artifacts can be produced,
// inspected and re-used independently. Settings come from an optional JSON
// config file; command-line flags override it.

#include "CLI11.hpp"

#include "postergen/baselines.hpp"
#include "postergen/composer.hpp"
#include "postergen/corpus.hpp"
#include "postergen/errors.hpp"
#include "postergen/evaluation.hpp"
#include "postergen/extraction.hpp"
#include "postergen/rouge.hpp"
#include "postergen/section_filter.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace postergen;

namespace {

// ---------------------------------------------------------------------------
// small I/O helpers

json parse_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw LoadError(std::string(what) + ": cannot read " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw LoadError(std::string(what) + " " + path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  out << text;
}

void emit_json(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);
}

// ---------------------------------------------------------------------------
// configuration plumbing: defaults < config file < flags

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 1234;
  CLI::Option* seed_opt = nullptr;

  json config() const {
    if (config_path.empty()) return json::object();
    json j = parse_json_file(config_path, "config file");
    if (!j.is_object()) throw LoadError("config file " + config_path + ": expected an object");
    return j;
  }

  std::uint64_t resolve_seed(const json& cfg) const {
    if (seed_opt != nullptr && seed_opt->count() > 0) return seed;
    return cfg.value("seed", seed);
  }
};

CommonOpts* add_common(CLI::App* sub) {
  auto* opts = new CommonOpts(); // lives for the program, freed at exit
  sub->add_option("--config", opts->config_path,
                  "JSON config file; flags override its values");
  opts->seed_opt = sub->add_option("--seed", opts->seed, "random seed (default 1234)");
  return opts;
}

SectionFilterConfig filter_config_from_json(const json& j) {
  static const std::vector<std::string> known = {
      "input_mode", "use_paper_context", "context_layers", "threshold",
      "max_tokens", "hidden_dim",        "ffn_dim",        "heads",
      "unit_encoder_layers", "vocab_size", "lr", "adam_beta1", "adam_beta2",
      "max_epochs"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw LoadError("filter config: unknown key \"" + key + "\"");
  }
  SectionFilterConfig c;
  if (j.contains("input_mode"))
    c.input_mode = filter_input_mode_from_string(j.at("input_mode").get<std::string>());
  c.use_paper_context = j.value("use_paper_context", c.use_paper_context);
  c.context_layers = j.value("context_layers", c.context_layers);
  c.threshold = j.value("threshold", c.threshold);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.heads = j.value("heads", c.heads);
  c.unit_encoder_layers = j.value("unit_encoder_layers", c.unit_encoder_layers);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.lr = j.value("lr", c.lr);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.validate();
  return c;
}

SectionFilterConfig resolve_filter_config(const json& cfg) {
  return filter_config_from_json(cfg.value("filter", json::object()));
}

ModelConfig resolve_extract_config(const json& cfg) {
  return model_config_from_signature(cfg.value("extract", json::object()).dump());
}

TextRankConfig resolve_textrank_config(const json& cfg) {
  const json j = cfg.value("textrank", json::object());
  TextRankConfig c;
  c.damping = j.value("damping", c.damping);
  c.convergence_eps = j.value("convergence_eps", c.convergence_eps);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.length_limit = j.value("length_limit", c.length_limit);
  c.validate();
  return c;
}

Orientation resolve_orientation(const std::string& flag_value, const json& cfg) {
  if (!flag_value.empty()) return orientation_from_string(flag_value);
  if (cfg.contains("orientation"))
    return orientation_from_string(cfg.at("orientation").get<std::string>());
  throw ValidationError(
      "no orientation given; pass --orientation portrait|landscape or set it in the config");
}

std::string resolve_authors(const std::string& flag_value, CLI::Option* opt, const json& cfg) {
  if (opt->count() > 0) return flag_value;
  return cfg.value("authors", flag_value);
}

std::vector<Template> resolve_templates(const std::string& template_file, const json& cfg) {
  std::string path = template_file;
  if (path.empty()) path = cfg.value("template_file", "");
  return path.empty() ? builtin_templates() : load_templates(path);
}

// ---------------------------------------------------------------------------
// shared pipeline pieces

void require_checkpoint(const fs::path& path, const std::string& train_command) {
  if (fs::exists(path)) return;
  throw LoadError("checkpoint " + path.string() + " not found; train one with: postergen " +
                  train_command + " --corpus <corpus dir> --checkpoint " + path.string());
}

std::vector<AlignedSample> labeled_samples(const Paper& paper, const PaperAnnotations& ann) {
  std::vector<AlignedSample> samples = make_samples(paper, ann);
  for (AlignedSample& s : samples)
    if (s.derived_sentence_labels.empty())
      s.derived_sentence_labels = greedy_label_sentences(s.section, s.panel_text);
  return samples;
}

/// Deterministic paper-level split: the last round(n * fraction) papers go to
/// validation (corpus order is sorted by paper id).
std::size_t validation_count(std::size_t n_papers, double fraction) {
  if (fraction <= 0.0 || n_papers < 2) return 0;
  auto n_val = static_cast<std::size_t>(static_cast<double>(n_papers) * fraction + 0.5);
  if (n_val == 0) n_val = 1;
  if (n_val >= n_papers) n_val = n_papers - 1;
  return n_val;
}

json draft_to_json(const Section& section, const PanelDraft& draft,
                   const ExtractionScores& scores) {
  json j;
  j["id"] = section.id;
  j["sentence_indices"] = draft.sentence_indices;
  j["graph_ids"] = draft.graph_ids;
  j["sentence_scores"] = scores.sentence_scores;
  j["graph_scores"] = scores.graph_scores;
  return j;
}

PanelDraft draft_from_json(const json& j) {
  PanelDraft draft;
  for (const auto& v : j.value("sentence_indices", json::array()))
    draft.sentence_indices.push_back(v.get<int>());
  for (const auto& v : j.value("graph_ids", json::array()))
    draft.graph_ids.push_back(v.get<std::string>());
  return draft;
}

// ---------------------------------------------------------------------------
// subcommands

void cmd_synth(const CommonOpts& common, const std::string& out_dir, int papers,
               const SynthesisConfig& syn) {
  const json cfg = common.config();
  const auto corpus = synthesize_corpus(common.resolve_seed(cfg), papers, syn);
  save_corpus(corpus, out_dir);
  std::cout << "wrote " << corpus.size() << " papers to " << out_dir << "\n";
}

void cmd_ingest(const std::string& corpus_dir) {
  std::vector<std::string> warnings;
  const Corpus corpus = load_corpus(corpus_dir, &warnings);
  std::size_t sections = 0, sentences = 0, graphs = 0, annotated = 0;
  for (const auto& [paper, ann] : corpus) {
    sections += paper.sections.size();
    for (const Section& s : paper.sections) {
      sentences += s.sentences.size();
      graphs += s.graphs.size();
    }
    annotated += ann.size();
  }
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "papers: " << corpus.size() << "\n"
            << "sections: " << sections << "\n"
            << "sentences: " << sentences << "\n"
            << "graphs: " << graphs << "\n"
            << "annotated sections: " << annotated << "\n"
            << "warnings: " << warnings.size() << "\n";
}

void cmd_label(const std::string& corpus_dir, const std::string& out_dir) {
  if (fs::weakly_canonical(corpus_dir) == fs::weakly_canonical(out_dir))
    throw ValidationError("label: --out must differ from --corpus (inputs are never modified)");
  const Corpus corpus = load_corpus(corpus_dir);

  std::size_t labeled = 0;
  std::vector<SynthesizedPaper> out;
  out.reserve(corpus.size());
  for (const auto& [paper, ann] : corpus) {
    SynthesizedPaper entry;
    entry.paper = paper;
    entry.annotations = ann;
    for (auto& [section_id, annotation] : entry.annotations) {
      if (!annotation.important || annotation.sentence_labels) continue;
      if (annotation.panel_text.empty()) continue;
      for (const Section& sec : paper.sections) {
        if (sec.id != section_id) continue;
        annotation.sentence_labels = greedy_label_sentences(sec, annotation.panel_text);
        ++labeled;
        break;
      }
    }
    out.push_back(std::move(entry));
  }
  save_corpus(out, out_dir);
  std::cout << "labeled " << labeled << " sections across " << out.size() << " papers into "
            << out_dir << "\n";
}

void cmd_train_filter(const CommonOpts& common, const std::string& corpus_dir,
                      const std::string& checkpoint, double val_fraction,
                      std::optional<int> epochs, std::optional<double> lr) {
  const json cfg = common.config();
  SectionFilterConfig fc = resolve_filter_config(cfg);
  if (epochs) fc.max_epochs = *epochs;
  if (lr) fc.lr = *lr;
  fc.validate();

  const Corpus corpus = load_corpus(corpus_dir);
  if (corpus.empty()) throw ValidationError("train-filter: corpus " + corpus_dir + " is empty");
  const std::size_t n_val = validation_count(corpus.size(), val_fraction);
  const Corpus train(corpus.begin(), corpus.end() - static_cast<std::ptrdiff_t>(n_val));
  const Corpus val(corpus.end() - static_cast<std::ptrdiff_t>(n_val), corpus.end());

  SectionFilterModel model(fc);
  const FilterTrainStats stats = model.train(train, val, common.resolve_seed(cfg));
  if (fs::path(checkpoint).has_parent_path())
    fs::create_directories(fs::path(checkpoint).parent_path());
  model.save(checkpoint);

  std::cout << "trained section filter on " << train.size() << " papers ("
            << stats.epochs.size() << " epochs)";
  if (!val.empty())
    std::cout << ", best val accuracy " << stats.best_val_accuracy << " at epoch "
              << stats.best_epoch;
  std::cout << "\ncheckpoint: " << checkpoint << "\n";
}

void cmd_train_extract(const CommonOpts& common, const std::string& corpus_dir,
                       const std::string& checkpoint, double val_fraction,
                       std::optional<int> epochs, std::optional<double> lr) {
  const json cfg = common.config();
  ModelConfig mc = resolve_extract_config(cfg);
  if (epochs) mc.max_epochs = *epochs;
  if (lr) mc.lr = *lr;
  mc.validate();

  const Corpus corpus = load_corpus(corpus_dir);
  if (corpus.empty()) throw ValidationError("train-extract: corpus " + corpus_dir + " is empty");
  const std::size_t n_val = validation_count(corpus.size(), val_fraction);

  std::vector<AlignedSample> train, val;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto samples = labeled_samples(corpus[i].first, corpus[i].second);
    auto& bucket = i + n_val >= corpus.size() ? val : train;
    bucket.insert(bucket.end(), samples.begin(), samples.end());
  }

  const std::uint64_t seed = common.resolve_seed(cfg);
  ExtractionModel model(mc);
  model.init_params(seed);
  const ExtractTrainStats stats = model.train(train, val, seed);
  if (fs::path(checkpoint).has_parent_path())
    fs::create_directories(fs::path(checkpoint).parent_path());
  model.save(checkpoint);

  std::cout << "trained extraction model on " << train.size() << " samples ("
            << stats.epochs_run << " epochs)";
  if (!val.empty())
    std::cout << ", best val ROUGE-2 " << stats.best_val_rouge2 << " at epoch "
              << stats.best_epoch;
  std::cout << "\ncheckpoint: " << checkpoint << "\n";
}

void cmd_filter(const std::string& paper_path, const std::string& checkpoint,
                const std::string& out_path) {
  std::vector<std::string> warnings;
  const Paper paper = load_paper(paper_path, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

  require_checkpoint(checkpoint, "train-filter");
  const SectionFilterModel model = SectionFilterModel::load(checkpoint);
  const std::vector<double> scores = model.score_sections(paper);
  const std::vector<Section> kept = model.filter_sections(paper);

  std::vector<std::string> kept_ids;
  for (const Section& s : kept) kept_ids.push_back(s.id);
  json j;
  j["format_version"] = 1;
  j["paper"] = paper.id;
  j["threshold"] = model.config().threshold;
  j["sections"] = json::array();
  for (std::size_t i = 0; i < paper.sections.size(); ++i) {
    json js;
    js["id"] = paper.sections[i].id;
    js["title"] = paper.sections[i].title;
    js["score"] = scores[i];
    js["kept"] = std::find(kept_ids.begin(), kept_ids.end(), paper.sections[i].id) !=
                 kept_ids.end();
    j["sections"].push_back(std::move(js));
  }
  emit_json(j, out_path);
}

void cmd_extract(const std::string& paper_path, const std::string& checkpoint,
                 const std::string& out_path, std::optional<int> word_budget,
                 std::optional<double> graph_threshold) {
  std::vector<std::string> warnings;
  const Paper paper = load_paper(paper_path, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

  require_checkpoint(checkpoint, "train-extract");
  const ExtractionModel model = ExtractionModel::load(checkpoint);
  const int budget = word_budget.value_or(model.config().word_budget);
  const double threshold = graph_threshold.value_or(model.config().graph_threshold);

  json j;
  j["format_version"] = 1;
  j["paper"] = paper.id;
  j["sections"] = json::array();
  for (const Section& sec : paper.sections) {
    const ExtractionScores scores = model.forward(sec);
    const PanelDraft draft = select_panel_content(scores, sec, budget, threshold);
    j["sections"].push_back(draft_to_json(sec, draft, scores));
  }
  emit_json(j, out_path);
}

void cmd_compose(const CommonOpts& common, const std::string& paper_path,
                 const std::string& drafts_path, const std::string& out_path,
                 const std::string& orientation_flag, const std::string& authors_flag,
                 CLI::Option* authors_opt, const std::string& template_file) {
  const json cfg = common.config();
  std::vector<std::string> load_warnings;
  const Paper paper = load_paper(paper_path, &load_warnings);
  for (const std::string& w : load_warnings) std::cerr << "warning: " << w << "\n";

  const json drafts = parse_json_file(drafts_path, "drafts file");
  std::map<std::string, PanelDraft> by_section;
  for (const json& js : drafts.value("sections", json::array()))
    by_section[js.at("id").get<std::string>()] = draft_from_json(js);
  if (by_section.empty())
    throw ValidationError("drafts file " + drafts_path + " holds no sections");

  std::vector<std::pair<Section, PanelDraft>> panels;
  std::size_t matched = 0;
  for (const Section& sec : paper.sections) {
    auto it = by_section.find(sec.id);
    if (it == by_section.end()) continue;
    panels.emplace_back(sec, it->second);
    ++matched;
  }
  if (matched != by_section.size())
    throw ValidationError("drafts file " + drafts_path +
                          " names sections missing from paper " + paper.id);

  const Orientation orientation = resolve_orientation(orientation_flag, cfg);
  const std::string authors = resolve_authors(authors_flag, authors_opt, cfg);
  const PosterSpec spec = make_poster_spec(paper, authors, orientation, panels);
  const Template tmpl = select_template(spec, resolve_templates(template_file, cfg));

  std::vector<std::string> warnings;
  const std::string tex = render_poster(spec, tmpl, &warnings);
  write_text_file(out_path, tex);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << out_path << " (template " << tmpl.id << ")\n";
}

void cmd_baseline(const CommonOpts& common, const std::string& corpus_dir,
                  const std::string& method, const std::string& out_path,
                  double threshold, bool fit) {
  const json cfg = common.config();
  const Corpus corpus = load_corpus(corpus_dir);
  std::vector<AlignedSample> samples;
  for (const auto& [paper, ann] : corpus) {
    auto s = labeled_samples(paper, ann);
    samples.insert(samples.end(), s.begin(), s.end());
  }
  if (samples.empty())
    throw ValidationError("baseline: corpus " + corpus_dir + " has no annotated panels");

  json j;
  j["format_version"] = 1;
  j["method"] = method;
  j["samples"] = samples.size();

  auto rouge_block = [](const RougeTriple& t) {
    json r;
    for (const auto& [name, s] : {std::pair{"rouge1", t.rouge1}, {"rouge2", t.rouge2},
                                  {"rougeL", t.rougeL}}) {
      r[name] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
    }
    return r;
  };

  if (method == "lead3" || method == "textrank") {
    const TextRankConfig trc = resolve_textrank_config(cfg);
    std::vector<std::string> predictions, references;
    for (const AlignedSample& s : samples) {
      const std::vector<int> picked =
          method == "lead3" ? lead3(s.section) : textrank_extract(s.section, trc);
      PanelDraft draft;
      draft.sentence_indices = picked;
      predictions.push_back(draft_text(s.section, draft));
      references.push_back(s.panel_text);
    }
    j["rouge"] = rouge_block(evaluate_text(predictions, references));
  } else { // similarity
    const double t = fit ? fit_similarity_threshold(samples) : threshold;
    std::vector<std::set<std::string>> predicted;
    for (const AlignedSample& s : samples) {
      const std::vector<std::string> ids = similarity_graph_select(s.section, t);
      predicted.emplace_back(ids.begin(), ids.end());
    }
    const auto acc = evaluate_graphs(samples, predicted);
    j["threshold"] = t;
    j["graph_accuracy"] = acc ? json(*acc) : json(nullptr);
  }
  emit_json(j, out_path);
}

void cmd_evaluate(const CommonOpts& common, const std::string& corpus_dir, int k,
                  const std::string& out_path, std::optional<int> epochs,
                  std::optional<double> lr) {
  const json cfg = common.config();
  ModelConfig mc = resolve_extract_config(cfg);
  if (epochs) mc.max_epochs = *epochs;
  if (lr) mc.lr = *lr;
  mc.validate();

  const Corpus corpus = load_corpus(corpus_dir);
  const ExperimentReport report = run_experiment(corpus, k, mc, common.resolve_seed(cfg));
  const std::string text = report_to_json(report);
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);

  int failed = 0;
  for (const FoldResult& f : report.folds) failed += f.failed ? 1 : 0;
  std::cerr << "k=" << report.k << " rouge2 " << report.rouge2.mean << " +- "
            << report.rouge2.stddev << " (" << failed << " failed folds)\n";
}

void cmd_pipeline(const CommonOpts& common, const std::string& paper_path,
                  const std::string& filter_ckpt, const std::string& extract_ckpt,
                  const std::string& out_path, const std::string& report_path,
                  const std::string& orientation_flag, const std::string& authors_flag,
                  CLI::Option* authors_opt, const std::string& template_file) {
  const json cfg = common.config();
  std::vector<std::string> load_warnings;
  const Paper paper = load_paper(paper_path, &load_warnings);
  for (const std::string& w : load_warnings) std::cerr << "warning: " << w << "\n";

  require_checkpoint(filter_ckpt, "train-filter");
  require_checkpoint(extract_ckpt, "train-extract");
  const SectionFilterModel filter = SectionFilterModel::load(filter_ckpt);
  const ExtractionModel extractor = ExtractionModel::load(extract_ckpt);

  // Stage one: keep the poster-worthy sections.
  const std::vector<double> section_scores = filter.score_sections(paper);
  const std::vector<Section> kept = filter.filter_sections(paper);

  json report;
  report["format_version"] = 1;
  report["paper"] = paper.id;
  report["tex"] = out_path;
  report["sections_kept"] = json::array();
  std::map<std::string, double> score_by_id;
  for (std::size_t i = 0; i < paper.sections.size(); ++i)
    score_by_id[paper.sections[i].id] = section_scores[i];
  for (const Section& sec : kept) {
    json js;
    js["id"] = sec.id;
    js["title"] = sec.title;
    js["score"] = score_by_id.at(sec.id);
    report["sections_kept"].push_back(std::move(js));
  }

  // Stage two: panel drafts for every kept section.
  std::vector<std::pair<Section, PanelDraft>> panels;
  report["panels"] = json::array();
  for (const Section& sec : kept) {
    const ExtractionScores scores = extractor.forward(sec);
    const PanelDraft draft = select_panel_content(
        scores, sec, extractor.config().word_budget, extractor.config().graph_threshold);
    report["panels"].push_back(draft_to_json(sec, draft, scores));
    panels.emplace_back(sec, draft);
  }

  // Stage three: compose.
  const Orientation orientation = resolve_orientation(orientation_flag, cfg);
  const std::string authors = resolve_authors(authors_flag, authors_opt, cfg);
  const PosterSpec spec = make_poster_spec(paper, authors, orientation, panels);
  const Template tmpl = select_template(spec, resolve_templates(template_file, cfg));
  std::vector<std::string> warnings;
  const std::string tex = render_poster(spec, tmpl, &warnings);
  write_text_file(out_path, tex);

  report["orientation"] = to_string(orientation);
  report["template"] = tmpl.id;
  report["warnings"] = warnings;
  std::string rpath = report_path;
  if (rpath.empty()) {
    fs::path p(out_path);
    p.replace_extension(".report.json");
    rpath = p.string();
  }
  write_text_file(rpath, report.dump(2) + "\n");

  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << out_path << " and " << rpath << " (" << panels.size()
            << " panels, template " << tmpl.id << ")\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"postergen: automatic poster generation from structured paper records"};
  app.require_subcommand(1);

  // synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic corpus");
  auto* synth_common = add_common(synth);
  auto synth_out = std::make_shared<std::string>();
  auto synth_papers = std::make_shared<int>(20);
  auto syn_cfg = std::make_shared<SynthesisConfig>();
  synth->add_option("--out", *synth_out, "output corpus directory")->required();
  synth->add_option("--papers", *synth_papers, "number of papers (default 20)");
  synth->add_option("--min-sections", syn_cfg->min_sections);
  synth->add_option("--max-sections", syn_cfg->max_sections);
  synth->add_option("--min-sentences", syn_cfg->min_sentences);
  synth->add_option("--max-sentences", syn_cfg->max_sentences);
  synth->add_option("--max-graphs", syn_cfg->max_graphs);
  synth->callback([=]() { cmd_synth(*synth_common, *synth_out, *synth_papers, *syn_cfg); });

  // ingest ----------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "load a corpus and print a validation summary");
  auto ingest_dir = std::make_shared<std::string>();
  ingest->add_option("--corpus", *ingest_dir, "corpus directory")->required();
  ingest->callback([=]() { cmd_ingest(*ingest_dir); });

  // label -----------------------------------------------------------------
  auto* label = app.add_subcommand(
      "label", "derive oracle sentence labels for annotated sections (writes a new corpus)");
  auto label_dir = std::make_shared<std::string>();
  auto label_out = std::make_shared<std::string>();
  label->add_option("--corpus", *label_dir, "input corpus directory")->required();
  label->add_option("--out", *label_out, "output corpus directory (must differ)")->required();
  label->callback([=]() { cmd_label(*label_dir, *label_out); });

  // train-filter ------------------------------------------------------------
  auto* tf = app.add_subcommand("train-filter", "train the section filter");
  auto* tf_common = add_common(tf);
  auto tf_dir = std::make_shared<std::string>();
  auto tf_ckpt = std::make_shared<std::string>();
  auto tf_val = std::make_shared<double>(0.2);
  auto tf_epochs = std::make_shared<std::optional<int>>();
  auto tf_lr = std::make_shared<std::optional<double>>();
  tf->add_option("--corpus", *tf_dir, "annotated corpus directory")->required();
  tf->add_option("--checkpoint", *tf_ckpt, "checkpoint file to write")->required();
  tf->add_option("--val-fraction", *tf_val, "trailing fraction of papers held out (default 0.2)");
  tf->add_option("--epochs", *tf_epochs, "override max epochs");
  tf->add_option("--lr", *tf_lr, "override learning rate");
  tf->callback(
      [=]() { cmd_train_filter(*tf_common, *tf_dir, *tf_ckpt, *tf_val, *tf_epochs, *tf_lr); });

  // train-extract -------------------------------------------------------------
  auto* te = app.add_subcommand("train-extract", "train the joint extraction model");
  auto* te_common = add_common(te);
  auto te_dir = std::make_shared<std::string>();
  auto te_ckpt = std::make_shared<std::string>();
  auto te_val = std::make_shared<double>(0.2);
  auto te_epochs = std::make_shared<std::optional<int>>();
  auto te_lr = std::make_shared<std::optional<double>>();
  te->add_option("--corpus", *te_dir, "annotated corpus directory")->required();
  te->add_option("--checkpoint", *te_ckpt, "checkpoint file to write")->required();
  te->add_option("--val-fraction", *te_val, "trailing fraction of papers held out (default 0.2)");
  te->add_option("--epochs", *te_epochs, "override max epochs");
  te->add_option("--lr", *te_lr, "override learning rate");
  te->callback(
      [=]() { cmd_train_extract(*te_common, *te_dir, *te_ckpt, *te_val, *te_epochs, *te_lr); });

  // filter -------------------------------------------------------------------
  auto* fl = app.add_subcommand("filter", "score and filter the sections of one paper");
  auto fl_paper = std::make_shared<std::string>();
  auto fl_ckpt = std::make_shared<std::string>();
  auto fl_out = std::make_shared<std::string>();
  fl->add_option("--paper", *fl_paper, "paper file")->required();
  fl->add_option("--checkpoint", *fl_ckpt, "section filter checkpoint")->required();
  fl->add_option("--out", *fl_out, "output JSON (default stdout)");
  fl->callback([=]() { cmd_filter(*fl_paper, *fl_ckpt, *fl_out); });

  // extract -------------------------------------------------------------------
  auto* ex = app.add_subcommand("extract", "draft panel content for every section of a paper");
  auto ex_paper = std::make_shared<std::string>();
  auto ex_ckpt = std::make_shared<std::string>();
  auto ex_out = std::make_shared<std::string>();
  auto ex_budget = std::make_shared<std::optional<int>>();
  auto ex_threshold = std::make_shared<std::optional<double>>();
  ex->add_option("--paper", *ex_paper, "paper file")->required();
  ex->add_option("--checkpoint", *ex_ckpt, "extraction checkpoint")->required();
  ex->add_option("--out", *ex_out, "output drafts JSON (default stdout)");
  ex->add_option("--word-budget", *ex_budget, "override the checkpoint's word budget");
  ex->add_option("--graph-threshold", *ex_threshold, "override the graph threshold");
  ex->callback([=]() { cmd_extract(*ex_paper, *ex_ckpt, *ex_out, *ex_budget, *ex_threshold); });

  // compose ---------------------------------------------------------------------
  auto* co = app.add_subcommand("compose", "render panel drafts into a tikzposter document");
  auto* co_common = add_common(co);
  auto co_paper = std::make_shared<std::string>();
  auto co_drafts = std::make_shared<std::string>();
  auto co_out = std::make_shared<std::string>();
  auto co_orient = std::make_shared<std::string>();
  auto co_authors = std::make_shared<std::string>();
  auto co_templates = std::make_shared<std::string>();
  co->add_option("--paper", *co_paper, "paper file")->required();
  co->add_option("--drafts", *co_drafts, "drafts JSON from `extract`")->required();
  co->add_option("--out", *co_out, "output .tex path")->required();
  co->add_option("--orientation", *co_orient, "portrait or landscape");
  auto* co_authors_opt = co->add_option("--authors", *co_authors, "author line");
  co->add_option("--template-file", *co_templates, "template inventory JSON");
  co->callback([=]() {
    cmd_compose(*co_common, *co_paper, *co_drafts, *co_out, *co_orient, *co_authors,
                co_authors_opt, *co_templates);
  });

  // baseline -----------------------------------------------------------------
  auto* bl = app.add_subcommand("baseline", "run a non-neural baseline over a corpus");
  auto* bl_common = add_common(bl);
  auto bl_dir = std::make_shared<std::string>();
  auto bl_method = std::make_shared<std::string>();
  auto bl_out = std::make_shared<std::string>();
  auto bl_threshold = std::make_shared<double>(0.5);
  auto bl_fit = std::make_shared<bool>(false);
  bl->add_option("--corpus", *bl_dir, "annotated corpus directory")->required();
  bl->add_option("--method", *bl_method, "lead3, textrank or similarity")
      ->required()
      ->check(CLI::IsMember({"lead3", "textrank", "similarity"}));
  bl->add_option("--out", *bl_out, "report JSON (default stdout)");
  bl->add_option("--threshold", *bl_threshold, "similarity threshold (default 0.5)");
  bl->add_flag("--fit", *bl_fit, "fit the similarity threshold on the corpus");
  bl->callback(
      [=]() { cmd_baseline(*bl_common, *bl_dir, *bl_method, *bl_out, *bl_threshold, *bl_fit); });

  // evaluate -----------------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "k-fold cross-validated experiment");
  auto* ev_common = add_common(ev);
  auto ev_dir = std::make_shared<std::string>();
  auto ev_k = std::make_shared<int>(10);
  auto ev_out = std::make_shared<std::string>();
  auto ev_epochs = std::make_shared<std::optional<int>>();
  auto ev_lr = std::make_shared<std::optional<double>>();
  ev->add_option("--corpus", *ev_dir, "annotated corpus directory")->required();
  ev->add_option("--k", *ev_k, "fold count (default 10)");
  ev->add_option("--out", *ev_out, "report JSON (default stdout)");
  ev->add_option("--epochs", *ev_epochs, "override max epochs");
  ev->add_option("--lr", *ev_lr, "override learning rate");
  ev->callback(
      [=]() { cmd_evaluate(*ev_common, *ev_dir, *ev_k, *ev_out, *ev_epochs, *ev_lr); });

  // pipeline ------------------------------------------------------------------
  auto* pl = app.add_subcommand("pipeline", "filter, extract and compose in one run");
  auto* pl_common = add_common(pl);
  auto pl_paper = std::make_shared<std::string>();
  auto pl_fckpt = std::make_shared<std::string>();
  auto pl_eckpt = std::make_shared<std::string>();
  auto pl_out = std::make_shared<std::string>();
  auto pl_report = std::make_shared<std::string>();
  auto pl_orient = std::make_shared<std::string>();
  auto pl_authors = std::make_shared<std::string>();
  auto pl_templates = std::make_shared<std::string>();
  pl->add_option("--paper", *pl_paper, "paper file")->required();
  pl->add_option("--filter-checkpoint", *pl_fckpt, "section filter checkpoint")->required();
  pl->add_option("--extract-checkpoint", *pl_eckpt, "extraction checkpoint")->required();
  pl->add_option("--out", *pl_out, "output .tex path")->required();
  pl->add_option("--report", *pl_report, "stage report JSON (default <out>.report.json)");
  pl->add_option("--orientation", *pl_orient, "portrait or landscape");
  auto* pl_authors_opt = pl->add_option("--authors", *pl_authors, "author line");
  pl->add_option("--template-file", *pl_templates, "template inventory JSON");
  pl->callback([=]() {
    cmd_pipeline(*pl_common, *pl_paper, *pl_fckpt, *pl_eckpt, *pl_out, *pl_report, *pl_orient,
                 *pl_authors, pl_authors_opt, *pl_templates);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1; // spec: 1 = usage error
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 3;
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
