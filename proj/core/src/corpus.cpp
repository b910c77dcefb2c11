#include "postergen/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "postergen/util.hpp"

namespace postergen {

using nlohmann::json;

std::string to_string(GraphKind kind) {
  return kind == GraphKind::figure ? "figure" : "table";
}

GraphKind graph_kind_from_string(std::string_view s) {
  if (s == "figure") return GraphKind::figure;
  if (s == "table") return GraphKind::table;
  throw ValidationError("kind: expected \"figure\" or \"table\", got \"" + std::string(s) + "\"");
}

const GraphElement* Section::find_graph(std::string_view graph_id) const {
  for (const auto& g : graphs)
    if (g.id == graph_id) return &g;
  return nullptr;
}

std::vector<int> AlignedSample::graph_labels() const {
  std::vector<int> labels;
  labels.reserve(section.graphs.size());
  for (const auto& g : section.graphs)
    labels.push_back(panel_graph_ids.count(g.id) ? 1 : 0);
  return labels;
}

// ---------------------------------------------------------------------------
// Reference detection
// ---------------------------------------------------------------------------

namespace {

struct TextToken {
  std::string text;      // lowercased
  bool is_number = false;
  bool comma_before = false; // a ',' or '&' separated it from the previous token
};

std::vector<TextToken> scan_tokens(std::string_view text) {
  std::vector<TextToken> tokens;
  bool pending_comma = false;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = text[i];
    if (std::isalnum(c)) {
      TextToken tok;
      tok.comma_before = pending_comma;
      pending_comma = false;
      bool all_digits = true;
      while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) {
        unsigned char ch = text[i];
        if (!std::isdigit(ch)) all_digits = false;
        tok.text.push_back(static_cast<char>(std::tolower(ch)));
        ++i;
      }
      tok.is_number = all_digits;
      tokens.push_back(std::move(tok));
    } else {
      if (c == ',' || c == '&') pending_comma = true;
      ++i;
    }
  }
  return tokens;
}

bool kind_word(const std::string& w, GraphKind* kind) {
  if (w == "figure" || w == "figures" || w == "fig" || w == "figs") {
    *kind = GraphKind::figure;
    return true;
  }
  if (w == "table" || w == "tables" || w == "tab") {
    *kind = GraphKind::table;
    return true;
  }
  return false;
}

std::optional<int> parse_small_int(const std::string& digits) {
  if (digits.empty() || digits.size() > 6) return std::nullopt;
  int value = 0;
  for (char c : digits) value = value * 10 + (c - '0');
  return value;
}

} // namespace

std::set<std::string> detect_references(std::string_view sentence_text,
                                        const std::vector<GraphElement>& graphs,
                                        std::vector<ReferenceMention>* unresolved) {
  std::map<std::pair<int, int>, std::string> by_key;
  for (const auto& g : graphs)
    by_key[{static_cast<int>(g.kind), g.number}] = g.id;

  std::set<std::string> found;
  const auto tokens = scan_tokens(sentence_text);
  std::size_t i = 0;
  while (i < tokens.size()) {
    GraphKind kind;
    if (!tokens[i].is_number && kind_word(tokens[i].text, &kind)) {
      std::size_t j = i + 1;
      std::vector<int> numbers;
      if (j < tokens.size() && tokens[j].is_number) {
        if (auto v = parse_small_int(tokens[j].text)) numbers.push_back(*v);
        ++j;
        // conjunction tail: ", 3", "& 3", "and 3"
        while (j < tokens.size()) {
          if (tokens[j].is_number && tokens[j].comma_before) {
            if (auto v = parse_small_int(tokens[j].text)) numbers.push_back(*v);
            ++j;
          } else if (j + 1 < tokens.size() && tokens[j].text == "and" &&
                     tokens[j + 1].is_number) {
            if (auto v = parse_small_int(tokens[j + 1].text)) numbers.push_back(*v);
            j += 2;
          } else {
            break;
          }
        }
      }
      for (int number : numbers) {
        auto it = by_key.find({static_cast<int>(kind), number});
        if (it != by_key.end()) {
          found.insert(it->second);
        } else if (unresolved) {
          unresolved->push_back({kind, number});
        }
      }
      i = numbers.empty() ? i + 1 : j;
    } else {
      ++i;
    }
  }
  return found;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

// Caption must begin with the kind word followed by the printed number.
bool caption_has_prefix(const GraphElement& g) {
  const auto tokens = scan_tokens(g.caption);
  if (tokens.size() < 2) return false;
  GraphKind kind;
  if (tokens[0].is_number || !kind_word(tokens[0].text, &kind)) return false;
  if (kind != g.kind) return false;
  if (!tokens[1].is_number) return false;
  auto v = parse_small_int(tokens[1].text);
  return v && *v == g.number;
}

} // namespace

void validate_paper(const Paper& paper) {
  if (paper.id.empty()) throw ValidationError("paper.id: must be non-empty");
  if (paper.sections.empty())
    throw ValidationError("paper \"" + paper.id + "\": sections: at least one section required");

  std::set<std::string> section_ids;
  std::set<std::pair<int, int>> graph_keys;
  std::set<std::string> graph_ids;
  for (std::size_t si = 0; si < paper.sections.size(); ++si) {
    const Section& sec = paper.sections[si];
    const std::string where = "sections[" + std::to_string(si) + "]";
    if (sec.id.empty()) throw ValidationError(where + ".id: must be non-empty");
    if (!section_ids.insert(sec.id).second)
      throw ValidationError(where + ".id: duplicate section id \"" + sec.id + "\"");
    if (sec.sentences.empty())
      throw ValidationError(where + ".sentences: at least one sentence required");

    std::set<std::string> local_graph_ids;
    for (std::size_t gi = 0; gi < sec.graphs.size(); ++gi) {
      const GraphElement& g = sec.graphs[gi];
      const std::string gwhere = where + ".graphs[" + std::to_string(gi) + "]";
      if (g.id.empty()) throw ValidationError(gwhere + ".id: must be non-empty");
      if (!graph_ids.insert(g.id).second)
        throw ValidationError(gwhere + ".id: duplicate graph id \"" + g.id + "\"");
      if (g.number <= 0)
        throw ValidationError(gwhere + ".number: must be a positive integer");
      if (g.caption.empty() || blank(g.caption))
        throw ValidationError(gwhere + ".caption: must be non-empty");
      if (!caption_has_prefix(g))
        throw ValidationError(gwhere + ".caption: must begin with \"" +
                              (g.kind == GraphKind::figure ? "Figure" : "Table") + " " +
                              std::to_string(g.number) + "\", got \"" + g.caption + "\"");
      if (!graph_keys.insert({static_cast<int>(g.kind), g.number}).second)
        throw ValidationError(gwhere + ": duplicate (kind, number) pair (" +
                              to_string(g.kind) + ", " + std::to_string(g.number) + ")");
      local_graph_ids.insert(g.id);
    }

    for (std::size_t ti = 0; ti < sec.sentences.size(); ++ti) {
      const Sentence& s = sec.sentences[ti];
      const std::string swhere = where + ".sentences[" + std::to_string(ti) + "]";
      if (s.text.empty() || blank(s.text))
        throw ValidationError(swhere + ".text: must be non-empty after trimming");
      if (s.index != static_cast<int>(ti))
        throw ValidationError(swhere + ".index: must be contiguous, expected " +
                              std::to_string(ti) + ", got " + std::to_string(s.index));
      for (const auto& r : s.refs)
        if (!local_graph_ids.count(r))
          throw ValidationError(swhere + ".refs: \"" + r +
                                "\" is not a graph of section \"" + sec.id + "\"");
    }
  }
}

void resolve_references(Paper& paper, std::vector<std::string>* warnings) {
  for (auto& sec : paper.sections) {
    for (auto& sentence : sec.sentences) {
      std::vector<ReferenceMention> unresolved;
      sentence.refs = detect_references(sentence.text, sec.graphs, &unresolved);
      if (warnings) {
        for (const auto& m : unresolved) {
          warnings->push_back("paper \"" + paper.id + "\" section \"" + sec.id +
                              "\" sentence " + std::to_string(sentence.index) +
                              ": dropped reference to " + to_string(m.kind) + " " +
                              std::to_string(m.number) + " (no such graph in this section)");
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// JSON I/O
// ---------------------------------------------------------------------------

namespace {

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string() + ": cannot open file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
  return j;
}

void write_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw LoadError(path.string() + ": cannot open file for writing");
  out << j.dump(2) << "\n";
}

const json& get_field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw LoadError(where + "." + key + ": missing field");
  return *it;
}

std::string get_string(const json& j, const char* key, const std::string& where) {
  const json& f = get_field(j, key, where);
  if (!f.is_string()) throw LoadError(where + "." + key + ": expected string");
  return f.get<std::string>();
}

int get_int(const json& j, const char* key, const std::string& where) {
  const json& f = get_field(j, key, where);
  if (!f.is_number_integer())
    throw LoadError(where + "." + key + ": expected integer");
  return f.get<int>();
}

} // namespace

Paper load_paper(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  const json j = parse_file(path);
  Paper paper;
  paper.id = get_string(j, "id", "paper");
  paper.title = get_string(j, "title", "paper");
  const json& sections = get_field(j, "sections", "paper");
  if (!sections.is_array()) throw LoadError("paper.sections: expected array");

  for (std::size_t si = 0; si < sections.size(); ++si) {
    const std::string where = "sections[" + std::to_string(si) + "]";
    const json& js = sections[si];
    Section sec;
    sec.id = get_string(js, "id", where);
    sec.title = get_string(js, "title", where);
    const json& sents = get_field(js, "sentences", where);
    if (!sents.is_array()) throw LoadError(where + ".sentences: expected array");
    for (std::size_t ti = 0; ti < sents.size(); ++ti) {
      if (!sents[ti].is_string())
        throw LoadError(where + ".sentences[" + std::to_string(ti) + "]: expected string");
      Sentence s;
      s.index = static_cast<int>(ti);
      s.text = sents[ti].get<std::string>();
      sec.sentences.push_back(std::move(s));
    }
    if (js.contains("graphs")) {
      const json& graphs = js["graphs"];
      if (!graphs.is_array()) throw LoadError(where + ".graphs: expected array");
      for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const std::string gwhere = where + ".graphs[" + std::to_string(gi) + "]";
        const json& jg = graphs[gi];
        GraphElement g;
        g.id = get_string(jg, "id", gwhere);
        g.kind = graph_kind_from_string(get_string(jg, "kind", gwhere));
        g.number = get_int(jg, "number", gwhere);
        g.caption = get_string(jg, "caption", gwhere);
        if (jg.contains("image")) g.image_path = jg["image"].get<std::string>();
        sec.graphs.push_back(std::move(g));
      }
    }
    paper.sections.push_back(std::move(sec));
  }

  resolve_references(paper, warnings);
  validate_paper(paper);
  return paper;
}

void save_paper(const Paper& paper, const std::filesystem::path& path) {
  json j;
  j["id"] = paper.id;
  j["title"] = paper.title;
  j["sections"] = json::array();
  for (const auto& sec : paper.sections) {
    json js;
    js["id"] = sec.id;
    js["title"] = sec.title;
    js["sentences"] = json::array();
    for (const auto& s : sec.sentences) js["sentences"].push_back(s.text);
    js["graphs"] = json::array();
    for (const auto& g : sec.graphs) {
      json jg;
      jg["id"] = g.id;
      jg["kind"] = to_string(g.kind);
      jg["number"] = g.number;
      jg["caption"] = g.caption;
      if (!g.image_path.empty()) jg["image"] = g.image_path;
      js["graphs"].push_back(std::move(jg));
    }
    j["sections"].push_back(std::move(js));
  }
  write_file(j, path);
}

PaperAnnotations load_annotations(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (!j.is_object()) throw LoadError(path.string() + ": expected an object keyed by section id");
  PaperAnnotations out;
  for (const auto& [section_id, jv] : j.items()) {
    PanelAnnotation a;
    const std::string where = "annotations[\"" + section_id + "\"]";
    if (jv.contains("important")) {
      if (!jv["important"].is_boolean()) throw LoadError(where + ".important: expected boolean");
      a.important = jv["important"].get<bool>();
    }
    if (jv.contains("panel_text")) a.panel_text = jv["panel_text"].get<std::string>();
    if (jv.contains("panel_graph_ids"))
      for (const auto& id : jv["panel_graph_ids"]) a.panel_graph_ids.insert(id.get<std::string>());
    if (jv.contains("sentence_labels")) {
      std::vector<int> labels;
      for (const auto& v : jv["sentence_labels"]) labels.push_back(v.get<int>());
      a.sentence_labels = std::move(labels);
    }
    out[section_id] = std::move(a);
  }
  return out;
}

void save_annotations(const PaperAnnotations& annotations, const std::filesystem::path& path) {
  json j = json::object();
  for (const auto& [section_id, a] : annotations) {
    json ja;
    ja["important"] = a.important;
    ja["panel_text"] = a.panel_text;
    ja["panel_graph_ids"] = json::array();
    for (const auto& id : a.panel_graph_ids) ja["panel_graph_ids"].push_back(id);
    if (a.sentence_labels) ja["sentence_labels"] = *a.sentence_labels;
    j[section_id] = std::move(ja);
  }
  write_file(j, path);
}

std::filesystem::path annotations_path_for(const std::filesystem::path& paper_path) {
  std::filesystem::path p = paper_path;
  p.replace_extension("");
  p += ".annotations.json";
  return p;
}

void apply_annotations(Paper& paper, const PaperAnnotations& annotations) {
  for (auto& sec : paper.sections) {
    auto it = annotations.find(sec.id);
    if (it == annotations.end()) continue;
    const PanelAnnotation& a = it->second;
    sec.gold_important = a.important ? 1 : 0;
    for (auto& g : sec.graphs) g.gold_label = a.panel_graph_ids.count(g.id) ? 1 : 0;
    if (a.sentence_labels && a.sentence_labels->size() == sec.sentences.size())
      for (std::size_t i = 0; i < sec.sentences.size(); ++i)
        sec.sentences[i].gold_label = (*a.sentence_labels)[i];
  }
}

std::vector<int> importance_labels(const Paper& paper, const PaperAnnotations& annotations) {
  std::vector<int> labels;
  labels.reserve(paper.sections.size());
  for (const auto& sec : paper.sections) {
    auto it = annotations.find(sec.id);
    labels.push_back(it != annotations.end() && it->second.important ? 1 : 0);
  }
  return labels;
}

std::vector<AlignedSample> make_samples(const Paper& paper, const PaperAnnotations& annotations) {
  std::vector<AlignedSample> samples;
  for (const auto& sec : paper.sections) {
    auto it = annotations.find(sec.id);
    if (it == annotations.end()) continue;
    const PanelAnnotation& a = it->second;
    if (!a.important || a.panel_text.empty()) continue;

    AlignedSample sample;
    sample.paper_id = paper.id;
    sample.section = sec;
    sample.section.gold_important = 1;
    sample.panel_text = a.panel_text;
    for (const auto& gid : a.panel_graph_ids) {
      if (!sec.find_graph(gid))
        throw ValidationError("annotations[\"" + sec.id + "\"].panel_graph_ids: \"" + gid +
                              "\" is not a graph of this section");
      sample.panel_graph_ids.insert(gid);
    }
    for (auto& g : sample.section.graphs)
      g.gold_label = sample.panel_graph_ids.count(g.id) ? 1 : 0;
    if (a.sentence_labels) {
      if (a.sentence_labels->size() != sec.sentences.size())
        throw ValidationError("annotations[\"" + sec.id + "\"].sentence_labels: length " +
                              std::to_string(a.sentence_labels->size()) + " != sentence count " +
                              std::to_string(sec.sentences.size()));
      sample.derived_sentence_labels = *a.sentence_labels;
      for (std::size_t i = 0; i < sec.sentences.size(); ++i)
        sample.section.sentences[i].gold_label = (*a.sentence_labels)[i];
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

// ---------------------------------------------------------------------------
// Folds
// ---------------------------------------------------------------------------

FoldAssignment split_kfold(const std::vector<std::string>& paper_ids, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("split_kfold: k must be >= 2");
  if (static_cast<int>(paper_ids.size()) < k)
    throw std::invalid_argument("split_kfold: fewer papers (" + std::to_string(paper_ids.size()) +
                                ") than folds (" + std::to_string(k) + ")");
  std::mt19937_64 rng(seed);
  const auto order = shuffled_indices(static_cast<int>(paper_ids.size()), rng);
  FoldAssignment folds;
  for (std::size_t i = 0; i < order.size(); ++i)
    folds[paper_ids[order[i]]] = static_cast<int>(i) % k;
  return folds;
}

FoldAssignment split_kfold(const std::vector<Paper>& papers, int k, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(papers.size());
  for (const auto& p : papers) ids.push_back(p.id);
  return split_kfold(ids, k, seed);
}

FoldAssignment load_folds(const std::filesystem::path& path) {
  const json j = parse_file(path);
  FoldAssignment folds;
  for (const auto& [id, fold] : j.items()) folds[id] = fold.get<int>();
  return folds;
}

void save_folds(const FoldAssignment& folds, const std::filesystem::path& path) {
  json j = json::object();
  for (const auto& [id, fold] : folds) j[id] = fold;
  write_file(j, path);
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

namespace {

// Body vocabulary; deliberately excludes the graph kind words and the two
// reserved tokens below so references and planted signals stay unambiguous.
const std::vector<std::string> kSharedPool = {
    "model",    "data",     "training",  "results",   "method",   "analysis",
    "accuracy", "baseline", "encoder",   "network",   "layer",    "loss",
    "gradient", "score",    "token",     "corpus",    "sample",   "metric",
    "feature",  "vector",   "attention", "label",     "panel",    "section",
    "sentence", "caption",  "alignment", "benchmark", "variance", "precision",
    "recall",   "epoch",    "batch",     "weight",    "output",   "input",
    "signal",   "pattern",  "cluster",   "margin"};

const std::string kMarkerToken = "crucially"; // tags planted panel sentences
const std::string kSignalToken = "novel";     // body-importance signal

const std::vector<std::string> kMiddleTitles = {
    "Method",      "Approach", "Experiments", "Results",    "Analysis",
    "Discussion",  "Related Work", "Background", "Evaluation", "Ablation Study"};

std::string unique_token(std::uint64_t& counter) {
  const std::string& base = kSharedPool[counter % kSharedPool.size()];
  return base + std::to_string(100 + counter++);
}

} // namespace

std::vector<SynthesizedPaper> synthesize_corpus(std::uint64_t seed, int n_papers,
                                                const SynthesisConfig& cfg) {
  if (n_papers < 1) throw std::invalid_argument("synthesize_corpus: n_papers must be >= 1");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uint64_t token_counter = 0;

  std::vector<SynthesizedPaper> corpus;
  corpus.reserve(n_papers);

  for (int pi = 0; pi < n_papers; ++pi) {
    SynthesizedPaper entry;
    Paper& paper = entry.paper;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "p%04d", pi);
    paper.id = idbuf;
    paper.title = "Synthetic Study " + std::to_string(pi);

    const int n_sections = uniform_int(rng, cfg.min_sections, cfg.max_sections);
    int figure_counter = 0;
    int table_counter = 0;

    for (int si = 0; si < n_sections; ++si) {
      Section sec;
      sec.id = paper.id + "_s" + std::to_string(si);
      // The last section deliberately shares the generic title pool: whether a
      // section is final is then only visible from paper context, which keeps
      // the three filter configurations (full / no-context / title-only)
      // separable on this corpus.
      if (si == 0)
        sec.title = "Introduction";
      else
        sec.title = kMiddleTitles[uniform_int(rng, 0, static_cast<int>(kMiddleTitles.size()) - 1)];

      const int n_sentences = uniform_int(rng, cfg.min_sentences, cfg.max_sentences);

      // Planted panel sentences for every section; the panel is only written
      // out when the section is important.
      const int n_pos = uniform_int(rng, 1, std::min(3, n_sentences));
      std::set<int> positives;
      while (static_cast<int>(positives.size()) < n_pos)
        positives.insert(uniform_int(rng, 0, n_sentences - 1));

      std::vector<std::vector<std::string>> sentence_tokens(n_sentences);
      for (int ti = 0; ti < n_sentences; ++ti) {
        const int len = uniform_int(rng, cfg.min_sentence_words, cfg.max_sentence_words);
        auto& toks = sentence_tokens[ti];
        for (int w = 0; w < len; ++w) {
          if (uniform_real(rng) < cfg.vocab_overlap)
            toks.push_back(kSharedPool[uniform_int(rng, 0, static_cast<int>(kSharedPool.size()) - 1)]);
          else
            toks.push_back(unique_token(token_counter));
        }
        const bool is_pos = positives.count(ti) > 0;
        const double r = uniform_real(rng);
        if ((is_pos && r < cfg.marker_rate) || (!is_pos && r < cfg.marker_noise))
          toks.insert(toks.begin() + uniform_int(rng, 0, static_cast<int>(toks.size())), kMarkerToken);
      }

      // Body-importance signal: scatter `signal_count` copies of the signal
      // token across the first three sentences so a truncated encoder input
      // still sees them.
      const int signal_count = uniform_int(rng, 0, 3);
      for (int c = 0; c < signal_count; ++c) {
        auto& toks = sentence_tokens[uniform_int(rng, 0, std::min(2, n_sentences - 1))];
        toks.insert(toks.begin() + uniform_int(rng, 0, static_cast<int>(toks.size())), kSignalToken);
      }

      // Importance rule: the introduction is always aligned, the final
      // section never is, middle sections need at least two signal tokens.
      const bool important =
          si == 0 || (si != n_sections - 1 && signal_count >= 2);

      // Graphs, each referenced by an all-positive or all-negative sentence
      // set so panel graph membership follows from the referrers.
      const int n_graphs = uniform_int(rng, 0, cfg.max_graphs);
      std::set<std::string> positive_graph_ids;
      std::vector<int> negatives;
      for (int ti = 0; ti < n_sentences; ++ti)
        if (!positives.count(ti)) negatives.push_back(ti);

      for (int gi = 0; gi < n_graphs; ++gi) {
        GraphElement g;
        g.kind = uniform_int(rng, 0, 1) == 0 ? GraphKind::figure : GraphKind::table;
        g.number = g.kind == GraphKind::figure ? ++figure_counter : ++table_counter;
        g.id = paper.id + "_s" + std::to_string(si) + "_g" + std::to_string(gi);

        const bool graph_positive = uniform_real(rng) < 0.55;
        std::vector<int> pool(graph_positive ? std::vector<int>(positives.begin(), positives.end())
                                             : negatives);
        std::vector<int> referrers;
        if (!pool.empty() && !(!graph_positive && uniform_real(rng) < 0.25)) {
          const int t = uniform_int(rng, 1, std::min(3, static_cast<int>(pool.size())));
          auto order = shuffled_indices(static_cast<int>(pool.size()), rng);
          for (int r = 0; r < t; ++r) referrers.push_back(pool[order[r]]);
          std::sort(referrers.begin(), referrers.end());
        }

        for (int ref : referrers) {
          sentence_tokens[ref].push_back(to_string(g.kind));
          sentence_tokens[ref].push_back(std::to_string(g.number));
        }

        std::string caption = (g.kind == GraphKind::figure ? "Figure " : "Table ") +
                              std::to_string(g.number) + ":";
        if (!referrers.empty()) {
          const auto& src = sentence_tokens[referrers.front()];
          const int n_echo = std::min<int>(3, static_cast<int>(src.size()));
          for (int e = 0; e < n_echo; ++e) caption += " " + src[e];
        }
        const int extra = uniform_int(rng, 2, 4);
        for (int e = 0; e < extra; ++e) caption += " " + unique_token(token_counter);
        g.caption = caption;

        if (graph_positive && !referrers.empty()) positive_graph_ids.insert(g.id);
        g.gold_label = (important && graph_positive && !referrers.empty()) ? 1 : 0;
        sec.graphs.push_back(std::move(g));
      }

      std::vector<int> labels(n_sentences, 0);
      std::vector<std::string> panel_parts;
      for (int ti = 0; ti < n_sentences; ++ti) {
        Sentence s;
        s.index = ti;
        s.text = join(sentence_tokens[ti], " ") + ".";
        if (positives.count(ti)) {
          labels[ti] = 1;
          panel_parts.push_back(join(sentence_tokens[ti], " ") + ".");
        }
        sec.sentences.push_back(std::move(s));
      }
      sec.gold_important = important ? 1 : 0;

      PanelAnnotation ann;
      ann.important = important;
      if (important) {
        ann.panel_text = join(panel_parts, " ");
        ann.panel_graph_ids = positive_graph_ids;
        ann.sentence_labels = labels;
        for (int ti = 0; ti < n_sentences; ++ti)
          sec.sentences[ti].gold_label = labels[ti];
      }
      entry.annotations[sec.id] = std::move(ann);
      paper.sections.push_back(std::move(sec));
    }

    resolve_references(paper);
    validate_paper(paper);
    corpus.push_back(std::move(entry));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& dir, std::vector<std::string>* warnings) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw LoadError(dir.string() + ": not a directory");
  std::vector<fs::path> paper_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto& p = entry.path();
    if (p.extension() != ".json") continue;
    if (p.filename().string().ends_with(".annotations.json")) continue;
    paper_files.push_back(p);
  }
  std::sort(paper_files.begin(), paper_files.end());

  Corpus corpus;
  for (const auto& p : paper_files) {
    Paper paper = load_paper(p, warnings);
    PaperAnnotations annotations;
    const auto ann_path = annotations_path_for(p);
    if (fs::exists(ann_path)) annotations = load_annotations(ann_path);
    apply_annotations(paper, annotations);
    corpus.emplace_back(std::move(paper), std::move(annotations));
  }
  std::sort(corpus.begin(), corpus.end(),
            [](const auto& a, const auto& b) { return a.first.id < b.first.id; });
  return corpus;
}

void save_corpus(const std::vector<SynthesizedPaper>& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& entry : corpus) {
    save_paper(entry.paper, dir / (entry.paper.id + ".json"));
    save_annotations(entry.annotations, dir / (entry.paper.id + ".annotations.json"));
  }
}

} // namespace postergen
