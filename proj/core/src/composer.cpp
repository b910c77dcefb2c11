#include "postergen/composer.hpp"

#include "postergen/errors.hpp"
#include "postergen/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace postergen {

std::string to_string(Orientation o) {
  return o == Orientation::portrait ? "portrait" : "landscape";
}

Orientation orientation_from_string(std::string_view s) {
  if (s == "portrait") return Orientation::portrait;
  if (s == "landscape") return Orientation::landscape;
  throw ValidationError("unknown orientation: " + std::string(s));
}

void Template::validate() const {
  if (id.empty()) throw ValidationError("template: empty id");
  if (slots.empty()) throw ValidationError("template " + id + ": needs at least one slot");
  std::map<int, double> row_width;
  std::map<std::pair<int, int>, int> seen;
  for (const TemplateSlot& s : slots) {
    if (s.width <= 0.0 || s.width > 1.0)
      throw ValidationError("template " + id + ": slot width must lie in (0, 1]");
    if (s.height <= 0.0) throw ValidationError("template " + id + ": slot height must be positive");
    if (s.max_words < 1 || s.max_graphs < 0)
      throw ValidationError("template " + id + ": bad capacity hints");
    if (++seen[{s.row, s.column}] > 1)
      throw ValidationError("template " + id + ": overlapping slots at row " +
                            std::to_string(s.row) + ", column " + std::to_string(s.column));
    row_width[s.row] += s.width;
  }
  for (const auto& [row, total] : row_width)
    if (total > 1.0 + 1e-9)
      throw ValidationError("template " + id + ": row " + std::to_string(row) +
                            " wider than the page");
}

namespace {

Template grid_template(const std::string& id, Orientation orientation, int rows, int cols,
                       int max_words, int max_graphs) {
  Template t;
  t.id = id;
  t.orientation = orientation;
  const double width = 1.0 / cols;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      TemplateSlot s;
      s.row = r;
      s.column = c;
      s.width = width;
      s.height = 1.0 / rows;
      s.max_words = max_words;
      s.max_graphs = max_graphs;
      t.slots.push_back(s);
    }
  return t;
}

} // namespace

std::vector<Template> builtin_templates() {
  std::vector<Template> inv;
  inv.push_back(grid_template("portrait-4", Orientation::portrait, 2, 2, 110, 2));
  inv.push_back(grid_template("portrait-6", Orientation::portrait, 3, 2, 80, 2));
  inv.push_back(grid_template("portrait-8", Orientation::portrait, 4, 2, 60, 1));
  inv.push_back(grid_template("landscape-4", Orientation::landscape, 2, 2, 110, 2));
  inv.push_back(grid_template("landscape-6", Orientation::landscape, 2, 3, 80, 2));
  inv.push_back(grid_template("landscape-9", Orientation::landscape, 3, 3, 55, 1));
  for (const Template& t : inv) t.validate();
  return inv;
}

std::vector<Template> load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot read template file: " + path.string());
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("template file " + path.string() + ": " + e.what());
  }
  if (!root.is_array()) throw LoadError("template file " + path.string() + ": expected an array");
  std::vector<Template> out;
  for (const nlohmann::json& jt : root) {
    Template t;
    t.id = jt.at("id").get<std::string>();
    t.orientation = orientation_from_string(jt.at("orientation").get<std::string>());
    for (const nlohmann::json& js : jt.at("slots")) {
      TemplateSlot s;
      s.row = js.at("row").get<int>();
      s.column = js.at("column").get<int>();
      s.width = js.at("width").get<double>();
      s.height = js.value("height", 1.0);
      s.max_words = js.value("max_words", 80);
      s.max_graphs = js.value("max_graphs", 2);
      t.slots.push_back(s);
    }
    t.validate();
    out.push_back(std::move(t));
  }
  return out;
}

void save_templates(const std::vector<Template>& templates,
                    const std::filesystem::path& path) {
  nlohmann::json root = nlohmann::json::array();
  for (const Template& t : templates) {
    nlohmann::json jt;
    jt["id"] = t.id;
    jt["orientation"] = to_string(t.orientation);
    nlohmann::json slots = nlohmann::json::array();
    for (const TemplateSlot& s : t.slots) {
      nlohmann::json js;
      js["row"] = s.row;
      js["column"] = s.column;
      js["width"] = s.width;
      js["height"] = s.height;
      js["max_words"] = s.max_words;
      js["max_graphs"] = s.max_graphs;
      slots.push_back(std::move(js));
    }
    jt["slots"] = std::move(slots);
    root.push_back(std::move(jt));
  }
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write template file: " + path.string());
  out << root.dump(2) << "\n";
}

Template select_template(const PosterSpec& spec, const std::vector<Template>& inventory) {
  const int panels = static_cast<int>(spec.panels.size());
  const Template* best = nullptr;
  // key: (infeasible, |slots - panels|, -surplus); lower is better, inventory
  // order breaks remaining ties.
  std::tuple<int, int, double> best_key{};
  for (const Template& t : inventory) {
    if (t.orientation != spec.orientation) continue;
    double surplus = 0.0;
    for (const TemplateSlot& s : t.slots) surplus += s.max_words;
    const std::tuple<int, int, double> key{t.slot_count() >= panels ? 0 : 1,
                                           std::abs(t.slot_count() - panels), -surplus};
    if (best == nullptr || key < best_key) {
      best = &t;
      best_key = key;
    }
  }
  if (best == nullptr)
    throw ValidationError("no template with orientation " + to_string(spec.orientation));
  return *best;
}

std::string latex_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\textbackslash{}"; break;
      case '&': out += "\\&"; break;
      case '%': out += "\\%"; break;
      case '$': out += "\\$"; break;
      case '#': out += "\\#"; break;
      case '_': out += "\\_"; break;
      case '{': out += "\\{"; break;
      case '}': out += "\\}"; break;
      case '~': out += "\\textasciitilde{}"; break;
      case '^': out += "\\textasciicircum{}"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string render_poster(const PosterSpec& spec, const Template& tmpl,
                          std::vector<std::string>* warnings) {
  tmpl.validate();
  if (spec.panels.empty()) throw ValidationError("poster spec: needs at least one panel");
  if (tmpl.slot_count() < static_cast<int>(spec.panels.size()))
    throw ValidationError("template " + tmpl.id + ": fewer slots than panels");
  if (tmpl.orientation != spec.orientation)
    throw ValidationError("template " + tmpl.id + ": orientation mismatch");

  // Slots in reading order; panels fill them front to back.
  std::vector<TemplateSlot> slots = tmpl.slots;
  std::stable_sort(slots.begin(), slots.end(), [](const TemplateSlot& a, const TemplateSlot& b) {
    return a.row != b.row ? a.row < b.row : a.column < b.column;
  });

  std::ostringstream doc;
  doc << "\\documentclass[25pt, a0paper, " << to_string(spec.orientation)
      << "]{tikzposter}\n";
  doc << "\\usepackage{graphicx}\n";
  doc << "\\title{" << latex_escape(spec.title) << "}\n";
  doc << "\\author{" << latex_escape(spec.authors) << "}\n";
  doc << "\\begin{document}\n";
  doc << "\\maketitle\n";

  std::size_t panel_idx = 0;
  std::size_t slot_idx = 0;
  while (slot_idx < slots.size() && panel_idx < spec.panels.size()) {
    const int row = slots[slot_idx].row;
    // Gather this row's slots.
    std::size_t row_end = slot_idx;
    while (row_end < slots.size() && slots[row_end].row == row) ++row_end;
    doc << "\\begin{columns}\n";
    for (std::size_t si = slot_idx; si < row_end; ++si) {
      doc << "\\column{" << slots[si].width << "}\n";
      if (panel_idx >= spec.panels.size()) continue; // trailing slots stay empty
      const Panel& panel = spec.panels[panel_idx];
      const TemplateSlot& slot = slots[si];

      if (warnings != nullptr) {
        int words = 0;
        for (const std::string& s : panel.sentences) words += count_words(s);
        if (words > slot.max_words)
          warnings->push_back("panel " + std::to_string(panel_idx) + " (" +
                              panel.section_title + "): " + std::to_string(words) +
                              " words exceed the slot capacity of " +
                              std::to_string(slot.max_words));
        if (static_cast<int>(panel.graphs.size()) > slot.max_graphs)
          warnings->push_back("panel " + std::to_string(panel_idx) + " (" +
                              panel.section_title + "): " +
                              std::to_string(panel.graphs.size()) +
                              " graphs exceed the slot capacity of " +
                              std::to_string(slot.max_graphs));
      }

      doc << "\\block{" << latex_escape(panel.section_title) << "}{%\n";
      if (!panel.sentences.empty()) {
        doc << "\\begin{itemize}\n";
        for (const std::string& s : panel.sentences)
          doc << "\\item " << latex_escape(s) << "\n";
        doc << "\\end{itemize}\n";
      }
      for (const PanelGraph& g : panel.graphs) {
        doc << "\\begin{center}\n";
        if (!g.image_path.empty()) {
          doc << "\\includegraphics[width=0.85\\linewidth]{" << g.image_path << "}\\\\\n";
        } else {
          doc << "\\fbox{\\parbox{0.8\\linewidth}{\\centering missing image: "
              << latex_escape(g.id) << "}}\\\\\n";
        }
        doc << "{\\small " << latex_escape(g.caption) << "}\n";
        doc << "\\end{center}\n";
      }
      doc << "}\n";
      ++panel_idx;
    }
    doc << "\\end{columns}\n";
    slot_idx = row_end;
  }

  doc << "\\end{document}\n";
  return doc.str();
}

PosterSpec make_poster_spec(const Paper& paper, const std::string& authors,
                            Orientation orientation,
                            const std::vector<std::pair<Section, PanelDraft>>& panels) {
  PosterSpec spec;
  spec.title = paper.title;
  spec.authors = authors;
  spec.orientation = orientation;
  for (const auto& [section, draft] : panels) {
    Panel panel;
    panel.section_title = section.title;
    for (int idx : draft.sentence_indices)
      panel.sentences.push_back(section.sentences.at(static_cast<std::size_t>(idx)).text);
    for (const std::string& gid : draft.graph_ids) {
      const GraphElement* g = section.find_graph(gid);
      if (g == nullptr)
        throw ValidationError("poster spec: graph " + gid + " not in section " + section.id);
      PanelGraph pg;
      pg.id = g->id;
      pg.caption = g->caption;
      pg.image_path = g->image_path;
      panel.graphs.push_back(std::move(pg));
    }
    spec.panels.push_back(std::move(panel));
  }
  return spec;
}

} // namespace postergen
