#pragma once

// Pipeline step three: pick a layout template for the chosen orientation and
// panel count, then render the panels into a tikzposter LaTeX document.

#include "postergen/corpus.hpp"
#include "postergen/extraction.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace postergen {

enum class Orientation { portrait, landscape };

std::string to_string(Orientation o);
Orientation orientation_from_string(std::string_view s);

struct TemplateSlot {
  int row = 0;
  int column = 0;
  double width = 1.0;  // fraction of the page width within its row
  double height = 1.0; // relative height hint
  int max_words = 80;  // capacity hint, overflow warns but never truncates
  int max_graphs = 2;
};

struct Template {
  std::string id;
  Orientation orientation = Orientation::portrait;
  std::vector<TemplateSlot> slots;

  int slot_count() const { return static_cast<int>(slots.size()); }
  void validate() const; // throws ValidationError
};

struct PanelGraph {
  std::string id;
  std::string caption;
  std::string image_path; // empty -> labeled placeholder box
};

struct Panel {
  std::string section_title;
  std::vector<std::string> sentences;
  std::vector<PanelGraph> graphs;
};

struct PosterSpec {
  std::string title;
  std::string authors;
  Orientation orientation = Orientation::portrait;
  std::vector<Panel> panels; // section order
};

/// The six shipped layouts: portrait 4/6/8 slots, landscape 4/6/9 slots.
std::vector<Template> builtin_templates();

std::vector<Template> load_templates(const std::filesystem::path& path);
void save_templates(const std::vector<Template>& templates,
                    const std::filesystem::path& path);

/// Among templates of the requested orientation: prefer slot_count >=
/// panel_count, then minimal |slot_count - panel_count|, then the largest
/// word-capacity surplus, then inventory order. Throws ValidationError when
/// the orientation has no template at all.
Template select_template(const PosterSpec& spec, const std::vector<Template>& inventory);

std::string latex_escape(std::string_view text);

/// Complete tikzposter document; every selected sentence becomes a bullet
/// item and every graph an \includegraphics (or placeholder box) plus its
/// caption. Capacity overruns are reported through `warnings`, never cut.
std::string render_poster(const PosterSpec& spec, const Template& tmpl,
                          std::vector<std::string>* warnings = nullptr);

/// Assembles the spec from filtered sections and their extraction drafts,
/// preserving section order.
PosterSpec make_poster_spec(const Paper& paper, const std::string& authors,
                            Orientation orientation,
                            const std::vector<std::pair<Section, PanelDraft>>& panels);

} // namespace postergen
