#include "doctest.h"

#include "postergen/composer.hpp"
#include "postergen/errors.hpp"
#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace postergen;
namespace fs = std::filesystem;

namespace {

int count_occurrences(const std::string& haystack, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size()))
    ++n;
  return n;
}

Panel make_panel(const std::string& title, std::vector<std::string> sentences,
                 std::vector<PanelGraph> graphs = {}) {
  Panel p;
  p.section_title = title;
  p.sentences = std::move(sentences);
  p.graphs = std::move(graphs);
  return p;
}

PosterSpec two_panel_spec() {
  PosterSpec spec;
  spec.title = "Results on 100% of the data & more";
  spec.authors = "A. Author_One and B. Author^Two";
  spec.orientation = Orientation::portrait;
  PanelGraph with_image{"g_img", "Figure 1: a $curve$", "figs/curve.pdf"};
  PanelGraph placeholder{"g_missing", "Table 1: 50_50 split", ""};
  spec.panels.push_back(
      make_panel("Methods {fast}", {"we use #2 pencils", "and ~10 GPUs"}, {with_image}));
  spec.panels.push_back(make_panel("Results", {"error drops by 5%"}, {placeholder}));
  return spec;
}

} // namespace

TEST_SUITE("composer") {

TEST_CASE("orientation string conversions") {
  CHECK(to_string(Orientation::portrait) == "portrait");
  CHECK(to_string(Orientation::landscape) == "landscape");
  CHECK(orientation_from_string("landscape") == Orientation::landscape);
  CHECK_THROWS_AS(orientation_from_string("upside-down"), ValidationError);
}

TEST_CASE("builtin templates have the advertised slot counts") {
  const std::vector<Template> inv = builtin_templates();
  REQUIRE(inv.size() == 6);
  CHECK(inv[0].id == "portrait-4");
  CHECK(inv[0].slot_count() == 4);
  CHECK(inv[1].slot_count() == 6);
  CHECK(inv[2].slot_count() == 8);
  CHECK(inv[3].slot_count() == 4);
  CHECK(inv[4].slot_count() == 6);
  CHECK(inv[5].id == "landscape-9");
  CHECK(inv[5].slot_count() == 9);
  for (const Template& t : inv) CHECK_NOTHROW(t.validate());
}

TEST_CASE("template validation catches each defect") {
  Template t = builtin_templates()[0];

  Template no_id = t;
  no_id.id.clear();
  CHECK_THROWS_AS(no_id.validate(), ValidationError);

  Template no_slots = t;
  no_slots.slots.clear();
  CHECK_THROWS_AS(no_slots.validate(), ValidationError);

  Template wide = t;
  wide.slots[0].width = 1.5;
  CHECK_THROWS_AS(wide.validate(), ValidationError);

  Template flat = t;
  flat.slots[0].height = 0.0;
  CHECK_THROWS_AS(flat.validate(), ValidationError);

  Template cramped = t;
  cramped.slots[0].max_words = 0;
  CHECK_THROWS_AS(cramped.validate(), ValidationError);

  Template overlapping = t;
  overlapping.slots[1].row = overlapping.slots[0].row;
  overlapping.slots[1].column = overlapping.slots[0].column;
  CHECK_THROWS_AS(overlapping.validate(), ValidationError);

  Template overfull = t; // two 0.6-wide slots in one row
  overfull.slots[0].width = 0.6;
  overfull.slots[1].width = 0.6;
  CHECK_THROWS_AS(overfull.validate(), ValidationError);
}

TEST_CASE("select_template prefers a snug feasible fit") {
  const std::vector<Template> inv = builtin_templates();
  PosterSpec spec;
  spec.orientation = Orientation::portrait;

  spec.panels.assign(4, make_panel("t", {}));
  CHECK(select_template(spec, inv).id == "portrait-4");

  spec.panels.assign(5, make_panel("t", {}));
  CHECK(select_template(spec, inv).id == "portrait-6");

  spec.panels.assign(8, make_panel("t", {}));
  CHECK(select_template(spec, inv).id == "portrait-8");

  // Nothing fits nine portrait panels: the closest (largest) layout wins,
  // and rendering with it then refuses the overflow.
  spec.panels.assign(9, make_panel("t", {}));
  const Template squeezed = select_template(spec, inv);
  CHECK(squeezed.id == "portrait-8");
  CHECK_THROWS_AS(render_poster(spec, squeezed), ValidationError);

  spec.orientation = Orientation::landscape;
  spec.panels.assign(7, make_panel("t", {}));
  CHECK(select_template(spec, inv).id == "landscape-9");

  // Ties on every key component fall back to inventory order.
  Template a = builtin_templates()[0];
  a.id = "first";
  Template b = a;
  b.id = "second";
  PosterSpec four;
  four.orientation = Orientation::portrait;
  four.panels.assign(4, make_panel("t", {}));
  CHECK(select_template(four, {a, b}).id == "first");

  PosterSpec landscape_only;
  landscape_only.orientation = Orientation::landscape;
  landscape_only.panels.assign(1, make_panel("t", {}));
  CHECK_THROWS_AS(select_template(landscape_only, {a, b}), ValidationError);
}

TEST_CASE("latex_escape rewrites every special character") {
  CHECK(latex_escape("a&b") == "a\\&b");
  CHECK(latex_escape("100%") == "100\\%");
  CHECK(latex_escape("$x$") == "\\$x\\$");
  CHECK(latex_escape("#1") == "\\#1");
  CHECK(latex_escape("a_b") == "a\\_b");
  CHECK(latex_escape("{x}") == "\\{x\\}");
  CHECK(latex_escape("~") == "\\textasciitilde{}");
  CHECK(latex_escape("^") == "\\textasciicircum{}");
  CHECK(latex_escape("a\\b") == "a\\textbackslash{}b");
  CHECK(latex_escape("plain text 123") == "plain text 123");
  CHECK(latex_escape("").empty());
}

TEST_CASE("render_poster produces a balanced tikzposter document") {
  const PosterSpec spec = two_panel_spec();
  const Template tmpl = select_template(spec, builtin_templates());
  std::vector<std::string> warnings;
  const std::string doc = render_poster(spec, tmpl, &warnings);

  CHECK(doc.rfind("\\documentclass[25pt, a0paper, portrait]{tikzposter}", 0) == 0);
  CHECK(count_occurrences(doc, "\\begin{document}") == 1);
  CHECK(count_occurrences(doc, "\\end{document}") == 1);
  CHECK(count_occurrences(doc, "\\begin{columns}") ==
        count_occurrences(doc, "\\end{columns}"));
  CHECK(count_occurrences(doc, "\\begin{itemize}") ==
        count_occurrences(doc, "\\end{itemize}"));
  CHECK(count_occurrences(doc, "\\begin{center}") ==
        count_occurrences(doc, "\\end{center}"));
  CHECK(count_occurrences(doc, "\\maketitle") == 1);

  // Every sentence once, escaped; raw specials never leak through.
  CHECK(count_occurrences(doc, "we use \\#2 pencils") == 1);
  CHECK(count_occurrences(doc, "and \\textasciitilde{}10 GPUs") == 1);
  CHECK(count_occurrences(doc, "error drops by 5\\%") == 1);
  CHECK(count_occurrences(doc, "Methods \\{fast\\}") == 1);
  CHECK(doc.find("we use #2") == std::string::npos); // only the escaped form survives

  // Graph with an asset becomes \includegraphics; the other a placeholder.
  CHECK(count_occurrences(doc, "\\includegraphics[width=0.85\\linewidth]{figs/curve.pdf}") == 1);
  CHECK(count_occurrences(doc, "missing image: g\\_missing") == 1);
  CHECK(count_occurrences(doc, "{\\small Figure 1: a \\$curve\\$}") == 1);

  // Two panels on a four-slot grid: one emitted row with two columns.
  CHECK(count_occurrences(doc, "\\begin{columns}") == 1);
  CHECK(count_occurrences(doc, "\\column{") == 2);
  CHECK(warnings.empty());
}

TEST_CASE("render_poster warns on capacity overflow but keeps content") {
  PosterSpec spec = two_panel_spec();
  Template tmpl = select_template(spec, builtin_templates());
  for (TemplateSlot& s : tmpl.slots) {
    s.max_words = 3;
    s.max_graphs = 0;
  }
  std::vector<std::string> warnings;
  const std::string doc = render_poster(spec, tmpl, &warnings);
  CHECK(warnings.size() == 4); // words + graphs, per panel
  CHECK(count_occurrences(doc, "we use \\#2 pencils") == 1); // still all there
  CHECK(count_occurrences(doc, "\\begin{center}") == 2);
}

TEST_CASE("render_poster rejects mismatched inputs") {
  const PosterSpec spec = two_panel_spec();

  Template landscape = builtin_templates()[3];
  CHECK_THROWS_AS(render_poster(spec, landscape), ValidationError);

  Template tiny = builtin_templates()[0];
  tiny.slots.resize(1);
  CHECK_THROWS_AS(render_poster(spec, tiny), ValidationError);

  PosterSpec empty;
  empty.orientation = Orientation::portrait;
  CHECK_THROWS_AS(render_poster(empty, builtin_templates()[0]), ValidationError);
}

TEST_CASE("template files round-trip") {
  const fs::path dir = fs::temp_directory_path() / "postergen_test_templates";
  fs::create_directories(dir);
  const fs::path file = dir / "layouts.json";

  const std::vector<Template> inv = builtin_templates();
  save_templates(inv, file);
  const std::vector<Template> back = load_templates(file);
  REQUIRE(back.size() == inv.size());
  for (std::size_t i = 0; i < inv.size(); ++i) {
    CHECK(back[i].id == inv[i].id);
    CHECK(back[i].orientation == inv[i].orientation);
    REQUIRE(back[i].slots.size() == inv[i].slots.size());
    CHECK(back[i].slots[0].width == inv[i].slots[0].width);
    CHECK(back[i].slots[0].max_words == inv[i].slots[0].max_words);
  }

  std::ofstream(dir / "object.json") << "{}";
  CHECK_THROWS_AS(load_templates(dir / "object.json"), LoadError);
  std::ofstream(dir / "garbage.json") << "not json";
  CHECK_THROWS_AS(load_templates(dir / "garbage.json"), LoadError);
  CHECK_THROWS_AS(load_templates(dir / "missing.json"), LoadError);
  fs::remove_all(dir);
}

TEST_CASE("make_poster_spec assembles panels in section order") {
  Section sec = testsupport::make_section("c_s0", {"first sentence", "second sentence"});
  sec.graphs.push_back(testsupport::make_graph("c_g0", GraphKind::figure, 1, "curve",
                                               "figs/c.png"));
  Paper paper;
  paper.id = "c_p";
  paper.title = "Composable";
  paper.sections.push_back(sec);

  PanelDraft draft;
  draft.sentence_indices = {1};
  draft.graph_ids = {"c_g0"};

  const PosterSpec spec =
      make_poster_spec(paper, "Someone", Orientation::landscape, {{sec, draft}});
  CHECK(spec.title == "Composable");
  CHECK(spec.authors == "Someone");
  CHECK(spec.orientation == Orientation::landscape);
  REQUIRE(spec.panels.size() == 1);
  CHECK(spec.panels[0].section_title == sec.title);
  CHECK(spec.panels[0].sentences == std::vector<std::string>{"second sentence"});
  REQUIRE(spec.panels[0].graphs.size() == 1);
  CHECK(spec.panels[0].graphs[0].image_path == "figs/c.png");

  PanelDraft bad = draft;
  bad.graph_ids = {"no_such_graph"};
  CHECK_THROWS_AS(make_poster_spec(paper, "Someone", Orientation::portrait, {{sec, bad}}),
                  ValidationError);
}

} // TEST_SUITE
