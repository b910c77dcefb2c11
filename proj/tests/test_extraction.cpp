#include "doctest.h"

#include "postergen/errors.hpp"
#include "postergen/extraction.hpp"
#include "postergen/rouge.hpp"
#include "support.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace postergen;
namespace fs = std::filesystem;

namespace {

// A small section with two graphs; sentence 0 refers to g0, sentence 2 to g1.
Section refs_section() {
  Section sec = testsupport::make_section(
      "t_s0", {"the method shown in figure 1 improves recall",
               "an unrelated remark about implementation details",
               "table 1 lists the ablation outcomes"});
  sec.graphs.push_back(testsupport::make_graph("t_g0", GraphKind::figure, 1, "recall curve"));
  sec.graphs.push_back(testsupport::make_graph("t_g1", GraphKind::table, 1, "ablations"));
  std::vector<std::string> warnings;
  Paper p;
  p.id = "t";
  p.title = "t";
  p.sections.push_back(sec);
  resolve_references(p, &warnings);
  REQUIRE(warnings.empty());
  return p.sections[0];
}

AlignedSample labeled_sample() {
  AlignedSample sample;
  sample.paper_id = "t";
  sample.section = refs_section();
  sample.panel_text = sample.section.sentences[0].text;
  sample.panel_graph_ids = {"t_g0"};
  sample.derived_sentence_labels = {1, 0, 0};
  return sample;
}

} // namespace

TEST_SUITE("extraction") {

TEST_CASE("config validation catches each bad field") {
  ModelConfig ok = testsupport::tiny_model_config();
  CHECK_NOTHROW(ok.validate());

  auto expect_throw = [](auto mutate) {
    ModelConfig c = testsupport::tiny_model_config();
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ValidationError);
  };
  expect_throw([](ModelConfig& c) { c.encoder_layers = 0; });
  expect_throw([](ModelConfig& c) { c.d_k = 15; });
  expect_throw([](ModelConfig& c) { c.heads = 3; });      // 16 % 3 != 0
  expect_throw([](ModelConfig& c) { c.h1 = -1e-3; });
  expect_throw([](ModelConfig& c) { c.beta_s = 0.0; });
  expect_throw([](ModelConfig& c) { c.gamma = -0.5; });
  expect_throw([](ModelConfig& c) { c.lr = 0.0; });
  expect_throw([](ModelConfig& c) { c.use_captions = c.use_sentences = false; });
  expect_throw([](ModelConfig& c) { c.vocab_size = 1; });
  expect_throw([](ModelConfig& c) { c.word_budget = 0; });
  expect_throw([](ModelConfig& c) { c.graph_threshold = 1.5; });
}

TEST_CASE("balanced_ce closed forms") {
  // y = 0, p = 0.5, beta = 0.5: -0.5 ln(0.5) = 0.5 ln 2.
  CHECK(std::abs(balanced_ce(0.5, 0, 1.0, 0.5) - 0.34657359027997264) < 1e-9);
  // y = 1, p = 0.1, alpha = 1: -ln(0.1) = ln 10.
  CHECK(std::abs(balanced_ce(0.1, 1, 1.0, 1.0) - 2.302585092994046) < 1e-9);
  // Clamping keeps the loss finite at the boundary.
  CHECK(std::isfinite(balanced_ce(0.0, 1, 1.0, 1.0)));
  CHECK(std::isfinite(balanced_ce(1.0, 0, 1.0, 1.0)));
  CHECK(balanced_ce(1.0, 1, 2.0, 1.0) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("combined_loss fixture and edge cases") {
  ModelConfig cfg; // paper weights: alpha_s 1, beta_s 0.5, alpha_g = beta_g = 1, gamma 3
  const double loss = combined_loss({0.8, 0.3}, {1, 0}, {0.6}, {1}, cfg);
  CHECK(loss == doctest::Approx(1.7332173829397601).epsilon(1e-12));

  // No graphs: only the sentence mean remains.
  CHECK(combined_loss({0.8, 0.3}, {1, 0}, {}, {}, cfg) ==
        doctest::Approx(0.20074051164178797).epsilon(1e-12));
  // No sentences: gamma times the graph mean.
  CHECK(combined_loss({}, {}, {0.6}, {1}, cfg) ==
        doctest::Approx(3.0 * 0.5108256237659907).epsilon(1e-12));
  CHECK_THROWS_AS(combined_loss({0.5}, {1, 0}, {}, {}, cfg), ValidationError);
}

TEST_CASE("config signature round-trips and rejects unknown keys") {
  ModelConfig cfg = testsupport::tiny_model_config();
  cfg.h1 = 0.5;
  cfg.gamma = 2.0;
  const std::string sig = model_config_signature(cfg);
  const ModelConfig back = model_config_from_signature(sig);
  CHECK(model_config_signature(back) == sig);

  // Partial objects keep defaults.
  const ModelConfig partial = model_config_from_signature(R"({"d_k": 32, "heads": 4})");
  CHECK(partial.d_k == 32);
  CHECK(partial.encoder_layers == 3);
  CHECK(partial.gamma == 3.0);

  CHECK_THROWS_AS(model_config_from_signature(R"({"d_q": 32})"), LoadError);
  CHECK_THROWS_AS(model_config_from_signature("]["), LoadError);
  // Values are validated after parsing.
  CHECK_THROWS_AS(model_config_from_signature(R"({"d_k": 7})"), ValidationError);
}

TEST_CASE("build_reference_edges maps ids to indices") {
  const Section sec = refs_section();
  const ReferenceEdges edges = build_reference_edges(sec);
  REQUIRE(edges.size() == 2);
  CHECK(edges[0] == std::make_pair(0, 0));
  CHECK(edges[1] == std::make_pair(2, 1));
}

TEST_CASE("draft_text joins selected sentences in order") {
  const Section sec = refs_section();
  PanelDraft draft;
  draft.sentence_indices = {0, 2};
  CHECK(draft_text(sec, draft) ==
        sec.sentences[0].text + " " + sec.sentences[2].text);
}

TEST_CASE("encode_units shapes follow the ablation switches") {
  const std::vector<std::string> sents = {"one sentence", "another sentence"};
  const std::vector<std::string> caps = {"Figure 1: something"};

  ModelConfig cfg = testsupport::tiny_model_config();
  ExtractionModel full(cfg);
  full.init_params(1);
  const EncodedUnits eu = full.encode_units(sents, caps);
  CHECK(eu.n == 2);
  CHECK(eu.m == 1);
  CHECK(eu.sentence_matrix.rows() == 2);
  CHECK(eu.caption_matrix.rows() == 1);
  CHECK(eu.combined.rows() == 3);
  CHECK(eu.combined.cols() == cfg.d_k);
  CHECK((eu.combined.row(0).array() == eu.sentence_matrix.row(0).array()).all());
  CHECK((eu.combined.row(2).array() == eu.caption_matrix.row(0).array()).all());

  cfg.use_captions = false;
  ExtractionModel no_caps(cfg);
  no_caps.init_params(1);
  const EncodedUnits nc = no_caps.encode_units(sents, caps);
  CHECK(nc.n == 2);
  CHECK(nc.m == 0);

  cfg.use_captions = true;
  cfg.use_sentences = false;
  ExtractionModel no_sents(cfg);
  no_sents.init_params(1);
  const EncodedUnits ns = no_sents.encode_units(sents, caps);
  CHECK(ns.n == 0);
  CHECK(ns.m == 1);

  CHECK_THROWS_AS(no_sents.encode_units(sents, {}), ValidationError);
}

TEST_CASE("forward yields one probability per unit, deterministically") {
  ExtractionModel model(testsupport::tiny_model_config());
  model.init_params(42);
  const Section sec = refs_section();
  const ExtractionScores a = model.forward(sec);
  REQUIRE(a.sentence_scores.size() == 3);
  REQUIRE(a.graph_scores.size() == 2);
  for (double p : a.sentence_scores) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  const ExtractionScores b = model.forward(sec);
  CHECK(a.sentence_scores == b.sentence_scores);
  CHECK(a.graph_scores == b.graph_scores);
}

TEST_CASE("the bias-weight ablation equals h1 = h2 = 0 bit for bit") {
  ModelConfig no_weight = testsupport::tiny_model_config();
  no_weight.use_bias_weight = false;

  ModelConfig zero_h = testsupport::tiny_model_config();
  zero_h.h1 = 0.0;
  zero_h.h2 = 0.0;

  ExtractionModel a(no_weight), b(zero_h);
  a.init_params(9);
  b.init_params(9);

  const Section sec = refs_section();
  const ExtractionScores sa = a.forward(sec);
  const ExtractionScores sb = b.forward(sec);
  CHECK(sa.sentence_scores == sb.sentence_scores); // exact equality
  CHECK(sa.graph_scores == sb.graph_scores);

  // And the bias does change the full model's output.
  ExtractionModel full(testsupport::tiny_model_config());
  full.init_params(9);
  const ExtractionScores sf = full.forward(sec);
  CHECK(sf.sentence_scores != sa.sentence_scores);
}

TEST_CASE("evaluate_sample matches combined_loss and demands labels") {
  ExtractionModel model(testsupport::tiny_model_config());
  model.init_params(7);
  AlignedSample sample = labeled_sample();

  const auto eval = model.evaluate_sample(sample, /*with_grads=*/false);
  const double expected =
      combined_loss(eval.scores.sentence_scores, sample.derived_sentence_labels,
                    eval.scores.graph_scores, sample.graph_labels(), model.config());
  CHECK(eval.loss == doctest::Approx(expected).epsilon(1e-12));
  CHECK(eval.grads.empty());

  AlignedSample unlabeled = sample;
  unlabeled.derived_sentence_labels.clear();
  CHECK_THROWS_WITH_AS(model.evaluate_sample(unlabeled, false),
                       doctest::Contains("labeler"), TrainingError);
}

TEST_CASE("evaluate_sample gradients pass a spot finite-difference check") {
  ModelConfig cfg = testsupport::tiny_model_config();
  cfg.encoder_layers = 1;
  ExtractionModel model(cfg);
  model.init_params(3);
  const AlignedSample sample = labeled_sample();

  const auto eval = model.evaluate_sample(sample, /*with_grads=*/true);
  REQUIRE(!eval.grads.empty());

  const double h = 1e-5;
  int checked = 0;
  for (const std::string& name : {std::string("head.w"), std::string("joint.l0.wq")}) {
    REQUIRE(eval.grads.count(name) == 1);
    Eigen::MatrixXd& theta = model.params().get(name);
    for (Eigen::Index r = 0; r < std::min<Eigen::Index>(theta.rows(), 3); ++r) {
      const double saved = theta(r, 0);
      theta(r, 0) = saved + h;
      const double up = model.evaluate_sample(sample, false).loss;
      theta(r, 0) = saved - h;
      const double down = model.evaluate_sample(sample, false).loss;
      theta(r, 0) = saved;
      const double fd = (up - down) / (2 * h);
      const double a = eval.grads.at(name)(r, 0);
      CHECK(std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-4}) < 1e-4);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("select_panel_content applies the budget skip rule") {
  Section sec = testsupport::make_section(
      "sel", {"one two three four five six seven eight nine ten",  // 10 words
              "one two three",                                      // 3 words
              "one two three four five"});                          // 5 words
  ExtractionScores scores;
  scores.sentence_scores = {0.9, 0.2, 0.8};
  scores.graph_scores = {};

  // Budget 13: best (10 words) fits, second-best (5) would overflow and is
  // skipped, third (3) still fits lower down the ranking.
  const PanelDraft draft = select_panel_content(scores, sec, 13, 0.5);
  CHECK(draft.sentence_indices == std::vector<int>{0, 1});

  // Nothing fits: fall back to the single best scorer.
  const PanelDraft tiny = select_panel_content(scores, sec, 2, 0.5);
  CHECK(tiny.sentence_indices == std::vector<int>{0});

  CHECK_THROWS_AS(select_panel_content(scores, sec, 0, 0.5), std::invalid_argument);
}

TEST_CASE("select_panel_content thresholds graphs inclusively") {
  Section sec = refs_section();
  ExtractionScores scores;
  scores.sentence_scores = {0.9, 0.1, 0.1};
  scores.graph_scores = {0.5, 0.49999};
  const PanelDraft draft = select_panel_content(scores, sec, 45, 0.5);
  CHECK(draft.graph_ids == std::vector<std::string>{"t_g0"});
}

TEST_CASE("training reduces the loss and records the schedule") {
  ModelConfig cfg = testsupport::tiny_model_config();
  cfg.max_epochs = 8;
  cfg.lr = 3e-3;
  ExtractionModel model(cfg);
  model.init_params(5);

  std::vector<AlignedSample> train = {labeled_sample()};
  const ExtractTrainStats stats = model.train(train, {}, 5);
  CHECK(stats.epochs_run == 8);
  REQUIRE(stats.epochs.size() == 8);
  CHECK(stats.steps.size() == 8);
  CHECK(stats.epochs.back().mean_loss < stats.epochs.front().mean_loss);
  CHECK(std::isnan(stats.epochs.back().val_rouge2)); // no validation set

  // With validation, the best epoch snapshot is tracked.
  ExtractionModel with_val(cfg);
  with_val.init_params(5);
  const ExtractTrainStats vstats = with_val.train(train, train, 5);
  CHECK(vstats.best_epoch >= 0);
  CHECK(vstats.best_val_rouge2 >= 0.0);

  CHECK_THROWS_AS(model.train({}, {}, 1), TrainingError);
}

TEST_CASE("checkpoint save and load round-trip bitwise") {
  const fs::path dir = fs::temp_directory_path() / "postergen_test_ckpt";
  fs::create_directories(dir);
  const fs::path file = dir / "extract.ckpt.json";

  ExtractionModel model(testsupport::tiny_model_config());
  model.init_params(21);
  model.save(file);

  const ExtractionModel back = ExtractionModel::load(file);
  CHECK(model_config_signature(back.config()) == model_config_signature(model.config()));
  const Section sec = refs_section();
  const ExtractionScores a = model.forward(sec);
  const ExtractionScores b = back.forward(sec);
  CHECK(a.sentence_scores == b.sentence_scores);
  CHECK(a.graph_scores == b.graph_scores);

  std::ofstream(dir / "bad.json") << "{}";
  CHECK_THROWS_AS(ExtractionModel::load(dir / "bad.json"), LoadError);
  CHECK_THROWS_AS(ExtractionModel::load(dir / "missing.json"), LoadError);
  fs::remove_all(dir);
}

} // TEST_SUITE
