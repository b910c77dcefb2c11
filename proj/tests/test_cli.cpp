// End-to-end checks of the postergen binary: every subcommand runs as a
// separate process, artifacts flow between them through files, and the exit
// code contract (0 ok, 1 usage, 2 data, 3 training) holds.

#include "doctest.h"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output; // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(POSTERGEN_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::string out;
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) out += buf.data();
  const int status = pclose(pipe);
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = std::move(out);
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json slurp_json(const fs::path& path) { return json::parse(slurp(path)); }

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

} // namespace

TEST_SUITE("cli") {

TEST_CASE("full pipeline over a synthetic corpus") {
  const fs::path dir = fresh_dir("postergen_test_cli");
  const fs::path corpus = dir / "corpus";
  const std::string synth_args =
      " --papers 4 --seed 11 --min-sections 4 --max-sections 5"
      " --min-sentences 3 --max-sentences 5";

  // synth: one paper file plus one annotation file per paper
  auto r = run_cli("synth --out " + q(corpus) + synth_args);
  CHECK(r.exit_code == 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(corpus)) {
    CHECK(e.path().extension() == ".json");
    ++files;
  }
  CHECK(files == 8);

  // ingest prints a summary and succeeds
  r = run_cli("ingest --corpus " + q(corpus));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("papers: 4") != std::string::npos);
  CHECK(r.output.find("warnings: 0") != std::string::npos);

  // drop the derived labels so `label` has work to do
  const fs::path stripped = dir / "stripped";
  fs::create_directories(stripped);
  std::size_t dropped = 0;
  for (const auto& e : fs::directory_iterator(corpus)) {
    if (e.path().string().find(".annotations.") == std::string::npos) {
      fs::copy_file(e.path(), stripped / e.path().filename());
      continue;
    }
    json ann = slurp_json(e.path());
    for (auto& [id, a] : ann.items()) {
      (void)id;
      dropped += a.erase("sentence_labels");
    }
    std::ofstream(stripped / e.path().filename()) << ann.dump(2) << "\n";
  }
  REQUIRE(dropped > 0);

  // label writes a new corpus and refuses to overwrite its input
  r = run_cli("label --corpus " + q(stripped) + " --out " + q(stripped));
  CHECK(r.exit_code == 2);
  const fs::path labeled = dir / "labeled";
  r = run_cli("label --corpus " + q(stripped) + " --out " + q(labeled));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("labeled " + std::to_string(dropped)) != std::string::npos);
  bool all_labeled = true;
  for (const auto& e : fs::directory_iterator(labeled)) {
    if (e.path().string().find(".annotations.") == std::string::npos) continue;
    const json ann = slurp_json(e.path());
    for (const auto& [id, a] : ann.items()) {
      (void)id;
      if (a.value("important", false) && !a.contains("sentence_labels")) all_labeled = false;
    }
  }
  CHECK(all_labeled);

  // desk-scale config shared by the training commands
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({
    "filter": {"hidden_dim": 16, "ffn_dim": 24, "heads": 2, "unit_encoder_layers": 1,
               "context_layers": 1, "vocab_size": 64, "max_tokens": 32,
               "max_epochs": 2, "lr": 1e-3},
    "extract": {"encoder_layers": 1, "d_k": 16, "d_ff": 24, "heads": 2,
                "unit_encoder_layers": 1, "vocab_size": 64, "max_unit_tokens": 8,
                "max_epochs": 2, "patience": 2, "lr": 1e-3}
  })";

  const fs::path fckpt = dir / "ckpt" / "filter.json";
  const fs::path eckpt = dir / "ckpt" / "extract.json";
  r = run_cli("train-filter --corpus " + q(labeled) + " --checkpoint " + q(fckpt) +
              " --config " + q(cfg) + " --seed 5");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(fckpt));
  r = run_cli("train-extract --corpus " + q(labeled) + " --checkpoint " + q(eckpt) +
              " --config " + q(cfg) + " --seed 5");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(eckpt));

  const fs::path paper = labeled / "p0000.json";
  const std::string paper_before = slurp(paper);

  // filter emits one scored entry per section
  const fs::path filter_out = dir / "filter.json";
  r = run_cli("filter --paper " + q(paper) + " --checkpoint " + q(fckpt) + " --out " +
              q(filter_out));
  CHECK(r.exit_code == 0);
  const json fj = slurp_json(filter_out);
  CHECK(fj.at("paper") == "p0000");
  CHECK(!fj.at("sections").empty());
  bool any_kept = false;
  for (const auto& s : fj.at("sections")) {
    CHECK(s.at("score").get<double>() >= 0.0);
    CHECK(s.at("score").get<double>() <= 1.0);
    if (s.at("kept").get<bool>()) any_kept = true;
  }
  CHECK(any_kept); // argmax fallback guarantees at least one

  // extract -> drafts -> compose
  const fs::path drafts = dir / "drafts.json";
  r = run_cli("extract --paper " + q(paper) + " --checkpoint " + q(eckpt) + " --out " +
              q(drafts));
  CHECK(r.exit_code == 0);
  const fs::path composed = dir / "composed.tex";
  r = run_cli("compose --paper " + q(paper) + " --drafts " + q(drafts) + " --out " +
              q(composed) + " --orientation landscape --authors \"A. Author\"");
  CHECK(r.exit_code == 0);
  CHECK(slurp(composed).find("landscape]{tikzposter}") != std::string::npos);

  // compose without an orientation anywhere is a data error
  r = run_cli("compose --paper " + q(paper) + " --drafts " + q(drafts) + " --out " +
              q(dir / "no_orient.tex"));
  CHECK(r.exit_code == 2);

  // pipeline: identical bytes across runs, stage report names the template
  const fs::path tex1 = dir / "poster1.tex";
  const fs::path tex2 = dir / "poster2.tex";
  const std::string pipeline_args = " --paper " + q(paper) + " --filter-checkpoint " +
                                    q(fckpt) + " --extract-checkpoint " + q(eckpt) +
                                    " --orientation portrait --authors \"A. Author\"";
  r = run_cli("pipeline" + pipeline_args + " --out " + q(tex1));
  CHECK(r.exit_code == 0);
  r = run_cli("pipeline" + pipeline_args + " --out " + q(tex2));
  CHECK(r.exit_code == 0);
  CHECK(slurp(tex1) == slurp(tex2));

  const json report = slurp_json(dir / "poster1.report.json");
  CHECK(report.at("template").get<std::string>().rfind("portrait-", 0) == 0);
  CHECK(!report.at("sections_kept").empty());
  CHECK(report.at("panels").size() == report.at("sections_kept").size());
  for (const auto& p : report.at("panels")) {
    CHECK(p.contains("sentence_scores"));
    CHECK(p.contains("graph_scores"));
  }

  // no subcommand mutated its inputs
  CHECK(slurp(paper) == paper_before);

  // baselines: sentence methods report ROUGE, similarity reports accuracy
  for (const std::string method : {"lead3", "textrank"}) {
    const fs::path out = dir / (method + ".json");
    r = run_cli("baseline --corpus " + q(labeled) + " --method " + method + " --out " +
                q(out));
    CHECK(r.exit_code == 0);
    const json bj = slurp_json(out);
    CHECK(bj.at("method") == method);
    CHECK(bj.at("rouge").at("rouge2").at("f1").get<double>() >= 0.0);
  }
  const fs::path sim_out = dir / "similarity.json";
  r = run_cli("baseline --corpus " + q(labeled) +
              " --method similarity --fit --out " + q(sim_out));
  CHECK(r.exit_code == 0);
  const json sj = slurp_json(sim_out);
  CHECK(sj.at("threshold").get<double>() >= 0.0);
  CHECK(sj.at("graph_accuracy").get<double>() >= 0.0);

  // evaluate: small k over the same corpus, report parses
  const fs::path eval_out = dir / "eval.json";
  r = run_cli("evaluate --corpus " + q(labeled) + " --k 3 --seed 7 --config " + q(cfg) +
              " --out " + q(eval_out));
  CHECK(r.exit_code == 0);
  const json ej = slurp_json(eval_out);
  CHECK(ej.at("k") == 3);
  CHECK(ej.at("folds").size() == 3);

  fs::remove_all(dir);
}

TEST_CASE("exit codes for the failure paths") {
  const fs::path dir = fresh_dir("postergen_test_cli_errors");

  // usage errors
  CHECK(run_cli("--bogus-flag").exit_code == 1);
  CHECK(run_cli("baseline --corpus x --method frequency").exit_code == 1);
  CHECK(run_cli("").exit_code == 1); // a subcommand is required

  // corrupt paper file
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "not json";
  auto r = run_cli("ingest --corpus " + q(dir));
  CHECK(r.exit_code == 2);

  // missing checkpoint names the training command
  fs::remove(bad);
  r = run_cli("synth --out " + q(dir / "c") + " --papers 2 --seed 1 --min-sections 3"
              " --max-sections 3 --min-sentences 3 --max-sentences 4");
  REQUIRE(r.exit_code == 0);
  r = run_cli("extract --paper " + q(dir / "c" / "p0000.json") + " --checkpoint " +
              q(dir / "nope.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("postergen train-extract") != std::string::npos);

  // a corpus with nothing annotated cannot train: exit 3
  const fs::path empty_ann = dir / "empty_ann";
  fs::create_directories(empty_ann);
  fs::copy_file(dir / "c" / "p0000.json", empty_ann / "p0000.json");
  std::ofstream(empty_ann / "p0000.annotations.json") << "{}\n";
  r = run_cli("train-extract --corpus " + q(empty_ann) + " --checkpoint " +
              q(dir / "ck.json"));
  CHECK(r.exit_code == 3);

  fs::remove_all(dir);
}

} // TEST_SUITE
