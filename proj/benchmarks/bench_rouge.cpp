// Microbenchmarks for the scoring hot path: tokenization, ROUGE variants and
// the greedy oracle labeler that calls them in a loop.

#include <benchmark/benchmark.h>

#include "postergen/rouge.hpp"
#include "postergen/util.hpp"

#include <random>
#include <string>
#include <vector>

using namespace postergen;

namespace {

std::string synthetic_text(std::mt19937_64& rng, int words) {
  std::vector<std::string> tokens;
  tokens.reserve(words);
  for (int i = 0; i < words; ++i)
    tokens.push_back("w" + std::to_string(rng() % 300));
  return join(tokens, " ");
}

void bench_tokenize(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const std::string text = synthetic_text(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bench_tokenize)->Arg(32)->Arg(256)->Arg(2048);

void bench_rouge_n(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const std::string cand = synthetic_text(rng, static_cast<int>(state.range(0)));
  const std::string ref = synthetic_text(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rouge_n(cand, ref, 2));
}
BENCHMARK(bench_rouge_n)->Arg(32)->Arg(256)->Arg(2048);

void bench_rouge_l(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const std::string cand = synthetic_text(rng, static_cast<int>(state.range(0)));
  const std::string ref = synthetic_text(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rouge_l(cand, ref));
}
BENCHMARK(bench_rouge_l)->Arg(32)->Arg(256)->Arg(1024);

void bench_greedy_label(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const int n_sentences = static_cast<int>(state.range(0));
  std::vector<std::string> sentences;
  std::vector<std::string> panel_parts;
  for (int i = 0; i < n_sentences; ++i) {
    sentences.push_back(synthetic_text(rng, 12));
    if (i % 3 == 0) panel_parts.push_back(sentences.back());
  }
  const std::string panel = join(panel_parts, " ");
  for (auto _ : state)
    benchmark::DoNotOptimize(greedy_label_sentences(sentences, panel));
}
BENCHMARK(bench_greedy_label)->Arg(8)->Arg(25)->Arg(60);

} // namespace
