// Microbenchmarks for the model path: bias construction, biased attention,
// and full forward/backward passes at desk scale.

#include <benchmark/benchmark.h>

#include "postergen/attention.hpp"
#include "postergen/corpus.hpp"
#include "postergen/extraction.hpp"
#include "postergen/section_filter.hpp"
#include "postergen/util.hpp"

#include <random>

using namespace postergen;

namespace {

ReferenceEdges random_edges(std::mt19937_64& rng, int n, int m, int count) {
  ReferenceEdges refs;
  for (int i = 0; i < count; ++i)
    refs.emplace_back(static_cast<int>(rng() % n), static_cast<int>(rng() % m));
  return refs;
}

void bench_build_bias(benchmark::State& state) {
  std::mt19937_64 rng(11);
  const int n = static_cast<int>(state.range(0));
  const int m = n / 4 + 1;
  const ReferenceEdges refs = random_edges(rng, n, m, 2 * m);
  for (auto _ : state)
    benchmark::DoNotOptimize(build_attention_bias(n, m, refs, 1e-2, 1e-3));
}
BENCHMARK(bench_build_bias)->Arg(8)->Arg(32)->Arg(128);

void bench_biased_attention(benchmark::State& state) {
  std::mt19937_64 rng(12);
  const int units = static_cast<int>(state.range(0));
  const int d = 64;
  Eigen::MatrixXd Q(units, d), K(units, d);
  for (int r = 0; r < units; ++r)
    for (int c = 0; c < d; ++c) {
      Q(r, c) = normal_draw(rng);
      K(r, c) = normal_draw(rng);
    }
  const int m = units / 4 + 1;
  const Eigen::MatrixXd A = build_attention_bias(units - m, m,
                                                 random_edges(rng, units - m, m, 2 * m),
                                                 1e-2, 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(biased_attention(Q, K, A, d));
}
BENCHMARK(bench_biased_attention)->Arg(8)->Arg(32)->Arg(128);

AlignedSample bench_sample() {
  SynthesisConfig syn;
  syn.min_sections = 3;
  syn.max_sections = 3;
  syn.min_sentences = 8;
  syn.max_sentences = 8;
  const auto corpus = synthesize_corpus(21, 1, syn);
  auto samples = make_samples(corpus[0].paper, corpus[0].annotations);
  return samples.at(0);
}

ModelConfig bench_model_config() {
  ModelConfig cfg;
  cfg.encoder_layers = 2;
  cfg.d_k = 32;
  cfg.d_ff = 64;
  cfg.heads = 4;
  cfg.unit_encoder_layers = 1;
  cfg.vocab_size = 512;
  cfg.max_unit_tokens = 16;
  return cfg;
}

void bench_extraction_forward(benchmark::State& state) {
  ExtractionModel model(bench_model_config());
  model.init_params(5);
  const AlignedSample sample = bench_sample();
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(sample.section));
}
BENCHMARK(bench_extraction_forward);

void bench_extraction_backward(benchmark::State& state) {
  ExtractionModel model(bench_model_config());
  model.init_params(5);
  const AlignedSample sample = bench_sample();
  for (auto _ : state) benchmark::DoNotOptimize(model.evaluate_sample(sample, true));
}
BENCHMARK(bench_extraction_backward);

void bench_filter_score(benchmark::State& state) {
  SectionFilterConfig cfg;
  cfg.hidden_dim = 32;
  cfg.ffn_dim = 64;
  cfg.heads = 4;
  cfg.unit_encoder_layers = 1;
  cfg.context_layers = 2;
  cfg.vocab_size = 512;
  cfg.max_tokens = 64;
  SectionFilterModel model(cfg);
  model.init_params(5);
  SynthesisConfig syn;
  syn.min_sections = 8;
  syn.max_sections = 8;
  const Paper paper = synthesize_corpus(22, 1, syn)[0].paper;
  for (auto _ : state) benchmark::DoNotOptimize(model.score_sections(paper));
}
BENCHMARK(bench_filter_score);

} // namespace
