#pragma once

// Shared builders for the unit tests: quick sections, tiny model configs.

#include "postergen/corpus.hpp"
#include "postergen/extraction.hpp"
#include "postergen/section_filter.hpp"

#include <string>
#include <vector>

namespace testsupport {

inline postergen::Section make_section(const std::string& id,
                                       const std::vector<std::string>& sentence_texts) {
  postergen::Section sec;
  sec.id = id;
  sec.title = "Section " + id;
  for (std::size_t i = 0; i < sentence_texts.size(); ++i) {
    postergen::Sentence s;
    s.index = static_cast<int>(i);
    s.text = sentence_texts[i];
    sec.sentences.push_back(std::move(s));
  }
  return sec;
}

inline postergen::GraphElement make_graph(const std::string& id, postergen::GraphKind kind,
                                          int number, const std::string& caption_tail,
                                          const std::string& image_path = "") {
  postergen::GraphElement g;
  g.id = id;
  g.kind = kind;
  g.number = number;
  g.caption = (kind == postergen::GraphKind::figure ? "Figure " : "Table ") +
              std::to_string(number) + ": " + caption_tail;
  g.image_path = image_path;
  return g;
}

// Small enough to run a forward pass in microseconds, still multi-head and
// multi-layer so the shape plumbing is exercised.
inline postergen::ModelConfig tiny_model_config() {
  postergen::ModelConfig cfg;
  cfg.encoder_layers = 2;
  cfg.d_k = 16;
  cfg.d_ff = 24;
  cfg.heads = 2;
  cfg.unit_encoder_layers = 1;
  cfg.vocab_size = 64;
  cfg.max_unit_tokens = 8;
  cfg.max_epochs = 2;
  cfg.patience = 1;
  return cfg;
}

inline postergen::SectionFilterConfig tiny_filter_config() {
  postergen::SectionFilterConfig cfg;
  cfg.hidden_dim = 16;
  cfg.ffn_dim = 24;
  cfg.heads = 2;
  cfg.unit_encoder_layers = 1;
  cfg.context_layers = 1;
  cfg.vocab_size = 64;
  cfg.max_tokens = 32;
  cfg.max_epochs = 2;
  return cfg;
}

} // namespace testsupport
