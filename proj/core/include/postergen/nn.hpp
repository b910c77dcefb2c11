#pragma once

// Shared neural building blocks: named parameter store, Adam, sinusoidal
// position encodings, a post-LN transformer encoder layer with an optional
// additive attention bias, and a small trainable text encoder over hashed
// token embeddings. Both the section filter and the extraction model are
// assembled from these pieces.

#include "postergen/autodiff.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace postergen::nn {

using Matrix = Eigen::MatrixXd;

/// Named dense parameters with deterministic iteration order.
class ParamStore {
 public:
  Matrix& create(const std::string& name, int rows, int cols);
  Matrix& get(const std::string& name);
  const Matrix& get(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  std::size_t scalar_count() const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, Matrix> values_;
};

/// Gaussian init with stddev 0.02 (the usual transformer recipe); gains start
/// at 1, biases at 0 — handled by the layer initializers below.
void gaussian_init(Matrix& m, std::mt19937_64& rng, double stddev = 0.02);

/// Binds store parameters onto one tape, each at most once, and collects
/// their gradients after backward().
class ParamBinding {
 public:
  ParamBinding(ad::Tape& tape, const ParamStore& store) : tape_(&tape), store_(&store) {}
  ad::Var operator()(const std::string& name);
  std::map<std::string, Matrix> grads() const;

 private:
  ad::Tape* tape_;
  const ParamStore* store_;
  std::map<std::string, ad::Var> bound_;
};

struct AdamState {
  std::map<std::string, Matrix> m;
  std::map<std::string, Matrix> v;
  long long t = 0;
};

void adam_step(ParamStore& params, AdamState& state,
               const std::map<std::string, Matrix>& grads, double lr,
               double beta1, double beta2, double eps = 1e-8);

Matrix sinusoidal_position_encoding(int length, int dim);

struct LayerDims {
  int d_model = 0;
  int d_ff = 0;
  int heads = 0;
};

/// Creates the parameter set of one encoder layer under `prefix.`:
/// wq, wk, wv, wo (bias-free), ffn w1/b1/w2/b2, ln1/ln2 gain+bias.
void init_transformer_layer(ParamStore& ps, const std::string& prefix,
                            const LayerDims& dims, std::mt19937_64& rng);

/// Post-LN encoder layer; `bias` (order seq_len, may be null) is added to the
/// attention logits of every head after the sqrt(d_head) scaling.
ad::Var transformer_layer(ad::Tape& tape, ParamBinding& pb, const std::string& prefix,
                          const LayerDims& dims, ad::Var x, const Matrix* bias);

struct TextEncoderConfig {
  int layers = 2;
  int d_model = 64;
  int d_ff = 128;
  int heads = 4;
  int vocab_size = 4096;  // hashed embedding rows, id 0 reserved for BOS
  int max_tokens = 64;    // cap including BOS
};

/// Maps tokens to embedding rows: BOS = 0, others 1 + fnv1a64(token) % (V-1).
std::vector<int> hash_token_ids(const std::vector<std::string>& tokens, int vocab_size);

void init_text_encoder(ParamStore& ps, const std::string& prefix,
                       const TextEncoderConfig& cfg, std::mt19937_64& rng);

/// Encodes one token sequence and returns the BOS (first-token) hidden state
/// as a 1 x d_model row.
ad::Var encode_text(ad::Tape& tape, ParamBinding& pb, const std::string& prefix,
                    const TextEncoderConfig& cfg, const std::vector<std::string>& tokens);

// Checkpoint plumbing (JSON, exact double round-trip via shortest-repr dump).
std::string params_to_json(const ParamStore& ps);
void params_from_json(const std::string& json_text, ParamStore& ps);

}  // namespace postergen::nn
