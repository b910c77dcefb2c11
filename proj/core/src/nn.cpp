#include "postergen/nn.hpp"

#include "postergen/errors.hpp"
#include "postergen/util.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace postergen::nn {

Matrix& ParamStore::create(const std::string& name, int rows, int cols) {
  if (values_.count(name)) throw std::invalid_argument("ParamStore: duplicate parameter " + name);
  order_.push_back(name);
  return values_.emplace(name, Matrix::Zero(rows, cols)).first->second;
}

Matrix& ParamStore::get(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw std::invalid_argument("ParamStore: unknown parameter " + name);
  return it->second;
}

const Matrix& ParamStore::get(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw std::invalid_argument("ParamStore: unknown parameter " + name);
  return it->second;
}

bool ParamStore::has(const std::string& name) const { return values_.count(name) > 0; }

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : values_) n += static_cast<std::size_t>(m.size());
  return n;
}

void gaussian_init(Matrix& m, std::mt19937_64& rng, double stddev) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = stddev * normal_draw(rng);
}

ad::Var ParamBinding::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  ad::Var v = tape_->input(store_->get(name));
  bound_.emplace(name, v);
  return v;
}

std::map<std::string, Matrix> ParamBinding::grads() const {
  std::map<std::string, Matrix> out;
  for (const auto& [name, var] : bound_) out.emplace(name, tape_->grad(var));
  return out;
}

void adam_step(ParamStore& params, AdamState& state,
               const std::map<std::string, Matrix>& grads, double lr,
               double beta1, double beta2, double eps) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (const auto& [name, g] : grads) {
    Matrix& p = params.get(name);
    auto mi = state.m.find(name);
    if (mi == state.m.end()) {
      mi = state.m.emplace(name, Matrix::Zero(p.rows(), p.cols())).first;
      state.v.emplace(name, Matrix::Zero(p.rows(), p.cols()));
    }
    Matrix& m = mi->second;
    Matrix& v = state.v.at(name);
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    const Matrix mhat = m / bc1;
    const Matrix vhat = v / bc2;
    p.array() -= lr * mhat.array() / (vhat.array().sqrt() + eps);
  }
}

Matrix sinusoidal_position_encoding(int length, int dim) {
  if (dim % 2 != 0) throw std::invalid_argument("position encoding: dim must be even");
  Matrix pe = Matrix::Zero(length, dim);
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; i < dim / 2; ++i) {
      const double rate = std::pow(10000.0, (2.0 * i) / dim);
      pe(pos, 2 * i) = std::sin(pos / rate);
      pe(pos, 2 * i + 1) = std::cos(pos / rate);
    }
  }
  return pe;
}

void init_transformer_layer(ParamStore& ps, const std::string& prefix,
                            const LayerDims& dims, std::mt19937_64& rng) {
  if (dims.d_model % dims.heads != 0)
    throw std::invalid_argument("transformer layer: d_model not divisible by heads");
  gaussian_init(ps.create(prefix + ".wq", dims.d_model, dims.d_model), rng);
  gaussian_init(ps.create(prefix + ".wk", dims.d_model, dims.d_model), rng);
  gaussian_init(ps.create(prefix + ".wv", dims.d_model, dims.d_model), rng);
  gaussian_init(ps.create(prefix + ".wo", dims.d_model, dims.d_model), rng);
  gaussian_init(ps.create(prefix + ".ffn.w1", dims.d_model, dims.d_ff), rng);
  ps.create(prefix + ".ffn.b1", 1, dims.d_ff);
  gaussian_init(ps.create(prefix + ".ffn.w2", dims.d_ff, dims.d_model), rng);
  ps.create(prefix + ".ffn.b2", 1, dims.d_model);
  ps.create(prefix + ".ln1.g", 1, dims.d_model).setOnes();
  ps.create(prefix + ".ln1.b", 1, dims.d_model);
  ps.create(prefix + ".ln2.g", 1, dims.d_model).setOnes();
  ps.create(prefix + ".ln2.b", 1, dims.d_model);
}

ad::Var transformer_layer(ad::Tape& tape, ParamBinding& pb, const std::string& prefix,
                          const LayerDims& dims, ad::Var x, const Matrix* bias) {
  const int d_head = dims.d_model / dims.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(d_head));
  ad::Var q = tape.matmul(x, pb(prefix + ".wq"));
  ad::Var k = tape.matmul(x, pb(prefix + ".wk"));
  ad::Var v = tape.matmul(x, pb(prefix + ".wv"));
  std::vector<ad::Var> heads;
  heads.reserve(dims.heads);
  for (int h = 0; h < dims.heads; ++h) {
    ad::Var qh = tape.cols(q, h * d_head, d_head);
    ad::Var kh = tape.cols(k, h * d_head, d_head);
    ad::Var vh = tape.cols(v, h * d_head, d_head);
    ad::Var logits = tape.scale(tape.matmul_nt(qh, kh), inv_sqrt);
    if (bias != nullptr) logits = tape.add_const(logits, *bias);
    ad::Var attn = tape.softmax_rows(logits);
    heads.push_back(tape.matmul(attn, vh));
  }
  ad::Var attn_out = tape.matmul(tape.concat_cols(heads), pb(prefix + ".wo"));
  ad::Var x1 = tape.layer_norm_rows(tape.add(x, attn_out), pb(prefix + ".ln1.g"),
                                    pb(prefix + ".ln1.b"));
  ad::Var h1 = tape.gelu(tape.add_rowvec(tape.matmul(x1, pb(prefix + ".ffn.w1")),
                                         pb(prefix + ".ffn.b1")));
  ad::Var ffn = tape.add_rowvec(tape.matmul(h1, pb(prefix + ".ffn.w2")),
                                pb(prefix + ".ffn.b2"));
  return tape.layer_norm_rows(tape.add(x1, ffn), pb(prefix + ".ln2.g"),
                              pb(prefix + ".ln2.b"));
}

std::vector<int> hash_token_ids(const std::vector<std::string>& tokens, int vocab_size) {
  if (vocab_size < 2) throw std::invalid_argument("hash_token_ids: vocab_size must be >= 2");
  std::vector<int> ids;
  ids.reserve(tokens.size() + 1);
  ids.push_back(0);  // BOS
  for (const std::string& tok : tokens)
    ids.push_back(1 + static_cast<int>(fnv1a64(tok) % static_cast<std::uint64_t>(vocab_size - 1)));
  return ids;
}

void init_text_encoder(ParamStore& ps, const std::string& prefix,
                       const TextEncoderConfig& cfg, std::mt19937_64& rng) {
  gaussian_init(ps.create(prefix + ".emb", cfg.vocab_size, cfg.d_model), rng);
  const LayerDims dims{cfg.d_model, cfg.d_ff, cfg.heads};
  for (int l = 0; l < cfg.layers; ++l)
    init_transformer_layer(ps, prefix + ".l" + std::to_string(l), dims, rng);
}

ad::Var encode_text(ad::Tape& tape, ParamBinding& pb, const std::string& prefix,
                    const TextEncoderConfig& cfg, const std::vector<std::string>& tokens) {
  std::vector<int> ids = hash_token_ids(tokens, cfg.vocab_size);
  if (static_cast<int>(ids.size()) > cfg.max_tokens)
    ids.resize(static_cast<std::size_t>(cfg.max_tokens));
  ad::Var x = tape.gather_rows(pb(prefix + ".emb"), ids);
  const Matrix pe = sinusoidal_position_encoding(static_cast<int>(ids.size()), cfg.d_model);
  x = tape.add_const(x, pe);
  const LayerDims dims{cfg.d_model, cfg.d_ff, cfg.heads};
  for (int l = 0; l < cfg.layers; ++l)
    x = transformer_layer(tape, pb, prefix + ".l" + std::to_string(l), dims, x, nullptr);
  return tape.rows(x, 0, 1);
}

std::string params_to_json(const ParamStore& ps) {
  nlohmann::json root;
  for (const std::string& name : ps.names()) {
    const Matrix& m = ps.get(name);
    nlohmann::json entry;
    entry["rows"] = static_cast<int>(m.rows());
    entry["cols"] = static_cast<int>(m.cols());
    std::vector<double> data(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        data[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
    entry["data"] = std::move(data);
    root[name] = std::move(entry);
  }
  return root.dump();
}

void params_from_json(const std::string& json_text, ParamStore& ps) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("parameter blob: ") + e.what());
  }
  if (!root.is_object()) throw LoadError("parameter blob: expected an object");
  for (auto it = root.begin(); it != root.end(); ++it) {
    const nlohmann::json& entry = it.value();
    const int rows = entry.at("rows").get<int>();
    const int cols = entry.at("cols").get<int>();
    const auto& data = entry.at("data");
    if (static_cast<int>(data.size()) != rows * cols)
      throw LoadError("parameter blob: size mismatch for " + it.key());
    Matrix& m = ps.has(it.key()) ? ps.get(it.key()) : ps.create(it.key(), rows, cols);
    if (m.rows() != rows || m.cols() != cols)
      throw LoadError("parameter blob: shape mismatch for " + it.key());
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
  }
}

}  // namespace postergen::nn
