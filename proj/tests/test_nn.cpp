#include "doctest.h"

#include "postergen/errors.hpp"
#include "postergen/nn.hpp"
#include "postergen/util.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

using namespace postergen;
using nn::Matrix;

TEST_SUITE("nn") {

TEST_CASE("ParamStore keeps insertion order and rejects duplicates") {
  nn::ParamStore ps;
  ps.create("b", 2, 3).setConstant(1.0);
  ps.create("a", 1, 4).setConstant(2.0);
  CHECK(ps.names() == std::vector<std::string>{"b", "a"});
  CHECK(ps.has("a"));
  CHECK_FALSE(ps.has("c"));
  CHECK(ps.get("b")(0, 0) == 1.0);
  CHECK(ps.scalar_count() == 10);
  CHECK_THROWS_AS(ps.create("a", 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(ps.get("missing"), std::invalid_argument);
}

TEST_CASE("gaussian_init is seed-stable with the documented spread") {
  Matrix a(64, 64), b(64, 64);
  std::mt19937_64 r1(5), r2(5);
  nn::gaussian_init(a, r1);
  nn::gaussian_init(b, r2);
  CHECK(a == b);
  const double sd = std::sqrt((a.array() - a.mean()).square().mean());
  CHECK(sd == doctest::Approx(0.02).epsilon(0.15));
}

TEST_CASE("ParamBinding binds each parameter once and collects grads") {
  nn::ParamStore ps;
  ps.create("w", 2, 2).setIdentity();
  ad::Tape tape;
  nn::ParamBinding pb(tape, ps);
  const ad::Var w1 = pb("w");
  const ad::Var w2 = pb("w");
  CHECK(w1.id == w2.id);

  const ad::Var loss = tape.mean_all(pb("w"));
  tape.backward(loss);
  const auto grads = pb.grads();
  REQUIRE(grads.count("w") == 1);
  CHECK(grads.at("w")(0, 0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(pb("missing"), std::invalid_argument);
}

TEST_CASE("adam: first step moves by roughly lr against the gradient sign") {
  nn::ParamStore ps;
  ps.create("w", 1, 2) << 1.0, -1.0;
  nn::AdamState state;
  std::map<std::string, Matrix> grads;
  grads["w"] = Matrix(1, 2);
  grads["w"] << 0.5, -0.25;

  nn::adam_step(ps, state, grads, 0.1, 0.9, 0.999);
  CHECK(state.t == 1);
  // With bias correction the first update is lr * g / (|g| + ~eps).
  CHECK(ps.get("w")(0, 0) == doctest::Approx(1.0 - 0.1).epsilon(1e-5));
  CHECK(ps.get("w")(0, 1) == doctest::Approx(-1.0 + 0.1).epsilon(1e-5));
}

TEST_CASE("adam converges on a quadratic") {
  nn::ParamStore ps;
  ps.create("w", 1, 1) << 4.0;
  nn::AdamState state;
  for (int i = 0; i < 400; ++i) {
    std::map<std::string, Matrix> grads;
    grads["w"] = 2.0 * ps.get("w"); // d/dw of w^2
    nn::adam_step(ps, state, grads, 0.05, 0.9, 0.999);
  }
  CHECK(std::abs(ps.get("w")(0, 0)) < 0.05);
}

TEST_CASE("sinusoidal position encoding closed forms") {
  const Matrix pe = nn::sinusoidal_position_encoding(4, 6);
  REQUIRE(pe.rows() == 4);
  REQUIRE(pe.cols() == 6);
  // Position 0: sin(0) = 0 at even columns, cos(0) = 1 at odd columns.
  for (int c = 0; c < 6; c += 2) CHECK(pe(0, c) == 0.0);
  for (int c = 1; c < 6; c += 2) CHECK(pe(0, c) == 1.0);
  // Position p, pair i: sin/cos of p / 10000^(2i/d).
  const double rate = std::pow(10000.0, 2.0 / 6.0);
  CHECK(pe(3, 0) == doctest::Approx(std::sin(3.0)).epsilon(1e-12));
  CHECK(pe(3, 1) == doctest::Approx(std::cos(3.0)).epsilon(1e-12));
  CHECK(pe(3, 2) == doctest::Approx(std::sin(3.0 / rate)).epsilon(1e-12));
  CHECK(pe(3, 3) == doctest::Approx(std::cos(3.0 / rate)).epsilon(1e-12));
  CHECK_THROWS_AS(nn::sinusoidal_position_encoding(4, 5), std::invalid_argument);
}

TEST_CASE("hash_token_ids reserves 0 for BOS and stays in range") {
  const auto ids = nn::hash_token_ids({"alpha", "beta", "alpha"}, 97);
  REQUIRE(ids.size() == 4);
  CHECK(ids[0] == 0);
  for (std::size_t i = 1; i < ids.size(); ++i) {
    CHECK(ids[i] >= 1);
    CHECK(ids[i] < 97);
  }
  CHECK(ids[1] == ids[3]);                       // same token, same id
  CHECK(ids[1] == 1 + static_cast<int>(fnv1a64("alpha") % 96));
  CHECK(nn::hash_token_ids({}, 16) == std::vector<int>{0});
}

TEST_CASE("transformer layer shapes and determinism") {
  const nn::LayerDims dims{8, 16, 2};
  nn::ParamStore ps;
  std::mt19937_64 rng(3);
  nn::init_transformer_layer(ps, "l0", dims, rng);
  CHECK(ps.has("l0.wq"));
  CHECK(ps.has("l0.ffn.w1"));
  CHECK(ps.has("l0.ln2.b"));
  CHECK(ps.get("l0.ln1.g")(0, 0) == 1.0); // gains start at identity

  Matrix x(5, 8);
  std::mt19937_64 xr(4);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 8; ++c) x(r, c) = normal_draw(xr);

  auto run = [&]() {
    ad::Tape tape;
    nn::ParamBinding pb(tape, ps);
    const ad::Var out = nn::transformer_layer(tape, pb, "l0", dims, tape.input(x), nullptr);
    return Matrix(tape.value(out));
  };
  const Matrix a = run();
  CHECK(a.rows() == 5);
  CHECK(a.cols() == 8);
  CHECK(a == run());

  // A bias that prefers position 0 changes the output.
  Matrix bias = Matrix::Zero(5, 5);
  bias.col(0).setConstant(0.5);
  ad::Tape tape;
  nn::ParamBinding pb(tape, ps);
  const Matrix biased =
      tape.value(nn::transformer_layer(tape, pb, "l0", dims, tape.input(x), &bias));
  CHECK(biased != a);
}

TEST_CASE("encode_text pools the first token and truncates") {
  nn::TextEncoderConfig cfg;
  cfg.layers = 1;
  cfg.d_model = 8;
  cfg.d_ff = 16;
  cfg.heads = 2;
  cfg.vocab_size = 32;
  cfg.max_tokens = 4;

  nn::ParamStore ps;
  std::mt19937_64 rng(11);
  nn::init_text_encoder(ps, "enc", cfg, rng);

  auto encode = [&](const std::vector<std::string>& toks) {
    ad::Tape tape;
    nn::ParamBinding pb(tape, ps);
    return Matrix(tape.value(nn::encode_text(tape, pb, "enc", cfg, toks)));
  };

  const Matrix a = encode({"one", "two", "three"});
  CHECK(a.rows() == 1);
  CHECK(a.cols() == 8);
  // max_tokens = 4 including BOS: the fourth word cannot matter.
  CHECK(encode({"one", "two", "three", "four"}) ==
        encode({"one", "two", "three", "ignored"}));
  CHECK(encode({"one", "two", "three"}) != encode({"one", "two", "other"}));
  // Empty text still encodes (BOS alone).
  CHECK(encode({}).cols() == 8);
}

TEST_CASE("params JSON round-trip is bit-exact") {
  nn::ParamStore ps;
  std::mt19937_64 rng(13);
  nn::gaussian_init(ps.create("enc.emb", 7, 5), rng);
  nn::gaussian_init(ps.create("head.w", 5, 1), rng);
  ps.get("head.w")(0, 0) = 1.0 / 3.0; // a value with no short decimal form
  ps.create("head.b", 1, 1)(0, 0) = -0.0;

  const std::string text = nn::params_to_json(ps);
  nn::ParamStore back;
  nn::params_from_json(text, back);
  // names() reports creation order, which for `back` follows the JSON key
  // order; the round-trip guarantee is the name set and the values.
  std::vector<std::string> a_names = ps.names(), b_names = back.names();
  std::sort(a_names.begin(), a_names.end());
  std::sort(b_names.begin(), b_names.end());
  CHECK(a_names == b_names);
  for (const std::string& name : ps.names()) {
    const Matrix& a = ps.get(name);
    const Matrix& b = back.get(name);
    REQUIRE(a.rows() == b.rows());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c)
        CHECK(a(r, c) == b(r, c));
  }
  CHECK_THROWS_AS(nn::params_from_json("not json", back), LoadError);
}

} // TEST_SUITE
