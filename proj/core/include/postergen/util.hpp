#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace postergen {

/// FNV-1a 64-bit hash. Stable across platforms; used for hashed token
/// embeddings and config fingerprints.
std::uint64_t fnv1a64(std::string_view data);

std::string to_hex(std::uint64_t value);

/// Draws an integer in [lo, hi] from the generator. Hand-rolled so that
/// results do not depend on the standard library's distribution
/// implementation.
int uniform_int(std::mt19937_64& rng, int lo, int hi);

double uniform_real(std::mt19937_64& rng); // [0, 1)

/// Standard normal draw via Box-Muller on uniform_real, again to stay
/// independent of libstdc++/libc++ distribution internals. Consumes two
/// generator words per call.
double normal_draw(std::mt19937_64& rng);

/// Fisher-Yates permutation of 0..n-1, identical on every platform for a
/// fixed generator state.
std::vector<int> shuffled_indices(int n, std::mt19937_64& rng);

/// Splits text into lowercase alphanumeric runs. This is the single
/// tokenizer used for ROUGE, word budgets, bag-of-token vectors and hashed
/// embeddings, so scores are comparable across modules.
std::vector<std::string> tokenize(std::string_view text);

int count_words(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

} // namespace postergen
