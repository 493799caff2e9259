#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bwet/corpus/sentence.hpp"

namespace bwet {

/// Deterministic template-grammar corpus for overfit and harness tests.
///
/// Vocabulary: 16 filler words (w0..w15, tagged O) and 8 words for each of
/// TECH (t0..t7), DOM (d0..d7) and MAT (m0..m7), 40 tokens in total. A
/// sentence is 2-4 chunks of "1-2 fillers, then an entity of 1-3 words";
/// a trailing filler closes the sentence, so entities never touch.
inline std::vector<TaggedSentence> synthetic_corpus(std::size_t count, std::uint64_t seed) {
  struct Type {
    const char* name;
    char prefix;
  };
  static constexpr Type kTypes[] = {{"TECH", 't'}, {"DOM", 'd'}, {"MAT", 'm'}};
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  std::vector<TaggedSentence> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    TaggedSentence sent;
    auto filler = [&] {
      sent.tokens.push_back("w" + std::to_string(pick(16)));
      sent.tags.emplace_back("O");
    };
    const std::size_t chunks = 2 + pick(3);
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t fill = 1 + pick(2);
      for (std::size_t f = 0; f < fill; ++f) filler();
      const Type& type = kTypes[pick(3)];
      const std::size_t len = 1 + pick(3);
      for (std::size_t k = 0; k < len; ++k) {
        sent.tokens.push_back(std::string(1, type.prefix) + std::to_string(pick(8)));
        sent.tags.push_back((k == 0 ? "B-" : "I-") + std::string(type.name));
      }
    }
    filler();
    out.push_back(std::move(sent));
  }
  return out;
}

}  // namespace bwet
