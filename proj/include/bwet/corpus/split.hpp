#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "bwet/corpus/sentence.hpp"
#include "bwet/error.hpp"

namespace bwet {

/// Fisher-Yates with an explicit index draw so the permutation does not
/// depend on the standard library's shuffle implementation.
template <typename U>
void deterministic_shuffle(std::vector<U>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

struct DatasetSplit {
  std::vector<TaggedSentence> train;
  std::vector<TaggedSentence> test;
};

/// Shuffled split in the ratio train_parts : test_parts.
inline DatasetSplit split_dataset(const std::vector<TaggedSentence>& sentences, std::size_t train_parts,
                                  std::size_t test_parts, std::uint64_t seed) {
  if (train_parts == 0 || test_parts == 0) throw ConfigError("split ratio parts must be positive");
  const std::size_t n = sentences.size();
  if (n < train_parts + test_parts) {
    throw UsageError("split_dataset: " + std::to_string(n) + " sentences cannot be split " +
                     std::to_string(train_parts) + ":" + std::to_string(test_parts));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  deterministic_shuffle(order, rng);
  const auto n_train = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * static_cast<double>(train_parts) /
                   static_cast<double>(train_parts + test_parts)));
  DatasetSplit split;
  for (std::size_t i = 0; i < n; ++i) (i < n_train ? split.train : split.test).push_back(sentences[order[i]]);
  return split;
}

}  // namespace bwet
