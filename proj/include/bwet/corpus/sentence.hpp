#pragma once

#include <string>
#include <vector>

namespace bwet {

/// Token sequence with a parallel BIO tag sequence (tags may be empty for
/// unlabeled input).
struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const TaggedSentence&, const TaggedSentence&) = default;
};

}  // namespace bwet
