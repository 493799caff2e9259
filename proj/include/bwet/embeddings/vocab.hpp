#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "bwet/error.hpp"

namespace bwet {

/// Token inventory with dense ids. PAD = 0 and UNK = 1 are always present.
class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr const char* kPadToken = "<pad>";
  static constexpr const char* kUnkToken = "<unk>";

  Vocab() : tokens_{kPadToken, kUnkToken} {
    ids_[kPadToken] = kPad;
    ids_[kUnkToken] = kUnk;
  }

  /// Rebuilds a vocab from its full token list (PAD and UNK first).
  static Vocab from_tokens(const std::vector<std::string>& tokens) {
    if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
      throw FormatError("vocab: token list must start with <pad>, <unk>");
    }
    Vocab v;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      if (v.contains(tokens[i])) throw FormatError("vocab: duplicate token '" + tokens[i] + "'");
      v.add(tokens[i]);
    }
    return v;
  }

  /// Returns the id of `token`, inserting it if new.
  std::size_t add(const std::string& token) {
    auto [it, inserted] = ids_.try_emplace(token, tokens_.size());
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  std::size_t id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
  }

  bool contains(const std::string& token) const { return ids_.count(token) != 0; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

}  // namespace bwet
