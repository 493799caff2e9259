#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bwet/error.hpp"

namespace bwet {

enum class Tokenization { character, whitespace };

inline const char* tokenization_name(Tokenization t) {
  return t == Tokenization::character ? "character" : "whitespace";
}

inline Tokenization parse_tokenization(const std::string& name) {
  if (name == "character") return Tokenization::character;
  if (name == "whitespace") return Tokenization::whitespace;
  throw ConfigError("unknown tokenization '" + name + "' (expected character|whitespace)");
}

/// Splits UTF-8 text into code points, dropping ASCII whitespace.
inline std::vector<std::string> tokenize_characters(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    if (i + len > text.size()) len = text.size() - i;  // truncated sequence: take the rest
    if (!(len == 1 && (c == ' ' || c == '\t' || c == '\r' || c == '\n'))) {
      out.emplace_back(text.substr(i, len));
    }
    i += len;
  }
  return out;
}

inline std::vector<std::string> tokenize_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string> tokenize(std::string_view text, Tokenization mode) {
  return mode == Tokenization::character ? tokenize_characters(text) : tokenize_whitespace(text);
}

}  // namespace bwet
