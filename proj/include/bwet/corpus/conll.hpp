#pragma once

// Two-column CoNLL layout: UTF-8, LF line endings, "token<TAB>tag" per line,
// one blank line after every sentence.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bwet/corpus/bio.hpp"
#include "bwet/corpus/sentence.hpp"

namespace bwet {

inline std::vector<TaggedSentence> parse_conll(std::istream& in, const std::string& label, bool strict) {
  std::vector<TaggedSentence> out;
  TaggedSentence current;
  std::size_t line_no = 0, first_line = 1;
  auto flush = [&] {
    if (current.tokens.empty()) return;
    if (strict) {
      if (auto bad = first_bio_violation(current.tags)) {
        throw ValidationError(label + ":" + std::to_string(first_line + *bad) + ": invalid BIO tag '" +
                              current.tags[*bad] + "' at position " + std::to_string(*bad) + " of sentence " +
                              std::to_string(out.size()));
      }
    }
    out.push_back(std::move(current));
    current = {};
  };
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (current.tokens.empty()) first_line = line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError(label + ":" + std::to_string(line_no) + ": expected 'token<TAB>tag', got '" + line + "'");
    }
    std::string tag = line.substr(tab + 1);
    BioTag parsed;
    if (!parse_bio_tag(tag, parsed)) {
      throw FormatError(label + ":" + std::to_string(line_no) + ": malformed BIO tag '" + tag + "'");
    }
    current.tokens.push_back(line.substr(0, tab));
    current.tags.push_back(std::move(tag));
  }
  flush();
  return out;
}

/// Reads a CoNLL file. In strict mode an invalid BIO sequence is an error.
inline std::vector<TaggedSentence> read_conll(const std::string& path, bool strict = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_conll(in, path, strict);
}

inline void format_conll(std::ostream& out, const std::vector<TaggedSentence>& sentences) {
  for (const auto& s : sentences) {
    if (s.tokens.size() != s.tags.size()) {
      throw ValidationError("write_conll: sentence has " + std::to_string(s.tokens.size()) + " tokens but " +
                            std::to_string(s.tags.size()) + " tags");
    }
    for (std::size_t i = 0; i < s.tokens.size(); ++i) out << s.tokens[i] << '\t' << s.tags[i] << '\n';
    out << '\n';
  }
}

inline void write_conll(const std::string& path, const std::vector<TaggedSentence>& sentences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  format_conll(out, sentences);
}

}  // namespace bwet
