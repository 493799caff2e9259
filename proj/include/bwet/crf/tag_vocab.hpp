#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bwet/error.hpp"

namespace bwet {

inline constexpr std::string_view kOutsideTag = "O";

/// Parsed BIO tag: prefix is 'B', 'I' or 'O'; type is empty for O.
struct BioTag {
  char prefix = 'O';
  std::string type;
};

inline bool parse_bio_tag(std::string_view tag, BioTag& out) {
  if (tag == kOutsideTag) {
    out = {'O', {}};
    return true;
  }
  if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-') return false;
  out = {tag[0], std::string(tag.substr(2))};
  return true;
}

inline BioTag parse_bio_tag(std::string_view tag) {
  BioTag t;
  if (!parse_bio_tag(tag, t)) throw ValidationError("malformed BIO tag '" + std::string(tag) + "'");
  return t;
}

/// Ordered tag inventory. Real tags occupy [0, size()); the CRF adds virtual
/// START = size() and STOP = size() + 1.
class TagVocab {
 public:
  TagVocab() = default;

  explicit TagVocab(std::vector<std::string> tags) : tags_(std::move(tags)) {
    std::size_t outside = 0;
    std::set<std::string> begins, insides;
    for (std::size_t i = 0; i < tags_.size(); ++i) {
      if (!index_.emplace(tags_[i], i).second) throw ValidationError("tag vocab: duplicate tag '" + tags_[i] + "'");
      BioTag t;
      if (!parse_bio_tag(tags_[i], t)) throw ValidationError("tag vocab: malformed tag '" + tags_[i] + "'");
      if (t.prefix == 'O') ++outside;
      else (t.prefix == 'B' ? begins : insides).insert(t.type);
    }
    if (outside != 1) throw ValidationError("tag vocab: needs exactly one O tag");
    for (const auto& type : insides) {
      if (!begins.count(type)) throw ValidationError("tag vocab: I-" + type + " has no matching B-" + type);
    }
  }

  /// O followed by B-X, I-X for each type in order.
  static TagVocab from_types(const std::vector<std::string>& types) {
    std::vector<std::string> tags{std::string(kOutsideTag)};
    for (const auto& t : types) {
      tags.push_back("B-" + t);
      tags.push_back("I-" + t);
    }
    return TagVocab(std::move(tags));
  }

  /// Six-type intellectual-property preset: field of study, technical terms,
  /// application direction, efficacy, data source, material.
  static TagVocab patent_preset() { return from_types({"DOM", "TECH", "USED", "EFF", "INFO", "MAT"}); }

  std::size_t size() const { return tags_.size(); }
  std::size_t start() const { return tags_.size(); }
  std::size_t stop() const { return tags_.size() + 1; }
  const std::vector<std::string>& tags() const { return tags_; }
  const std::string& tag(std::size_t i) const { return tags_.at(i); }
  bool contains(const std::string& tag) const { return index_.count(tag) != 0; }

  std::size_t index(const std::string& tag) const {
    auto it = index_.find(tag);
    if (it == index_.end()) throw ValidationError("tag '" + tag + "' is not in the tag vocab");
    return it->second;
  }

  std::vector<std::size_t> indices(const std::vector<std::string>& tags) const {
    std::vector<std::size_t> out;
    out.reserve(tags.size());
    for (const auto& t : tags) out.push_back(index(t));
    return out;
  }

  std::vector<std::string> names(const std::vector<std::size_t>& ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (auto i : ids) out.push_back(tag(i));
    return out;
  }

  /// Entity types in vocab order.
  std::vector<std::string> types() const {
    std::vector<std::string> out;
    for (const auto& t : tags_) {
      BioTag b = parse_bio_tag(t);
      if (b.prefix == 'B') out.push_back(b.type);
    }
    return out;
  }

  friend bool operator==(const TagVocab& a, const TagVocab& b) { return a.tags_ == b.tags_; }

 private:
  std::vector<std::string> tags_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace bwet
