#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bwet/crf/tag_vocab.hpp"

namespace bwet {

/// Typed half-open token span [start, end).
struct EntitySpan {
  std::string entity_type;
  std::size_t start = 0;
  std::size_t end = 0;

  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

/// Position of the first BIO violation (an I-X not preceded by B-X or I-X),
/// or nullopt for a valid sequence. Malformed tag strings also count.
inline std::optional<std::size_t> first_bio_violation(const std::vector<std::string>& tags) {
  std::string open;  // type of the entity continuing at i-1, empty if none
  for (std::size_t i = 0; i < tags.size(); ++i) {
    BioTag t;
    if (!parse_bio_tag(tags[i], t)) return i;
    if (t.prefix == 'I' && open != t.type) return i;
    open = t.prefix == 'O' ? std::string() : t.type;
  }
  return std::nullopt;
}

inline bool bio_validate(const std::vector<std::string>& tags) { return !first_bio_violation(tags); }

/// Rewrites every orphan I-X to B-X. The result always validates and
/// valid input is returned unchanged.
inline std::vector<std::string> bio_repair(const std::vector<std::string>& tags) {
  std::vector<std::string> out = tags;
  std::string open;
  for (auto& tag : out) {
    BioTag t = parse_bio_tag(tag);
    if (t.prefix == 'I' && open != t.type) tag = "B-" + t.type;
    open = t.prefix == 'O' ? std::string() : t.type;
  }
  return out;
}

/// Number of tags bio_repair would rewrite.
inline std::size_t bio_repair_count(const std::vector<std::string>& tags) {
  const auto fixed = bio_repair(tags);
  std::size_t n = 0;
  for (std::size_t i = 0; i < tags.size(); ++i) n += fixed[i] != tags[i];
  return n;
}

/// Maximal B-X (I-X)* runs. An orphan I-X opens a span, as it would after
/// bio_repair; a B-X always closes the open span.
inline std::vector<EntitySpan> spans_from_bio(const std::vector<std::string>& tags) {
  std::vector<EntitySpan> spans;
  std::optional<EntitySpan> open;
  auto close = [&](std::size_t end) {
    if (open) {
      open->end = end;
      spans.push_back(std::move(*open));
      open.reset();
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    BioTag t = parse_bio_tag(tags[i]);
    if (t.prefix == 'O') {
      close(i);
    } else if (t.prefix == 'B' || !open || open->entity_type != t.type) {
      close(i);
      open = EntitySpan{t.type, i, i};
    }
  }
  close(tags.size());
  return spans;
}

/// Inverse of spans_from_bio for non-overlapping spans within [0, length).
inline std::vector<std::string> bio_from_spans(const std::vector<EntitySpan>& spans, std::size_t length) {
  std::vector<std::string> tags(length, std::string(kOutsideTag));
  for (const auto& s : spans) {
    if (!(s.start < s.end && s.end <= length)) {
      throw ValidationError("span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                            ") does not fit a sequence of length " + std::to_string(length));
    }
    for (std::size_t i = s.start; i < s.end; ++i) {
      if (tags[i] != kOutsideTag) throw ValidationError("overlapping spans at position " + std::to_string(i));
      tags[i] = (i == s.start ? "B-" : "I-") + s.entity_type;
    }
  }
  return tags;
}

}  // namespace bwet
