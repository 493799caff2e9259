#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "bwet/corpus/bio.hpp"
#include "bwet/corpus/sentence.hpp"

namespace bwet {

struct PrfMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  std::size_t predicted_count = 0;
  std::size_t gold_count = 0;

  static PrfMetrics from_counts(std::size_t tp, std::size_t predicted, std::size_t gold) {
    PrfMetrics m;
    m.true_positives = tp;
    m.predicted_count = predicted;
    m.gold_count = gold;
    m.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.recall = gold ? static_cast<double>(tp) / static_cast<double>(gold) : 0.0;
    const double pr = m.precision + m.recall;
    m.f1 = pr > 0 ? 2.0 * m.precision * m.recall / pr : 0.0;
    return m;
  }

  /// True when P, R or F1 came from an empty denominator.
  bool degenerate() const { return predicted_count == 0 || gold_count == 0; }
};

struct EntityReport {
  PrfMetrics overall;
  std::map<std::string, PrfMetrics> per_type;
};

/// Micro-averaged exact-match span scoring: a predicted span is a true
/// positive iff its type, start and end all match a gold span. Counts are
/// summed over sentences before any ratio is taken.
inline EntityReport entity_prf(const std::vector<std::vector<std::string>>& gold,
                               const std::vector<std::vector<std::string>>& pred) {
  if (gold.size() != pred.size()) {
    throw ValidationError("entity_prf: " + std::to_string(gold.size()) + " gold vs " +
                          std::to_string(pred.size()) + " predicted sentences");
  }
  struct Counts {
    std::size_t tp = 0, predicted = 0, gold = 0;
  };
  Counts total;
  std::map<std::string, Counts> by_type;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size()) {
      throw ValidationError("entity_prf: sentence " + std::to_string(s) + " has " +
                            std::to_string(gold[s].size()) + " gold vs " +
                            std::to_string(pred[s].size()) + " predicted tags");
    }
    const auto g = spans_from_bio(gold[s]);
    const auto p = spans_from_bio(pred[s]);
    const std::set<EntitySpan> gset(g.begin(), g.end());
    for (const auto& span : g) {
      ++total.gold;
      ++by_type[span.entity_type].gold;
    }
    for (const auto& span : p) {
      ++total.predicted;
      auto& c = by_type[span.entity_type];
      ++c.predicted;
      if (gset.count(span)) {
        ++total.tp;
        ++c.tp;
      }
    }
  }
  EntityReport report;
  report.overall = PrfMetrics::from_counts(total.tp, total.predicted, total.gold);
  for (const auto& [type, c] : by_type) report.per_type[type] = PrfMetrics::from_counts(c.tp, c.predicted, c.gold);
  return report;
}

inline EntityReport entity_prf(const std::vector<TaggedSentence>& gold, const std::vector<TaggedSentence>& pred) {
  std::vector<std::vector<std::string>> g, p;
  for (const auto& s : gold) g.push_back(s.tags);
  for (const auto& s : pred) p.push_back(s.tags);
  if (gold.size() == pred.size()) {
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i].tokens != pred[i].tokens) {
        throw ValidationError("entity_prf: token mismatch in sentence " + std::to_string(i));
      }
    }
  }
  return entity_prf(g, p);
}

inline std::string fixed6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

/// CSV with header type,precision,recall,f1,true_positives,predicted,gold.
/// The first row is the micro-averaged "ALL" line.
inline std::string report_csv(const EntityReport& r) {
  std::ostringstream os;
  os << "type,precision,recall,f1,true_positives,predicted,gold\n";
  auto row = [&](const std::string& name, const PrfMetrics& m) {
    os << name << ',' << fixed6(m.precision) << ',' << fixed6(m.recall) << ',' << fixed6(m.f1) << ','
       << m.true_positives << ',' << m.predicted_count << ',' << m.gold_count << '\n';
  };
  row("ALL", r.overall);
  for (const auto& [type, m] : r.per_type) row(type, m);
  return os.str();
}

/// Fixed-width table for terminals.
inline std::string report_table(const EntityReport& r) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %10s %10s %10s %6s %6s %6s\n", "type", "precision", "recall", "f1",
                "tp", "pred", "gold");
  os << buf;
  auto row = [&](const std::string& name, const PrfMetrics& m) {
    std::snprintf(buf, sizeof buf, "%-8s %10.4f %10.4f %10.4f %6zu %6zu %6zu%s\n", name.c_str(), m.precision,
                  m.recall, m.f1, m.true_positives, m.predicted_count, m.gold_count,
                  m.degenerate() ? "  (empty denominator: undefined ratios reported as 0)" : "");
    os << buf;
  };
  for (const auto& [type, m] : r.per_type) row(type, m);
  row("ALL", r.overall);
  return os.str();
}

}  // namespace bwet
