#include <sstream>

#include "test_support.hpp"

namespace bwet::test {
namespace {

using Tags = std::vector<std::string>;

TEST(Conll, ReadsTwoColumnFile) {
  auto dir = temp_dir("conll_read");
  write_file(dir + "/a.conll", "中\tB-TECH\n文\tI-TECH\n\n的\tO\n");
  auto s = read_conll(dir + "/a.conll");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].tokens, (Tags{"中", "文"}));
  EXPECT_EQ(s[0].tags, (Tags{"B-TECH", "I-TECH"}));
  EXPECT_EQ(s[1].tokens, (Tags{"的"}));
}

TEST(Conll, EmptyFileAndBlankRunsGiveNoSentences) {
  auto dir = temp_dir("conll_empty");
  write_file(dir + "/e.conll", "");
  EXPECT_TRUE(read_conll(dir + "/e.conll").empty());
  write_file(dir + "/b.conll", "\n\n\r\n");
  EXPECT_TRUE(read_conll(dir + "/b.conll").empty());
  EXPECT_THROW(read_conll(dir + "/missing.conll"), IoError);
}

TEST(Conll, StrictModeRejectsOrphanInside) {
  std::istringstream in("a\tO\nb\tI-TECH\n");
  try {
    parse_conll(in, "x.conll", true);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("x.conll:2:"), std::string::npos) << e.what();
  }
  std::istringstream lenient("a\tO\nb\tI-TECH\n");
  EXPECT_EQ(parse_conll(lenient, "x.conll", false).size(), 1u);
}

TEST(Conll, MalformedLinesCarryLineNumbers) {
  for (const char* text : {"a\tO\nno-tab\n", "a\tO\nb\tQ-X\n", "a\tO\nb\tO\tO\n", "a\tO\n\tO\n"}) {
    std::istringstream in(text);
    try {
      parse_conll(in, "m.conll", true);
      FAIL() << "expected FormatError for " << text;
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find("m.conll:2:"), std::string::npos) << e.what();
    }
  }
}

TEST(Conll, WriteReadRoundTrip) {
  auto dir = temp_dir("conll_roundtrip");
  auto corpus = synthetic_corpus(20, 3);
  corpus.push_back({{"专", "利"}, {"B-DOM", "O"}});
  write_conll(dir + "/r.conll", corpus);
  EXPECT_EQ(read_conll(dir + "/r.conll"), corpus);
  std::ostringstream out;
  format_conll(out, {{{"a", "b"}, {"O", "B-X"}}});
  EXPECT_EQ(out.str(), "a\tO\nb\tB-X\n\n");
  EXPECT_THROW(format_conll(out, {{{"a"}, {}}}), ValidationError);
}

TEST(Bio, ValidateAndFirstViolation) {
  EXPECT_TRUE(bio_validate({}));
  EXPECT_TRUE(bio_validate({"B-X", "I-X", "O", "B-Y", "I-Y"}));
  EXPECT_EQ(first_bio_violation({"I-X"}), 0u);
  EXPECT_EQ(first_bio_violation({"B-X", "O", "I-X"}), 2u);
  EXPECT_EQ(first_bio_violation({"B-X", "I-Y"}), 1u);
  EXPECT_EQ(first_bio_violation({"O", "garbage"}), 1u);
}

TEST(Bio, SpansFromExamples) {
  EXPECT_EQ(spans_from_bio({"B-TECH", "I-TECH", "O"}), (std::vector<EntitySpan>{{"TECH", 0, 2}}));
  EXPECT_EQ(spans_from_bio({"B-X", "B-X"}), (std::vector<EntitySpan>{{"X", 0, 1}, {"X", 1, 2}}));
  EXPECT_EQ(spans_from_bio({"O", "O"}), std::vector<EntitySpan>{});
  EXPECT_EQ(spans_from_bio({"B-X", "I-X", "I-Y", "I-Y"}), (std::vector<EntitySpan>{{"X", 0, 2}, {"Y", 2, 4}}));
  EXPECT_EQ(spans_from_bio({"O", "I-X", "I-X"}), (std::vector<EntitySpan>{{"X", 1, 3}}));
}

TEST(Bio, RepairExamples) {
  EXPECT_EQ(bio_repair({"O", "I-TECH", "I-TECH"}), (Tags{"O", "B-TECH", "I-TECH"}));
  EXPECT_EQ(bio_repair({"B-X", "I-Y"}), (Tags{"B-X", "B-Y"}));
  EXPECT_EQ(bio_repair_count({"I-X", "O", "I-X"}), 2u);
  const Tags valid{"B-X", "I-X", "O"};
  EXPECT_EQ(bio_repair(valid), valid);
}

TEST(Bio, RepairIsValidIdempotentAndPreservesSpans) {
  std::mt19937_64 rng(1);
  for (int n = 0; n < 500; ++n) {
    auto t = random_tags(rng, rng() % 15);
    auto r = bio_repair(t);
    EXPECT_TRUE(bio_validate(r));
    EXPECT_EQ(bio_repair(r), r);
    EXPECT_EQ(spans_from_bio(r), spans_from_bio(t));
  }
}

TEST(Bio, SpanRoundTrip) {
  std::mt19937_64 rng(2);
  for (int n = 0; n < 500; ++n) {
    auto t = bio_repair(random_tags(rng, 1 + rng() % 15));
    EXPECT_EQ(bio_from_spans(spans_from_bio(t), t.size()), t);
  }
  EXPECT_THROW(bio_from_spans({{"X", 0, 3}}, 2), ValidationError);
  EXPECT_THROW(bio_from_spans({{"X", 0, 2}, {"Y", 1, 3}}, 3), ValidationError);
  EXPECT_THROW(bio_from_spans({{"X", 1, 1}}, 3), ValidationError);
}

TEST(EntityPrf, IdentityIsPerfect) {
  auto corpus = synthetic_corpus(30, 4);
  auto m = entity_prf(corpus, corpus).overall;
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_FALSE(m.degenerate());
}

TEST(EntityPrf, HandWorkedCase) {
  // Gold has two spans; the prediction recovers one exactly and gets the
  // other's boundary wrong.
  std::vector<Tags> gold{{"B-TECH", "I-TECH", "O", "B-DOM"}};
  std::vector<Tags> pred{{"B-TECH", "I-TECH", "O", "O"}};
  auto r = entity_prf(gold, pred);
  EXPECT_EQ(r.overall.precision, 1.0);
  EXPECT_EQ(r.overall.recall, 0.5);
  EXPECT_NEAR(r.overall.f1, 2.0 / 3.0, 1e-15);
  pred = {{"B-TECH", "O", "O", "B-DOM"}};
  r = entity_prf(gold, pred);
  EXPECT_EQ(r.overall.precision, 0.5);
  EXPECT_EQ(r.overall.recall, 0.5);
  EXPECT_EQ(r.overall.f1, 0.5);
  EXPECT_EQ(r.per_type.at("DOM").f1, 1.0);
  EXPECT_EQ(r.per_type.at("TECH").f1, 0.0);
}

TEST(EntityPrf, MatchesSetIntersectionOracle) {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 100; ++n) {
    std::vector<Tags> gold, pred;
    const std::size_t sentences = 1 + rng() % 6;
    for (std::size_t s = 0; s < sentences; ++s) {
      const std::size_t len = rng() % 10;
      gold.push_back(bio_repair(random_tags(rng, len)));
      pred.push_back(random_tags(rng, len));
    }
    const auto [tp, predicted, gold_n] = span_set_counts(gold, pred);
    auto m = entity_prf(gold, pred).overall;
    EXPECT_EQ(m.true_positives, tp);
    EXPECT_EQ(m.predicted_count, predicted);
    EXPECT_EQ(m.gold_count, gold_n);
    const double p = predicted ? double(tp) / double(predicted) : 0.0;
    const double r = gold_n ? double(tp) / double(gold_n) : 0.0;
    EXPECT_NEAR(m.precision, p, 1e-15);
    EXPECT_NEAR(m.recall, r, 1e-15);
    EXPECT_NEAR(m.f1, p + r > 0 ? 2 * p * r / (p + r) : 0.0, 1e-15);
  }
}

TEST(EntityPrf, MicroAveragingDiffersFromPerSentenceMean) {
  // Sentence 1: 1 of 1 found. Sentence 2: 0 of 3 found, 1 false positive.
  std::vector<Tags> gold{{"B-X"}, {"B-X", "B-X", "B-X", "O"}};
  std::vector<Tags> pred{{"B-X"}, {"O", "O", "O", "B-X"}};
  auto m = entity_prf(gold, pred).overall;
  EXPECT_EQ(m.recall, 0.25);
  EXPECT_EQ(m.precision, 0.5);
  EXPECT_NE(m.recall, (1.0 + 0.0) / 2.0);
}

TEST(EntityPrf, MisalignedInputsAreErrors) {
  EXPECT_THROW(entity_prf(std::vector<Tags>{{"O"}}, std::vector<Tags>{}), ValidationError);
  EXPECT_THROW(entity_prf(std::vector<Tags>{{"O"}}, std::vector<Tags>{{"O", "O"}}), ValidationError);
  std::vector<TaggedSentence> g{{{"a"}, {"O"}}}, p{{{"b"}, {"O"}}};
  EXPECT_THROW(entity_prf(g, p), ValidationError);
}

TEST(EntityPrf, EmptyDenominatorsAreFlagged) {
  auto m = entity_prf(std::vector<Tags>{{"O", "O"}}, std::vector<Tags>{{"O", "O"}}).overall;
  EXPECT_TRUE(m.degenerate());
  EXPECT_EQ(m.f1, 0.0);
  m = entity_prf(std::vector<Tags>{{"B-X"}}, std::vector<Tags>{{"O"}}).overall;
  EXPECT_TRUE(m.degenerate());
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
}

TEST(Split, EightToTwo) {
  auto corpus = synthetic_corpus(10, 1);
  auto s = split_dataset(corpus, 8, 2, 42);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.test.size(), 2u);
  auto big = split_dataset(synthetic_corpus(1972, 1), 8, 2, 42);
  EXPECT_EQ(big.train.size(), 1578u);
  EXPECT_EQ(big.test.size(), 394u);
}

TEST(Split, DeterministicAndAPartition) {
  auto corpus = synthetic_corpus(50, 2);
  auto a = split_dataset(corpus, 8, 2, 9), b = split_dataset(corpus, 8, 2, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  auto c = split_dataset(corpus, 8, 2, 10);
  EXPECT_NE(a.train, c.train);
  // Every input sentence lands in exactly one side.
  std::multiset<std::vector<std::string>> in, out;
  for (const auto& s : corpus) in.insert(s.tokens);
  for (const auto* side : {&a.train, &a.test})
    for (const auto& s : *side) out.insert(s.tokens);
  EXPECT_EQ(in, out);
}

TEST(Split, TooFewSentencesIsAnError) {
  EXPECT_THROW(split_dataset(synthetic_corpus(9, 1), 8, 2, 1), UsageError);
  EXPECT_THROW(split_dataset(synthetic_corpus(10, 1), 0, 2, 1), ConfigError);
}

TEST(Synthetic, DeterministicValidAndWithinVocabulary) {
  auto a = synthetic_corpus(50, 1);
  EXPECT_EQ(a, synthetic_corpus(50, 1));
  EXPECT_NE(a, synthetic_corpus(50, 2));
  std::set<std::string> vocab, types;
  for (const auto& s : a) {
    EXPECT_EQ(s.tokens.size(), s.tags.size());
    EXPECT_TRUE(bio_validate(s.tags));
    EXPECT_EQ(s.tags.back(), "O");
    vocab.insert(s.tokens.begin(), s.tokens.end());
    for (const auto& sp : spans_from_bio(s.tags)) types.insert(sp.entity_type);
  }
  EXPECT_LE(vocab.size(), 40u);
  EXPECT_EQ(types, (std::set<std::string>{"DOM", "MAT", "TECH"}));
}

}  // namespace
}  // namespace bwet::test
