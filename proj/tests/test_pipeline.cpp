#include <sstream>

#include "test_support.hpp"
#include "toy_pipeline.hpp"

namespace bwet::test {
namespace {

/// Small enough that a few epochs run in well under a second.
ModelConfig tiny_config(std::size_t epochs = 2) {
  ModelConfig c = toy_config();
  c.d_emb = 8;
  c.idcnn.filters = 4;
  c.num_layers = 1;
  c.num_heads = 2;
  c.epochs = epochs;
  c.batch_size = 4;
  return c;
}

struct Data {
  std::vector<TaggedSentence> train, dev;
};

Data small_data() {
  auto s = split_dataset(synthetic_corpus(20, 1), 8, 2, 1);
  return {s.train, s.test};
}

BwetModel<double> tiny_model(const Data& d, ModelConfig c = tiny_config()) {
  return BwetModel<double>::create(c, tag_vocab_for({&d.train, &d.dev}), token_vocab_for(d.train));
}

std::string csv_of(const std::string& dir) { return read_file(dir + "/metrics.csv"); }

TEST(Forward, ShapeAndDeterminism) {
  auto d = small_data();
  auto m = tiny_model(d);
  const auto& tokens = d.train[0].tokens;
  auto e = m.emissions(tokens).value();
  EXPECT_EQ(e.shape(), (Shape{tokens.size(), m.tags().size()}));
  EXPECT_EQ(m.emissions(tokens).value(), e);
  EXPECT_THROW(m.emissions({}), UsageError);
  EXPECT_EQ(m.config().d_model(), 12u);
}

TEST(Forward, FullPipelineGradient) {
  for (auto mode : {PositionMode::relative, PositionMode::absolute}) EXPECT_GRAD_OK(check_toy_pipeline<double>(mode, 2), 1e-4);
}

// In double, finite differences of a loss near 5 carry about 5e-11 of
// rounding noise, so coordinates with gradients below ~1e-6 fail the
// relative test at some seeds. Extended precision removes that noise and
// shows the analytic gradient is right across seeds.
TEST(Forward, FullPipelineGradientAcrossSeedsInExtendedPrecision) {
  for (auto mode : {PositionMode::relative, PositionMode::absolute}) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      auto r = check_toy_pipeline<long double>(mode, seed);
      EXPECT_LT(r.max_rel_error, 1e-5) << "seed " << seed;
    }
  }
}

TEST(Forward, NoCrfLossIsCrossEntropy) {
  auto d = small_data();
  ModelConfig c = tiny_config();
  c.use_crf = false;
  auto m = tiny_model(d, c);
  std::mt19937_64 rng(0);
  const std::vector<std::size_t> gold{0, 1, 0};
  auto loss = m.loss({"w1", "t3", "w2"}, gold, false, rng).value()[0];
  EXPECT_NEAR(loss, softmax_cross_entropy(m.emissions({"w1", "t3", "w2"}), gold).value()[0], 1e-12);
  for (const auto& [name, v] : m.named_tensors()) EXPECT_NE(name, "crf.transitions");
}

TEST(Train, ZeroEpochsWritesInitialCheckpointAndHeaderOnly) {
  auto d = small_data();
  auto dir = temp_dir("train_zero");
  auto r = train<double>(d.train, d.dev, tiny_config(0), {dir});
  EXPECT_EQ(csv_of(dir), metrics_csv_header());
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.best_epoch, 0u);
  auto loaded = BwetModel<double>::load(dir + "/best.ckpt");
  EXPECT_EQ(loaded.emissions(d.dev[0].tokens).value(), tiny_model(d).emissions(d.dev[0].tokens).value());
  EXPECT_TRUE(std::filesystem::exists(dir + "/final.ckpt"));
}

TEST(Train, SameSeedGivesIdenticalMetrics) {
  auto d = small_data();
  auto a = temp_dir("train_seed_a"), b = temp_dir("train_seed_b");
  train<float>(d.train, d.dev, tiny_config(3), {a});
  train<float>(d.train, d.dev, tiny_config(3), {b});
  const auto csv = csv_of(a);
  EXPECT_EQ(csv, csv_of(b));
  EXPECT_EQ(read_file(a + "/final.ckpt"), read_file(b + "/final.ckpt"));
  // Header plus a train and a dev row per epoch, six decimals throughout.
  std::istringstream lines(csv);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) ++n;
  EXPECT_EQ(n, 7u);
  EXPECT_EQ(csv.substr(metrics_csv_header().size(), 8), "1,train,");
}

TEST(Train, LossDecreasesOnToyData) {
  auto d = small_data();
  auto r = train<float>(d.train, d.dev, tiny_config(15));
  EXPECT_LT(r.history.back().loss, r.history.front().loss);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  auto d = small_data();
  auto dir = temp_dir("ckpt_roundtrip");
  auto r = train<float>(d.train, d.dev, tiny_config(2), {dir});
  auto loaded = BwetModel<float>::load(dir + "/final.ckpt");
  for (const auto& s : d.dev) EXPECT_EQ(loaded.emissions(s.tokens).value(), r.model.emissions(s.tokens).value());
  EXPECT_EQ(loaded.tags(), r.model.tags());
  EXPECT_EQ(to_json(loaded.config()), to_json(r.model.config()));
  write_file(dir + "/bad.ckpt", "not an archive");
  EXPECT_THROW(BwetModel<float>::load(dir + "/bad.ckpt"), FormatError);
}

TEST(Train, StaticEmbeddingsStayFrozen) {
  auto d = small_data();
  auto dir = temp_dir("static_emb");
  std::ostringstream file;
  file << "40 4\n";
  for (char p : {'w', 't', 'd', 'm'})
    for (int i = 0; i < (p == 'w' ? 16 : 8); ++i) file << p << i << " 0.1 -0.2 0.3 0.05\n";
  write_file(dir + "/emb.txt", file.str());
  ModelConfig c = tiny_config(3);
  c.embedding_mode = EmbeddingMode::static_pretrained;
  c.embedding_path = dir + "/emb.txt";
  c.d_emb = 4;
  auto r = train<double>(d.train, d.dev, c);
  EXPECT_EQ(r.model.embedding().table().value(), load_pretrained<double>(c.embedding_path).table().value());
  EXPECT_FALSE(r.model.embedding().table().requires_grad());
}

TEST(Train, TruncationIsLoggedWithSentenceIndices) {
  auto d = small_data();
  ModelConfig c = tiny_config(1);
  c.max_len = 4;
  std::ostringstream log;
  auto r = train<double>(d.train, d.dev, c, {"", &log});
  EXPECT_NE(log.str().find("warning: train sentence 0 truncated"), std::string::npos) << log.str();
  EXPECT_NE(log.str().find("warning: dev sentence 1 truncated"), std::string::npos);
  // Prediction past max_len tags the tail O.
  auto p = predict_sentences(r.model, {d.dev[0].tokens});
  ASSERT_EQ(p.sentences[0].tags.size(), d.dev[0].tokens.size());
  for (std::size_t i = 4; i < d.dev[0].tokens.size(); ++i) EXPECT_EQ(p.sentences[0].tags[i], "O");
}

TEST(Train, DivergenceNamesEpochAndBatch) {
  auto d = small_data();
  auto dir = temp_dir("diverge");
  // Finite float embeddings near the type's maximum overflow in the first
  // convolution, so the very first loss is NaN.
  std::string file = "40 4\n";
  for (char p : {'w', 't', 'd', 'm'})
    for (int i = 0; i < (p == 'w' ? 16 : 8); ++i) file += std::string(1, p) + std::to_string(i) + " 3e38 3e38 3e38 3e38\n";
  write_file(dir + "/emb.txt", file);
  ModelConfig c = tiny_config(1);
  c.embedding_mode = EmbeddingMode::static_pretrained;
  c.embedding_path = dir + "/emb.txt";
  c.d_emb = 4;
  try {
    train<float>(d.train, d.dev, c);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1, batch 0"), std::string::npos) << e.what();
  }
}

TEST(Train, RejectsEmptyOrInvalidTraining) {
  auto d = small_data();
  EXPECT_THROW(train<double>({}, d.dev, tiny_config()), UsageError);
  std::vector<TaggedSentence> bad{{{"a", "b"}, {"O", "I-TECH"}}};
  EXPECT_THROW(train<double>(bad, {}, tiny_config()), ValidationError);
  ModelConfig c = tiny_config();
  c.lr = 0;
  EXPECT_THROW(train<double>(d.train, d.dev, c), ConfigError);
}

TEST(Evaluate, VocabMismatchListsTags) {
  auto d = small_data();
  auto m = tiny_model(d);
  std::vector<TaggedSentence> other{{{"x", "y", "z"}, {"B-EFF", "I-EFF", "B-INFO"}}};
  try {
    evaluate_model(m, other);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("B-EFF, B-INFO, I-EFF"), std::string::npos) << e.what();
  }
}

TEST(Evaluate, DegenerateReportIsFlagged) {
  auto d = small_data();
  auto m = tiny_model(d);
  auto ev = evaluate_model(m, {{{"w1"}, {"O"}}});
  EXPECT_EQ(ev.report.overall.gold_count, 0u);
  EXPECT_EQ(ev.report.overall.f1, 0.0);
  EXPECT_NE(report_table(ev.report).find("empty denominator"), std::string::npos);
}

TEST(Evaluate, ReportHasOneRowPerTypeInData) {
  auto d = small_data();
  auto m = tiny_model(d);
  auto ev = evaluate_model(m, d.train);
  for (const char* type : {"TECH", "DOM", "MAT"}) EXPECT_TRUE(ev.report.per_type.count(type));
  const auto csv = report_csv(ev.report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "type,precision,recall,f1,true_positives,predicted,gold");
  EXPECT_EQ(csv.substr(csv.find('\n') + 1, 4), "ALL,");
}

TEST(Predict, EmptyInputGivesEmptyOutput) {
  auto dir = temp_dir("predict_empty");
  auto m = tiny_model(small_data());
  write_file(dir + "/in.txt", "");
  predict_file(m, dir + "/in.txt", dir + "/out.conll");
  EXPECT_EQ(read_file(dir + "/out.conll"), "");
  EXPECT_THROW(predict_file(m, dir + "/missing.txt", dir + "/o.conll"), IoError);
}

TEST(Predict, OutputValidatesAndRoundTripsTokens) {
  auto dir = temp_dir("predict_roundtrip");
  auto d = small_data();
  auto m = tiny_model(d);
  std::string text;
  for (const auto& s : d.dev) {
    for (const auto& t : s.tokens) text += t + " ";
    text += "\n\n";
  }
  write_file(dir + "/in.txt", text);
  auto pred = predict_file(m, dir + "/in.txt", dir + "/out.conll");
  EXPECT_EQ(pred.repairs, 0u);
  auto back = read_conll(dir + "/out.conll");
  ASSERT_EQ(back.size(), d.dev.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].tokens, d.dev[i].tokens);
    EXPECT_TRUE(bio_validate(back[i].tags));
  }
}

TEST(Predict, UnconstrainedOutputIsRepaired) {
  auto d = small_data();
  ModelConfig c = tiny_config();
  c.use_crf = false;
  auto m = tiny_model(d, c);
  std::vector<std::vector<std::string>> inputs;
  for (const auto& s : d.train) inputs.push_back(s.tokens);
  for (const auto& s : predict_sentences(m, inputs).sentences) EXPECT_TRUE(bio_validate(s.tags));
}

TEST(Sweep, ParamsAndErrors) {
  EXPECT_EQ(sweep_params(), (std::vector<std::string>{"conv_filters", "num_layers", "num_heads", "lr"}));
  auto c = apply_sweep_value(tiny_config(), "conv_filters", "64");
  EXPECT_EQ(c.idcnn.filters, 64u);
  EXPECT_EQ(apply_sweep_value(tiny_config(), "lr", "0.5").lr, 0.5);
  try {
    apply_sweep_value(tiny_config(), "bogus", "1");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("conv_filters, num_layers, num_heads, lr"), std::string::npos);
  }
  EXPECT_THROW(apply_sweep_value(tiny_config(), "num_layers", "-1"), ConfigError);
  EXPECT_THROW(apply_sweep_value(tiny_config(), "num_heads", "x"), ConfigError);
  EXPECT_THROW(apply_sweep_value(tiny_config(), "num_heads", "5"), ConfigError);
}

TEST(Sweep, FourRowsDeterministicAndSingleValueMatchesTrain) {
  auto d = small_data();
  const std::vector<std::string> values{"4", "8", "12", "16"};
  auto a = sweep<float>(d.train, d.dev, tiny_config(1), "conv_filters", values);
  auto b = sweep<float>(d.train, d.dev, tiny_config(1), "conv_filters", values);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(sweep_csv(a), sweep_csv(b));
  EXPECT_EQ(sweep_csv(a).substr(0, 26), "value,precision,recall,f1\n");

  ModelConfig c = tiny_config(1);
  c.idcnn.filters = 12;
  auto r = train<float>(d.train, d.dev, c);
  auto m = evaluate_model(r.model, d.dev).report.overall;
  EXPECT_EQ(a[2].metrics.f1, m.f1);
  EXPECT_EQ(a[2].metrics.true_positives, m.true_positives);
  EXPECT_EQ(a[2].metrics.predicted_count, m.predicted_count);
}

TEST(Ablation, FourVariantsAndBwetRowMatchesTrain) {
  auto d = small_data();
  auto rows = ablation<float>(d.train, d.dev, tiny_config(1));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].variant, "bwet");
  EXPECT_EQ(rows[1].variant, "no_fusion");
  EXPECT_EQ(rows[2].variant, "absolute_position");
  EXPECT_EQ(rows[3].variant, "no_crf");
  EXPECT_EQ(rows[0].repairs, 0u);
  auto r = train<float>(d.train, d.dev, tiny_config(1));
  auto m = evaluate_model(r.model, d.dev).report.overall;
  EXPECT_EQ(rows[0].metrics.precision, m.precision);
  EXPECT_EQ(rows[0].metrics.recall, m.recall);
  EXPECT_EQ(rows[0].metrics.f1, m.f1);
  auto table = ablation_table(rows);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
}

TEST(Config, DefaultsMatchPublishedSettings) {
  ModelConfig c;
  EXPECT_EQ(c.batch_size, 32u);
  EXPECT_EQ(c.epochs, 100u);
  EXPECT_EQ(c.lr, 1e-4);
  EXPECT_EQ(c.dropout, 0.5);
  EXPECT_EQ(c.max_len, 128u);
  EXPECT_EQ(c.d_model(), 768u + 128u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonRoundTripPartialAndUnknownKeys) {
  ModelConfig c = toy_config();
  c.rel_value_term = RelValueTerm::projected;
  c.idcnn.iterations = 2;
  EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
  auto partial = config_from_json(nlohmann::json::parse(R"({"epochs": 3, "encoder": {"num_heads": 8}})"));
  EXPECT_EQ(partial.epochs, 3u);
  EXPECT_EQ(partial.num_heads, 8u);
  EXPECT_EQ(partial.batch_size, 32u);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"epochz": 3})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"idcnn": {"width": 3}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"epochs": "many"})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"encoder": {"position_mode": "rotary"}})")), ConfigError);
  auto dir = temp_dir("config_file");
  write_file(dir + "/c.json", "{not json");
  EXPECT_THROW(load_config(dir + "/c.json"), ConfigError);
  EXPECT_THROW(load_config(dir + "/missing.json"), IoError);
}

}  // namespace
}  // namespace bwet::test
