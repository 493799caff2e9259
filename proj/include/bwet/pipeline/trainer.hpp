#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bwet/corpus/bio.hpp"
#include "bwet/corpus/conll.hpp"
#include "bwet/corpus/metrics.hpp"
#include "bwet/corpus/split.hpp"
#include "bwet/numerics/adam.hpp"
#include "bwet/pipeline/model.hpp"

namespace bwet {

/// Cuts sentences longer than max_len, logging each affected index.
inline std::vector<TaggedSentence> truncate_to_max_len(std::vector<TaggedSentence> sentences, std::size_t max_len,
                                                       const std::string& label, std::ostream* log) {
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto& s = sentences[i];
    if (s.tokens.size() <= max_len) continue;
    if (log) {
      *log << "warning: " << label << " sentence " << i << " truncated from " << s.tokens.size() << " to "
           << max_len << " tokens\n";
    }
    s.tokens.resize(max_len);
    if (s.tags.size() > max_len) s.tags.resize(max_len);
    // A cut can only remove trailing tags, so BIO validity is preserved.
  }
  return sentences;
}

/// O plus B-/I- pairs for every entity type seen, types sorted by name.
inline TagVocab tag_vocab_for(const std::vector<const std::vector<TaggedSentence>*>& corpora) {
  std::set<std::string> types;
  for (const auto* c : corpora)
    for (const auto& s : *c)
      for (const auto& t : s.tags) {
        BioTag b = parse_bio_tag(t);
        if (b.prefix != 'O') types.insert(b.type);
      }
  return TagVocab::from_types(std::vector<std::string>(types.begin(), types.end()));
}

/// Token vocab in order of first appearance.
inline Vocab token_vocab_for(const std::vector<TaggedSentence>& sentences) {
  Vocab v;
  for (const auto& s : sentences)
    for (const auto& t : s.tokens) v.add(t);
  return v;
}

/// Tags in `data` that `vocab` does not know, sorted.
inline std::vector<std::string> unknown_tags(const TagVocab& vocab, const std::vector<TaggedSentence>& data) {
  std::set<std::string> missing;
  for (const auto& s : data)
    for (const auto& t : s.tags)
      if (!vocab.contains(t)) missing.insert(t);
  return {missing.begin(), missing.end()};
}

struct Prediction {
  std::vector<TaggedSentence> sentences;
  std::size_t repairs = 0;  // tags rewritten by bio_repair
};

/// Decodes every sentence. Tokens beyond max_len are tagged O. Outputs that
/// are not guaranteed valid (unconstrained CRF or no CRF) go through
/// bio_repair and the number of rewritten tags is reported.
template <typename T>
Prediction predict_sentences(const BwetModel<T>& model, const std::vector<std::vector<std::string>>& inputs) {
  Prediction out;
  const std::size_t max_len = model.config().max_len;
  const bool needs_repair = !model.config().use_crf || !model.config().crf_constrained;
  for (const auto& tokens : inputs) {
    TaggedSentence s;
    s.tokens = tokens;
    if (!tokens.empty()) {
      std::vector<std::string> head(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(
                                                                          std::min(tokens.size(), max_len)));
      s.tags = model.tags().names(model.decode(head));
      s.tags.resize(tokens.size(), std::string(kOutsideTag));
      if (needs_repair) {
        out.repairs += bio_repair_count(s.tags);
        s.tags = bio_repair(s.tags);
      }
    }
    out.sentences.push_back(std::move(s));
  }
  return out;
}

template <typename T>
Prediction predict_sentences(const BwetModel<T>& model, const std::vector<TaggedSentence>& data) {
  std::vector<std::vector<std::string>> inputs;
  for (const auto& s : data) inputs.push_back(s.tokens);
  return predict_sentences(model, inputs);
}

struct Evaluation {
  EntityReport report;
  double mean_loss = 0.0;
  std::size_t repairs = 0;
};

/// Entity-level scores and mean per-sentence loss (inference mode).
template <typename T>
Evaluation evaluate_model(const BwetModel<T>& model, const std::vector<TaggedSentence>& data) {
  if (auto missing = unknown_tags(model.tags(), data); !missing.empty()) {
    std::string list;
    for (const auto& t : missing) list += (list.empty() ? "" : ", ") + t;
    throw ValidationError("tag vocab mismatch: data uses tags unknown to the model: " + list);
  }
  Evaluation ev;
  Prediction pred = predict_sentences(model, data);
  ev.repairs = pred.repairs;
  ev.report = entity_prf(data, pred.sentences);
  double total = 0.0;
  std::mt19937_64 unused(0);
  for (const auto& s : data) {
    const std::size_t n = std::min(s.tokens.size(), model.config().max_len);
    std::vector<std::string> tokens(s.tokens.begin(), s.tokens.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<std::string> tags(s.tags.begin(), s.tags.begin() + static_cast<std::ptrdiff_t>(n));
    total += static_cast<double>(model.loss(tokens, model.tags().indices(tags), false, unused).value()[0]);
  }
  ev.mean_loss = data.empty() ? 0.0 : total / static_cast<double>(data.size());
  return ev;
}

struct EpochRecord {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  PrfMetrics metrics;
};

inline std::string metrics_csv_header() { return "epoch,split,loss,precision,recall,f1\n"; }

inline std::string metrics_csv_row(const EpochRecord& r) {
  return std::to_string(r.epoch) + ',' + r.split + ',' + fixed6(r.loss) + ',' + fixed6(r.metrics.precision) + ',' +
         fixed6(r.metrics.recall) + ',' + fixed6(r.metrics.f1) + '\n';
}

template <typename T>
struct TrainResult {
  BwetModel<T> model;           // state after the last epoch
  std::vector<EpochRecord> history;
  double best_dev_f1 = 0.0;
  std::size_t best_epoch = 0;   // 0 = initial weights
  Evaluation final_dev;         // last-epoch dev evaluation (train set if dev is empty)
};

struct TrainOptions {
  std::string out_dir;          // empty: write nothing
  std::ostream* log = nullptr;  // progress and warnings
};

/// Mini-batch NLL minimization with Adam and global-norm clipping.
///
/// Writes metrics.csv, best.ckpt (highest dev F1) and final.ckpt into
/// out_dir. Fully determined by (config, data).
template <typename T>
TrainResult<T> train(const std::vector<TaggedSentence>& train_raw, const std::vector<TaggedSentence>& dev_raw,
                     const ModelConfig& config, const TrainOptions& opts = {}) {
  if (train_raw.empty()) throw UsageError("train: training set is empty");
  config.validate();
  for (std::size_t i = 0; i < train_raw.size(); ++i) {
    if (auto bad = first_bio_violation(train_raw[i].tags)) {
      throw ValidationError("train: sentence " + std::to_string(i) + " has invalid BIO at position " +
                            std::to_string(*bad));
    }
  }
  auto train_set = truncate_to_max_len(train_raw, config.max_len, "train", opts.log);
  auto dev_set = truncate_to_max_len(dev_raw, config.max_len, "dev", opts.log);

  const TagVocab tags = tag_vocab_for({&train_set, &dev_set});
  TrainResult<T> result{BwetModel<T>::create(config, tags, token_vocab_for(train_set)), {}, -1.0, 0, {}};
  BwetModel<T>& model = result.model;

  std::vector<std::vector<std::size_t>> gold;
  for (const auto& s : train_set) gold.push_back(tags.indices(s.tags));

  std::ofstream csv;
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    csv.open(opts.out_dir + "/metrics.csv", std::ios::binary);
    if (!csv) throw IoError("cannot write metrics.csv in '" + opts.out_dir + "'");
    csv << metrics_csv_header();
    csv.flush();
  }
  auto save = [&](const std::string& name) {
    if (!opts.out_dir.empty()) model.save(opts.out_dir + "/" + name);
  };
  const auto& select_set = dev_set.empty() ? train_set : dev_set;

  auto params = model.parameters();
  AdamState<T> adam(AdamOptions{config.lr, 0.9, 0.999, 1e-8}, params);
  std::mt19937_64 rng(config.seed + 1);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  if (config.epochs == 0) {
    result.final_dev = evaluate_model(model, select_set);
    result.best_dev_f1 = result.final_dev.report.overall.f1;
    save("best.ckpt");
    save("final.ckpt");
    return result;
  }

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    deterministic_shuffle(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += config.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      model.zero_grad();
      const T inv = static_cast<T>(1.0 / static_cast<double>(end - start));
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        Var<T> loss = model.loss(train_set[i].tokens, gold[i], true, rng);
        const double value = static_cast<double>(loss.value()[0]);
        if (!std::isfinite(value)) {
          throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batch) + " (sentence " + std::to_string(i) + ")");
        }
        epoch_loss += value;
        backward(scale(loss, inv));
      }
      clip_grad_norm(params, config.grad_clip);
      adam_step(params, adam);
    }

    EpochRecord tr{epoch, "train", epoch_loss / static_cast<double>(train_set.size()),
                   entity_prf(train_set, predict_sentences(model, train_set).sentences).overall};
    result.history.push_back(tr);
    if (csv.is_open()) csv << metrics_csv_row(tr);
    Evaluation ev = evaluate_model(model, select_set);
    if (!dev_set.empty()) {
      EpochRecord dv{epoch, "dev", ev.mean_loss, ev.report.overall};
      result.history.push_back(dv);
      if (csv.is_open()) csv << metrics_csv_row(dv);
    }
    if (csv.is_open()) csv.flush();
    if (opts.log) {
      *opts.log << "epoch " << epoch << " train_loss " << fixed6(tr.loss) << " dev_f1 "
                << fixed6(ev.report.overall.f1) << '\n';
    }
    if (ev.report.overall.f1 > result.best_dev_f1) {
      result.best_dev_f1 = ev.report.overall.f1;
      result.best_epoch = epoch;
      save("best.ckpt");
    }
    result.final_dev = std::move(ev);
  }
  save("final.ckpt");
  return result;
}

/// Reads one sentence per line, tokenizes with the model's tokenization,
/// and writes CoNLL predictions. Blank lines are skipped.
template <typename T>
Prediction predict_file(const BwetModel<T>& model, const std::string& input_path, const std::string& output_path,
                        std::ostream* log = nullptr) {
  std::ifstream in(input_path, std::ios::binary);
  if (!in) throw IoError("cannot read input '" + input_path + "'");
  std::vector<std::vector<std::string>> inputs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = tokenize(line, model.config().tokenization);
    if (tokens.empty()) continue;
    if (tokens.size() > model.config().max_len && log) {
      *log << "warning: input line " << line_no << " has " << tokens.size() << " tokens; positions beyond "
           << model.config().max_len << " are tagged O\n";
    }
    inputs.push_back(std::move(tokens));
  }
  Prediction pred = predict_sentences(model, inputs);
  write_conll(output_path, pred.sentences);
  return pred;
}

}  // namespace bwet
