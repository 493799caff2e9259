#pragma once

#include <string>
#include <vector>

#include "bwet/pipeline/trainer.hpp"

namespace bwet {

inline const std::vector<std::string>& sweep_params() {
  static const std::vector<std::string> names{"conv_filters", "num_layers", "num_heads", "lr"};
  return names;
}

/// Copy of `base` with one sweep axis set from its textual value.
inline ModelConfig apply_sweep_value(ModelConfig base, const std::string& param, const std::string& value) {
  auto as_count = [&]() -> std::size_t {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty() || value[0] == '-' || v == 0) {
      throw ConfigError("sweep value '" + value + "' for " + param + " must be a positive integer");
    }
    return static_cast<std::size_t>(v);
  };
  if (param == "conv_filters") {
    base.idcnn.filters = as_count();
  } else if (param == "num_layers") {
    base.num_layers = as_count();
  } else if (param == "num_heads") {
    base.num_heads = as_count();
  } else if (param == "lr") {
    std::size_t used = 0;
    try {
      base.lr = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) throw ConfigError("sweep value '" + value + "' for lr is not a number");
  } else {
    std::string names;
    for (const auto& n : sweep_params()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown sweep parameter '" + param + "' (valid: " + names + ")");
  }
  base.validate();
  return base;
}

struct SweepRow {
  std::string value;
  PrfMetrics metrics;
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "value,precision,recall,f1\n";
  for (const auto& r : rows) {
    out += r.value + ',' + fixed6(r.metrics.precision) + ',' + fixed6(r.metrics.recall) + ',' +
           fixed6(r.metrics.f1) + '\n';
  }
  return out;
}

/// One full train + evaluate per value under the base seed. Each row scores
/// the final model on the dev set.
template <typename T>
std::vector<SweepRow> sweep(const std::vector<TaggedSentence>& train_set, const std::vector<TaggedSentence>& dev_set,
                            const ModelConfig& base, const std::string& param, const std::vector<std::string>& values,
                            std::ostream* log = nullptr) {
  if (values.empty()) throw UsageError("sweep: no values given");
  std::vector<ModelConfig> configs;
  for (const auto& v : values) configs.push_back(apply_sweep_value(base, param, v));
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (log) *log << "sweep " << param << "=" << values[i] << '\n';
    auto result = train<T>(train_set, dev_set, configs[i], TrainOptions{"", nullptr});
    rows.push_back({values[i], evaluate_model(result.model, dev_set).report.overall});
  }
  return rows;
}

struct AblationRow {
  std::string variant;
  PrfMetrics metrics;
  std::size_t repairs = 0;
};

/// The four compared variants, in report order.
inline std::vector<std::pair<std::string, ModelConfig>> ablation_variants(const ModelConfig& base) {
  ModelConfig no_fusion = base;
  no_fusion.use_fusion = false;
  ModelConfig absolute = base;
  absolute.position_mode = PositionMode::absolute;
  ModelConfig no_crf = base;
  no_crf.use_crf = false;
  return {{"bwet", base}, {"no_fusion", no_fusion}, {"absolute_position", absolute}, {"no_crf", no_crf}};
}

inline std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "variant,precision,recall,f1,repairs\n";
  for (const auto& r : rows) {
    out += r.variant + ',' + fixed6(r.metrics.precision) + ',' + fixed6(r.metrics.recall) + ',' +
           fixed6(r.metrics.f1) + ',' + std::to_string(r.repairs) + '\n';
  }
  return out;
}

inline std::string ablation_table(const std::vector<AblationRow>& rows) {
  char line[128];
  std::string out;
  std::snprintf(line, sizeof line, "%-18s %9s %9s %9s %8s\n", "variant", "precision", "recall", "f1", "repairs");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-18s %9.4f %9.4f %9.4f %8zu\n", r.variant.c_str(), r.metrics.precision,
                  r.metrics.recall, r.metrics.f1, r.repairs);
    out += line;
  }
  return out;
}

template <typename T>
std::vector<AblationRow> ablation(const std::vector<TaggedSentence>& train_set,
                                  const std::vector<TaggedSentence>& dev_set, const ModelConfig& base,
                                  std::ostream* log = nullptr) {
  std::vector<AblationRow> rows;
  for (const auto& [name, config] : ablation_variants(base)) {
    config.validate();
    if (log) *log << "ablation variant " << name << '\n';
    auto result = train<T>(train_set, dev_set, config, TrainOptions{"", nullptr});
    Evaluation ev = evaluate_model(result.model, dev_set);
    rows.push_back({name, ev.report.overall, ev.repairs});
  }
  return rows;
}

}  // namespace bwet
