#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bwet/bwet.hpp"

namespace {

using Scalar = float;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bwet::IoError("cannot write '" + path + "'");
  out << text;
}

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw bwet::UsageError("--values contains an empty entry: '" + list + "'");
    out.push_back(item);
  }
  if (out.empty()) throw bwet::UsageError("--values is empty");
  return out;
}

struct DataArgs {
  std::string config, train, dev;
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--config", a.config, "JSON model configuration")->required();
  cmd->add_option("--train", a.train, "training corpus (CoNLL)")->required();
  cmd->add_option("--dev", a.dev, "development corpus (CoNLL)")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bwet: technical-word enhanced sequence labeling"};
  app.require_subcommand(1);

  DataArgs train_args;
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "train a model; writes metrics.csv, best.ckpt, final.ckpt");
  add_data_options(train_cmd, train_args);
  train_cmd->add_option("--out", train_out, "output directory")->required();

  std::string eval_model, eval_data, eval_csv;
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint on a labeled corpus");
  eval_cmd->add_option("--model", eval_model, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "labeled corpus (CoNLL)")->required();
  eval_cmd->add_option("--csv", eval_csv, "also write the per-type CSV here");

  std::string pred_model, pred_input, pred_output;
  auto* pred_cmd = app.add_subcommand("predict", "tag plain text, one sentence per line");
  pred_cmd->add_option("--model", pred_model, "checkpoint file")->required();
  pred_cmd->add_option("--input", pred_input, "plain-text input")->required();
  pred_cmd->add_option("--output", pred_output, "CoNLL output")->required();

  DataArgs sweep_args;
  std::string sweep_param, sweep_values, sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "train once per value of one hyperparameter");
  add_data_options(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--param", sweep_param, "conv_filters, num_layers, num_heads or lr")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV output (default stdout)");

  DataArgs abl_args;
  std::string abl_out;
  auto* abl_cmd = app.add_subcommand("ablation", "compare bwet, no_fusion, absolute_position and no_crf");
  add_data_options(abl_cmd, abl_args);
  abl_cmd->add_option("--out", abl_out, "CSV output; the table goes to stdout");

  std::size_t synth_count = 50;
  std::uint64_t synth_seed = 1;
  std::string synth_train, synth_dev;
  auto* synth_cmd = app.add_subcommand("synth", "write the synthetic pattern corpus split 8:2");
  synth_cmd->add_option("--count", synth_count, "number of sentences");
  synth_cmd->add_option("--seed", synth_seed, "generator and split seed");
  synth_cmd->add_option("--train", synth_train, "training split output")->required();
  synth_cmd->add_option("--dev", synth_dev, "dev split output")->required();

  bool config_toy = false;
  auto* config_cmd = app.add_subcommand("config", "print a complete configuration file");
  config_cmd->add_flag("--toy", config_toy, "the small configuration used by the tests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& c : msg)
      if (c == '\n') c = ' ';
    std::fprintf(stderr, "error: usage: %s\n", msg.c_str());
    return 2;
  }

  try {
    if (*train_cmd) {
      auto config = bwet::load_config(train_args.config);
      auto result = bwet::train<Scalar>(bwet::read_conll(train_args.train), bwet::read_conll(train_args.dev), config,
                                        bwet::TrainOptions{train_out, &std::cerr});
      std::cout << "best_epoch " << result.best_epoch << " best_dev_f1 " << bwet::fixed6(result.best_dev_f1) << '\n';
    } else if (*eval_cmd) {
      auto model = bwet::BwetModel<Scalar>::load(eval_model);
      auto ev = bwet::evaluate_model(model, bwet::read_conll(eval_data));
      std::cout << bwet::report_table(ev.report);
      if (ev.repairs) std::cout << "repaired tags: " << ev.repairs << '\n';
      if (!eval_csv.empty()) write_text(eval_csv, bwet::report_csv(ev.report));
    } else if (*pred_cmd) {
      auto model = bwet::BwetModel<Scalar>::load(pred_model);
      bwet::predict_file(model, pred_input, pred_output, &std::cerr);
    } else if (*sweep_cmd) {
      auto config = bwet::load_config(sweep_args.config);
      auto rows = bwet::sweep<Scalar>(bwet::read_conll(sweep_args.train), bwet::read_conll(sweep_args.dev), config,
                                      sweep_param, split_values(sweep_values), &std::cerr);
      write_text(sweep_out, bwet::sweep_csv(rows));
    } else if (*abl_cmd) {
      auto config = bwet::load_config(abl_args.config);
      auto rows = bwet::ablation<Scalar>(bwet::read_conll(abl_args.train), bwet::read_conll(abl_args.dev), config,
                                         &std::cerr);
      if (abl_out.empty()) {
        std::cout << bwet::ablation_csv(rows);
      } else {
        std::cout << bwet::ablation_table(rows);
        write_text(abl_out, bwet::ablation_csv(rows));
      }
    } else if (*synth_cmd) {
      auto split = bwet::split_dataset(bwet::synthetic_corpus(synth_count, synth_seed), 8, 2, synth_seed);
      bwet::write_conll(synth_train, split.train);
      bwet::write_conll(synth_dev, split.test);
    } else if (*config_cmd) {
      std::cout << bwet::to_json(config_toy ? bwet::toy_config() : bwet::ModelConfig{}).dump(2) << '\n';
    }
  } catch (const bwet::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.kind().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
