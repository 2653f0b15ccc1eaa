//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hemgen/chem/smiles.h"
#include "hemgen/chem/writer.h"
#include "hemgen/dataset.h"
#include "hemgen/error.h"
#include "hemgen/gnn/predictor.h"
#include "hemgen/metrics/genmetrics.h"
#include "hemgen/pipeline/pipeline.h"
#include "hemgen/rng.h"
#include "hemgen/seq/generator.h"
#include "hemgen/theory/verifier.h"

namespace {

using namespace hemgen;
using namespace hemgen::pipeline;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out_dir;
  std::vector<std::string> sets;  // key=value overrides
  bool quiet = false;
};

// Config file, then --set pairs, then the common flags, then per-command
// overrides; the resolved document is what every output records.
RunConfig resolve(const Common &c, const KeyValues &extra = {}) {
  KeyValues kv = c.config.empty() ? KeyValues() : KeyValues::parse(read_text(c.config));
  for (const auto &s: c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(Errc::kBadConfig, "--set expects key=value, got '" + s + "'");
    kv.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.seed)
    kv.set("seed", *c.seed);
  if (!c.out_dir.empty())
    kv.set("out_dir", c.out_dir);
  for (const auto &[k, v]: extra.entries())
    kv.set(k, v);
  return RunConfig::from_text(kv.to_text());
}

std::string in_dir(const RunConfig &cfg, std::string_view name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void prepare_dir(const RunConfig &cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  write_text(in_dir(cfg, artifact::kConfig), cfg.to_text());
}

// A .csv input is a dataset (SMILES column); anything else is a SMILES list.
std::vector<std::string> load_molecules(const std::string &path, bool skip_empty) {
  if (std::filesystem::path(path).extension() == ".csv")
    return smiles_of(read_dataset(path).records);
  auto lines = read_smiles(path);
  if (skip_empty)
    std::erase(lines, std::string());
  return lines;
}

void log(const Common &c, const std::string &msg) {
  if (!c.quiet)
    std::cerr << msg << '\n';
}

int cmd_augment(const Common &c, const std::string &input, std::optional<int> factor,
                std::string output) {
  KeyValues extra;
  if (factor)
    extra.set("augment.factor", *factor);
  const auto cfg = resolve(c, extra);
  prepare_dir(cfg);
  const auto mols = load_molecules(input, true);
  const auto out = chem::augment_dataset(mols, cfg.augment_factor,
                                         derive_seed(cfg.seed, "generator.augment"));
  if (output.empty())
    output = in_dir(cfg, artifact::kAugmented);
  write_smiles(output, out);
  log(c, std::to_string(mols.size()) + " molecules -> " + std::to_string(out.size()) +
             " strings in " + output);
  return 0;
}

int cmd_train_gen(const Common &c, const std::string &input, std::optional<int> epochs) {
  KeyValues extra;
  if (epochs)
    extra.set("gen.epochs", *epochs);
  const auto cfg = resolve(c, extra);
  prepare_dir(cfg);
  const auto corpus = load_molecules(input.empty() ? cfg.dataset : input, true);
  seq::TrainOptions opts;
  opts.val_fraction = cfg.val_fraction;
  opts.augment_factor = cfg.augment_factor;
  opts.on_epoch = [&](int epoch, const seq::TrainingHistory &h) {
    log(c, "epoch " + std::to_string(epoch + 1) + " train " + format_double(h.train_loss.back()) +
               " val " + format_double(h.val_loss.back()));
  };
  const auto run = seq::train(cfg.gen, corpus, opts);
  run.checkpoint.save(in_dir(cfg, artifact::kGenerator));
  write_text(in_dir(cfg, artifact::kGeneratorHistory), generator_history_csv(run.history));
  const std::string_view files[] = { artifact::kConfig, artifact::kGenerator,
                                     artifact::kGeneratorHistory };
  update_manifest(cfg.out_dir, files, cfg.hash());
  return 0;
}

int cmd_sample(const Common &c, std::string checkpoint, std::optional<int> n,
               std::optional<double> temperature, std::string output) {
  KeyValues extra;
  if (n)
    extra.set("sample.n", *n);
  if (temperature)
    extra.set("sample.temperature", *temperature);
  const auto cfg = resolve(c, extra);
  prepare_dir(cfg);
  if (checkpoint.empty())
    checkpoint = cfg.gen_checkpoint.empty() ? in_dir(cfg, artifact::kGenerator) : cfg.gen_checkpoint;
  const auto ck = seq::GeneratorCheckpoint::load(checkpoint);
  seq::SampleOptions so;
  so.n = cfg.sample_n;
  so.temperature = cfg.sample_temperature;
  so.seed = cfg.sample_seed;
  const auto samples = seq::sample(ck, so);
  if (output.empty())
    output = in_dir(cfg, artifact::kSamples);
  write_smiles(output, samples);
  log(c, std::to_string(samples.size()) + " samples in " + output);
  return 0;
}

int cmd_evaluate(const Common &c, const std::string &generated, std::string training,
                 const std::string &predictions) {
  const auto cfg = resolve(c);
  prepare_dir(cfg);
  if (training.empty())
    training = cfg.dataset;
  const auto gen = load_molecules(generated, false);
  const auto train = load_molecules(training, true);
  std::vector<PropertyVector> preds;
  if (!predictions.empty()) {
    // Predictions are keyed by canonical form and expanded over the valid
    // generated strings.
    std::map<std::string, PropertyVector> by_canon;
    for (const auto &row: parse_candidates_csv(read_text(predictions)))
      by_canon[chem::canonical_smiles(row.smiles)] = row.properties;
    for (const auto &s: gen) {
      if (!chem::is_valid(s))
        continue;
      const auto it = by_canon.find(chem::canonical_smiles(s));
      if (it == by_canon.end())
        throw Error(Errc::kLengthMismatch, "no prediction for '" + s + "'");
      preds.push_back(it->second);
    }
  }
  const auto report = metrics::evaluate(gen, train, preds);
  write_text(in_dir(cfg, artifact::kEvalJson), eval_json(report, cfg.hash()));
  write_text(in_dir(cfg, artifact::kEvalCsv), report.to_csv());
  const std::string_view files[] = { artifact::kConfig, artifact::kEvalJson, artifact::kEvalCsv };
  update_manifest(cfg.out_dir, files, cfg.hash());
  std::cout << "validity " << format_double(report.validity) << "\nnovelty "
            << format_double(report.novelty) << "\nuniqueness " << format_double(report.uniqueness)
            << '\n';
  return 0;
}

int cmd_train_pred(const Common &c, std::string dataset, std::optional<int> epochs) {
  KeyValues extra;
  if (epochs)
    extra.set("pred.epochs", *epochs);
  const auto cfg = resolve(c, extra);
  prepare_dir(cfg);
  if (dataset.empty())
    dataset = cfg.dataset;
  const auto records = read_dataset(dataset, { .drop_invalid = true }).records;
  gnn::PredictorTrainOptions opts;
  opts.on_epoch = [&](int epoch, const gnn::PredictorHistory &h) {
    if ((epoch + 1) % 10 == 0 || epoch + 1 == cfg.pred.epochs)
      log(c, "epoch " + std::to_string(epoch + 1) + " train_rmse " +
                 format_double(h.train_rmse.back()));
  };
  const auto run = gnn::train_predictor(cfg.pred, records, opts);
  run.checkpoint.save(in_dir(cfg, artifact::kPredictor));
  write_text(in_dir(cfg, artifact::kPredictorHistory),
             predictor_history_csv(run.history.train_rmse, run.history.test_rmse));

  nlohmann::json metrics_doc;
  metrics_doc["config_hash"] = cfg.hash();
  const auto split_metrics = [&](const std::vector<std::size_t> &idx) {
    nlohmann::json out = nlohmann::json::object();
    if (idx.size() < 2)
      return out;
    std::vector<std::string> smiles;
    std::vector<PropertyVector> truth;
    for (const auto i: idx) {
      smiles.push_back(records[i].smiles);
      truth.push_back(records[i].properties);
    }
    const auto pred = gnn::predict_properties(run.checkpoint, smiles);
    for (int t = 0; t < kTargetCount; ++t) {
      std::vector<double> yt, yp;
      for (std::size_t k = 0; k < truth.size(); ++k) {
        yt.push_back(truth[k][t]);
        yp.push_back(pred[k][t]);
      }
      try {
        const auto m = gnn::regression_metrics(yt, yp);
        out[std::string(kTargetNames[t])] = { { "r2", m.r2 }, { "mae", m.mae },
                                              { "rmse", m.rmse }, { "n", m.n } };
      } catch (const Error &) {
        out[std::string(kTargetNames[t])] = nullptr;
      }
    }
    return out;
  };
  metrics_doc["train"] = split_metrics(run.train_indices);
  metrics_doc["test"] = split_metrics(run.test_indices);
  write_text(in_dir(cfg, "predictor_metrics.json"), metrics_doc.dump(2) + "\n");
  const std::string_view files[] = { artifact::kConfig, artifact::kPredictor,
                                     artifact::kPredictorHistory, "predictor_metrics.json" };
  update_manifest(cfg.out_dir, files, cfg.hash());
  return 0;
}

int cmd_predict(const Common &c, std::string checkpoint, const std::string &input,
                std::string output) {
  const auto cfg = resolve(c);
  prepare_dir(cfg);
  if (checkpoint.empty())
    checkpoint = cfg.pred_checkpoint.empty() ? in_dir(cfg, artifact::kPredictor) : cfg.pred_checkpoint;
  const auto ck = gnn::PredictorCheckpoint::load(checkpoint);
  std::vector<std::string> valid;
  std::size_t skipped = 0;
  for (const auto &s: load_molecules(input, true)) {
    if (chem::is_valid(s))
      valid.push_back(chem::canonical_smiles(s));
    else
      ++skipped;
  }
  const auto preds = gnn::predict_properties(ck, valid);
  std::vector<metrics::Candidate> rows;
  for (std::size_t i = 0; i < valid.size(); ++i)
    rows.push_back({ valid[i], preds[i] });
  if (output.empty())
    output = in_dir(cfg, artifact::kPredictions);
  write_text(output, candidates_csv(rows));
  log(c, std::to_string(rows.size()) + " predictions in " + output + ", " +
             std::to_string(skipped) + " invalid inputs skipped");
  return 0;
}

int cmd_filter(const Common &c, const std::string &input, std::optional<std::string> target,
               std::optional<double> threshold, std::optional<std::string> direction,
               std::string output) {
  KeyValues extra;
  if (target)
    extra.set("filter.target", *target);
  if (threshold)
    extra.set("filter.threshold", *threshold);
  if (direction)
    extra.set("filter.direction", *direction);
  const auto cfg = resolve(c, extra);
  prepare_dir(cfg);
  const auto rows = parse_candidates_csv(read_text(input));
  std::vector<std::string> smiles;
  std::vector<PropertyVector> props;
  for (const auto &r: rows) {
    smiles.push_back(r.smiles);
    props.push_back(r.properties);
  }
  const auto kept = metrics::filter_by_property(smiles, props, cfg.filter_target,
                                                cfg.filter_threshold, cfg.filter_direction);
  if (output.empty())
    output = in_dir(cfg, artifact::kCandidates);
  write_text(output, candidates_csv(kept));
  log(c, std::to_string(kept.size()) + " of " + std::to_string(rows.size()) + " kept (" +
             cfg.filter_target + " " + std::string(metrics::direction_symbol(cfg.filter_direction)) +
             " " + format_double(cfg.filter_threshold) + ")");
  return 0;
}

int cmd_verify_theory(const Common &c, const theory::TheoryOptions &opts_in) {
  theory::TheoryOptions opts = opts_in;
  opts.seed = c.seed.value_or(0);
  const std::string doc = theory::verify_theory_json(opts);
  std::cout << doc << '\n';
  if (!c.out_dir.empty()) {
    std::filesystem::create_directories(c.out_dir);
    write_text((std::filesystem::path(c.out_dir) / "theory.json").string(), doc + "\n");
  }
  return nlohmann::json::parse(doc)["pass"].get<bool>() ? 0 : 1;
}

int cmd_report(const Common &c) {
  const auto cfg = resolve(c);
  nlohmann::json out;
  out["out_dir"] = cfg.out_dir;
  const auto read_json = [&](std::string_view name) -> nlohmann::json {
    const auto path = in_dir(cfg, name);
    if (!std::filesystem::exists(path))
      return nullptr;
    return nlohmann::json::parse(read_text(path));
  };
  const auto eval = read_json(artifact::kEvalJson);
  if (!eval.is_null()) {
    for (const auto key: { "validity", "novelty", "novelty_among_valid", "uniqueness",
                           "intra_tanimoto", "tanimoto_vs_training", "config_hash" })
      out["evaluation"][key] = eval[key];
    out["evaluation"]["counts"] = eval["counts"];
  }
  const auto cand_path = in_dir(cfg, artifact::kCandidates);
  if (std::filesystem::exists(cand_path)) {
    const auto rows = parse_candidates_csv(read_text(cand_path));
    out["candidates"]["count"] = rows.size();
    for (const auto &r: rows)
      out["candidates"]["molecules"].push_back(
          { { "smiles", r.smiles }, { "D", r.properties[kTargetD] },
            { "P", r.properties[kTargetP] }, { "h50", r.properties[kTargetH50] } });
  }
  out["predictor"] = read_json("predictor_metrics.json");
  out["theory"] = read_json("theory.json");
  out["manifest"] = read_json(artifact::kManifest);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_run(const Common &c) {
  const auto cfg = resolve(c);
  PipelineOptions opts;
  opts.on_stage = [&](std::string_view s) { log(c, "stage " + std::string(s)); };
  opts.on_generator_epoch = [&](int epoch, const seq::TrainingHistory &h) {
    log(c, "gen epoch " + std::to_string(epoch + 1) + " loss " + format_double(h.train_loss.back()));
  };
  const auto result = run_pipeline(cfg, opts);
  std::cout << "config_hash " << result.config_hash << "\nvalidity "
            << format_double(result.report.validity) << "\nnovelty "
            << format_double(result.report.novelty) << "\ncandidates " << result.candidates.size()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "hemgen: generative modeling and property prediction for energetic molecules" };
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--seed", common.seed, "Root seed; every stage seed derives from it");
  app.add_option("--config", common.config, "Run configuration file (key = value)")
      ->check(CLI::ExistingFile);
  app.add_option("--out-dir", common.out_dir, "Directory for outputs and the resolved config");
  app.add_option("--set", common.sets, "Configuration override key=value (repeatable)");
  app.add_flag("--quiet", common.quiet, "Suppress progress output");

  std::function<int()> action;

  auto *augment = app.add_subcommand("augment", "Augment SMILES with random equivalent writings");
  std::string aug_input, aug_output;
  std::optional<int> aug_factor;
  augment->add_option("--input", aug_input, "SMILES list or dataset CSV")->required();
  augment->add_option("--factor", aug_factor, "Strings per molecule (augment.factor)");
  augment->add_option("--output", aug_output, "Output SMILES list");
  augment->callback([&] { action = [&] { return cmd_augment(common, aug_input, aug_factor, aug_output); }; });

  auto *train_gen = app.add_subcommand("train-gen", "Train the recurrent generator");
  std::string tg_input;
  std::optional<int> tg_epochs;
  train_gen->add_option("--input", tg_input, "Training SMILES list or dataset CSV (default: dataset key)");
  train_gen->add_option("--epochs", tg_epochs, "Epochs (gen.epochs)");
  train_gen->callback([&] { action = [&] { return cmd_train_gen(common, tg_input, tg_epochs); }; });

  auto *sample = app.add_subcommand("sample", "Sample SMILES from a generator checkpoint");
  std::string s_ckpt, s_output;
  std::optional<int> s_n;
  std::optional<double> s_temp;
  sample->add_option("--checkpoint", s_ckpt, "Generator checkpoint (default: out-dir/generator.ckpt)");
  sample->add_option("--n", s_n, "Number of samples (sample.n)");
  sample->add_option("--temperature", s_temp, "Softmax temperature (sample.temperature)");
  sample->add_option("--output", s_output, "Output SMILES list");
  sample->callback([&] { action = [&] { return cmd_sample(common, s_ckpt, s_n, s_temp, s_output); }; });

  auto *evaluate = app.add_subcommand("evaluate", "Library metrics for a generated set");
  std::string e_gen, e_train, e_pred;
  evaluate->add_option("--generated", e_gen, "Generated SMILES list")->required();
  evaluate->add_option("--training", e_train, "Training SMILES list or dataset CSV (default: dataset key)");
  evaluate->add_option("--predictions", e_pred, "Predictions CSV for property summaries");
  evaluate->callback([&] { action = [&] { return cmd_evaluate(common, e_gen, e_train, e_pred); }; });

  auto *train_pred = app.add_subcommand("train-pred", "Train the graph property predictor");
  std::string tp_dataset;
  std::optional<int> tp_epochs;
  train_pred->add_option("--dataset", tp_dataset, "Dataset CSV (default: dataset key)");
  train_pred->add_option("--epochs", tp_epochs, "Epochs (pred.epochs)");
  train_pred->callback([&] { action = [&] { return cmd_train_pred(common, tp_dataset, tp_epochs); }; });

  auto *predict = app.add_subcommand("predict", "Predict the nine properties for SMILES");
  std::string p_ckpt, p_input, p_output;
  predict->add_option("--checkpoint", p_ckpt, "Predictor checkpoint (default: out-dir/predictor.ckpt)");
  predict->add_option("--input", p_input, "SMILES list or dataset CSV")->required();
  predict->add_option("--output", p_output, "Output predictions CSV");
  predict->callback([&] { action = [&] { return cmd_predict(common, p_ckpt, p_input, p_output); }; });

  auto *filter = app.add_subcommand("filter", "Keep predictions passing a property threshold");
  std::string f_input, f_output;
  std::optional<std::string> f_target, f_dir;
  std::optional<double> f_threshold;
  filter->add_option("--input", f_input, "Predictions CSV")->required();
  filter->add_option("--target", f_target, "Property name (filter.target)");
  filter->add_option("--threshold", f_threshold, "Threshold (filter.threshold)");
  filter->add_option("--direction", f_dir, "One of > >= < <= (filter.direction)");
  filter->add_option("--output", f_output, "Output candidates CSV");
  filter->callback([&] {
    action = [&] { return cmd_filter(common, f_input, f_target, f_threshold, f_dir, f_output); };
  });

  auto *verify = app.add_subcommand("verify-theory", "Numerical checks on fixed embeddings");
  theory::TheoryOptions t_opts;
  verify->add_option("--V", t_opts.V, "Vocabulary size")->capture_default_str();
  verify->add_option("--d", t_opts.d, "Embedding width")->capture_default_str();
  verify->add_option("--dt", t_opts.d_t, "Trainable width")->capture_default_str();
  verify->add_option("--epsilon", t_opts.epsilon, "Failure probability")->capture_default_str();
  verify->add_option("--batches", t_opts.batches, "Random conditioning batches")->capture_default_str();
  verify->add_option("--n", t_opts.bounds.n, "Training set size")->capture_default_str();
  verify->add_option("--params", t_opts.bounds.D, "Network parameter count")->capture_default_str();
  verify->add_option("--delta", t_opts.bounds.delta, "Confidence level")->capture_default_str();
  verify->callback([&] { action = [&] { return cmd_verify_theory(common, t_opts); }; });

  auto *report = app.add_subcommand("report", "Summarize the artifacts in an output directory");
  report->callback([&] { action = [&] { return cmd_report(common); }; });

  auto *run = app.add_subcommand("run", "Run every stage end to end");
  run->callback([&] { action = [&] { return cmd_run(common); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return action();
  } catch (const StageError &e) {
    std::cerr << "hemgen " << command << ": stage " << e.stage() << ": "
              << errc_name(e.code()) << ": " << e.what() << '\n';
  } catch (const Error &e) {
    std::cerr << "hemgen " << command << ": " << errc_name(e.code()) << ": " << e.what() << '\n';
  } catch (const std::exception &e) {
    std::cerr << "hemgen " << command << ": " << e.what() << '\n';
  }
  return 2;
}
