//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_PIPELINE_PIPELINE_H_
#define HEMGEN_PIPELINE_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hemgen/config.h"
#include "hemgen/gnn/model.h"
#include "hemgen/metrics/genmetrics.h"
#include "hemgen/properties.h"
#include "hemgen/seq/generator.h"
#include "hemgen/seq/lstm.h"

namespace hemgen::pipeline {

// Flat key = value run description. Keys:
//   seed, dataset, out_dir
//   gen.*  (GeneratorConfig), gen.val_fraction, gen.checkpoint
//   pred.* (PredictorConfig), pred.checkpoint
//   augment.factor
//   sample.n, sample.temperature, sample.seed
//   filter.target, filter.threshold, filter.direction
// gen.seed, pred.seed and sample.seed default to values derived from seed.
// A non-empty gen.checkpoint or pred.checkpoint loads that model instead of
// training one.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string dataset;
  std::string out_dir = "run";

  seq::GeneratorConfig gen;
  double val_fraction = 0.1;
  std::string gen_checkpoint;

  gnn::PredictorConfig pred;
  std::string pred_checkpoint;

  int augment_factor = 3;

  int sample_n = 1000;
  double sample_temperature = 1.0;
  std::uint64_t sample_seed = 0;

  std::string filter_target = "D";
  double filter_threshold = 9.0;
  metrics::Direction filter_direction = metrics::Direction::kGreater;

  // Defaults with every seed derived from root.
  static RunConfig with_seed(std::uint64_t root);

  // Throws kBadConfig on unknown keys or malformed values. Explicit stage
  // seeds override the derived ones.
  static RunConfig from_text(std::string_view text);
  static RunConfig from_file(const std::string &path);

  // Sorted, fully resolved document.
  std::string to_text() const;
  // SHA-256 hex of to_text().
  std::string hash() const;

  // Throws kBadConfig.
  void validate() const;

  bool operator==(const RunConfig &) const = default;
};

// Files written by run_pipeline, relative to out_dir.
namespace artifact {
inline constexpr std::string_view kConfig = "config.txt";
inline constexpr std::string_view kAugmented = "augmented.smi";
inline constexpr std::string_view kGenerator = "generator.ckpt";
inline constexpr std::string_view kGeneratorHistory = "generator_history.csv";
inline constexpr std::string_view kSamples = "samples.smi";
inline constexpr std::string_view kPredictor = "predictor.ckpt";
inline constexpr std::string_view kPredictorHistory = "predictor_history.csv";
inline constexpr std::string_view kPredictions = "predictions.csv";
inline constexpr std::string_view kEvalJson = "eval.json";
inline constexpr std::string_view kEvalCsv = "eval.csv";
inline constexpr std::string_view kCandidates = "candidates.csv";
inline constexpr std::string_view kManifest = "manifest.json";
}  // namespace artifact

// One SMILES per line, LF terminated. Reading drops a trailing CR and
// keeps empty lines (an empty sample is a real, invalid output).
std::vector<std::string> read_smiles(const std::string &path);
void write_smiles(const std::string &path, std::span<const std::string> smiles);
void write_text(const std::string &path, std::string_view text);
std::string read_text(const std::string &path);

// Header smiles,OB(CO2),r0,HGAS,HSUB,Q,D,P,EG,h50, shortest round-trip
// numbers.
std::string candidates_csv(std::span<const metrics::Candidate> rows);
// Throws kMissingColumn, kUnparseableRow(line).
std::vector<metrics::Candidate> parse_candidates_csv(std::string_view text);

std::string generator_history_csv(const seq::TrainingHistory &history);
std::string predictor_history_csv(const std::vector<double> &train_rmse,
                                  const std::vector<double> &test_rmse);

// EvalReport JSON with a config_hash member added.
std::string eval_json(const metrics::EvalReport &report, std::string_view config_hash);

// {"config_hash", "artifacts": {name: {"sha256", "config_hash"}}} over the
// given files in out_dir, merged over the entries of previous (empty for a
// fresh manifest). The top-level hash is that of the latest writer.
std::string manifest_json(const std::string &out_dir, std::span<const std::string_view> files,
                          std::string_view config_hash, std::string_view previous = {});

// Merges the files into out_dir/manifest.json.
void update_manifest(const std::string &out_dir, std::span<const std::string_view> files,
                     std::string_view config_hash);

// Unique canonical forms of the valid generated strings absent from the
// training set, in order of first appearance.
std::vector<std::string> novel_valid(std::span<const std::string> generated,
                                     std::span<const std::string> training);

struct PipelineResult {
  std::string config_hash;
  metrics::EvalReport report;
  std::vector<metrics::Candidate> candidates;
};

struct PipelineOptions {
  std::function<void(std::string_view stage)> on_stage;
  std::function<void(int epoch, const seq::TrainingHistory &)> on_generator_epoch;
  std::function<void(int epoch, double train_rmse)> on_predictor_epoch;
};

// ingest -> augment -> train-gen -> sample -> train-pred -> predict ->
// evaluate -> filter, writing every artifact listed above into out_dir.
// Failures surface as StageError carrying the stage name and the original
// code. Outputs depend only on the config and the input files.
PipelineResult run_pipeline(const RunConfig &config, const PipelineOptions &options = {});

}  // namespace hemgen::pipeline

#endif  // HEMGEN_PIPELINE_PIPELINE_H_
