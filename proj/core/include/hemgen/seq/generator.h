//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_SEQ_GENERATOR_H_
#define HEMGEN_SEQ_GENERATOR_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hemgen/optim.h"
#include "hemgen/rng.h"
#include "hemgen/seq/lstm.h"
#include "hemgen/seq/vocabulary.h"

namespace hemgen::seq {

// Binary layout (all integers little-endian):
//   "HEMGENCK" u32 version
//   str config text                     (KeyValues, "gen." prefix stripped)
//   u32 V, V x str token
//   u32 count, count x tensor           (name, u64 rows, u64 cols, f64 data)
//   u64 adam step, u32 count, count x (tensor m, tensor v)
//   4 x u64 PRNG state
// where str is u32 length plus bytes and data is column-major.
struct GeneratorCheckpoint {
  static constexpr std::uint32_t kVersion = 1;

  GeneratorConfig config;
  Vocabulary vocab;
  LstmParameters params;
  AdamState adam;
  Rng::State rng {};

  std::vector<std::uint8_t> serialize() const;
  // Throws kCheckpointFormat or kCheckpointVersion.
  static GeneratorCheckpoint deserialize(std::span<const std::uint8_t> bytes);

  void save(const std::string &path) const;
  static GeneratorCheckpoint load(const std::string &path);
};

struct TrainingHistory {
  std::vector<double> train_loss;  // nats/token, dropout active
  std::vector<double> val_loss;    // NaN when there is no validation split
  std::vector<double> wall_seconds;

  std::size_t epochs() const noexcept { return train_loss.size(); }
  // Compares losses bitwise; wall time is ignored.
  bool same_losses(const TrainingHistory &other) const;
};

struct TrainOptions {
  // Fraction of molecules held out before augmentation, in [0, 0.5].
  double val_fraction = 0.1;
  int augment_factor = 1;
  std::function<void(int epoch, const TrainingHistory &)> on_epoch;
};

struct TrainingSetup {
  GeneratorCheckpoint initial;
  std::vector<std::vector<int>> train;
  std::vector<std::vector<int>> validation;
};

// Splits, augments, builds the vocabulary and initial parameters. Throws
// kEmptyCorpus, kInvalidSmiles(index), kBadConfig.
TrainingSetup prepare_training(const GeneratorConfig &config,
                               std::span<const std::string> corpus,
                               const TrainOptions &options = {});

struct TrainResult {
  GeneratorCheckpoint checkpoint;
  TrainingHistory history;
};

TrainResult run_training(TrainingSetup setup, const TrainOptions &options = {});

inline TrainResult train(const GeneratorConfig &config,
                         std::span<const std::string> corpus,
                         const TrainOptions &options = {}) {
  return run_training(prepare_training(config, corpus, options), options);
}

// Token-weighted mean loss without dropout.
double evaluate_loss(const LstmParameters &params,
                     std::span<const std::vector<int>> sequences,
                     int batch_size);

struct SampleOptions {
  int n = 1;
  double temperature = 1.0;
  // Argmax decoding; temperature is ignored.
  bool greedy = false;
  std::uint64_t seed = 0;
  // 0 uses the checkpoint's max_length.
  int max_length = 0;
};

// Row k draws from its own stream seeded by mix64(seed ^ mix64(k + 1)).
// PAD and BOS are never drawn.
// Throws kBadTemperature, kBadConfig.
std::vector<std::string> sample(const LstmParameters &params,
                                const Vocabulary &vocab, const SampleOptions &options,
                                int default_max_length = 200);

inline std::vector<std::string> sample(const GeneratorCheckpoint &ckpt,
                                       const SampleOptions &options) {
  return sample(ckpt.params, ckpt.vocab, options, ckpt.config.max_length);
}

}  // namespace hemgen::seq

#endif  // HEMGEN_SEQ_GENERATOR_H_
