//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_GNN_PREDICTOR_H_
#define HEMGEN_GNN_PREDICTOR_H_

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hemgen/dataset.h"
#include "hemgen/gnn/model.h"
#include "hemgen/optim.h"
#include "hemgen/properties.h"
#include "hemgen/rng.h"

namespace hemgen::gnn {

// Maps raw property vectors to the training space: log10 on h50 when
// enabled, then per-target standardization with population statistics.
// NaN entries stay NaN.
class TargetScaler {
public:
  TargetScaler() = default;
  TargetScaler(PropertyVector mean, PropertyVector stddev, bool log_h50);

  // Statistics over the finite entries of each column. Throws
  // kDegenerateTarget on a constant or empty column, or a non-positive h50
  // under log scaling.
  static TargetScaler fit(std::span<const PropertyVector> values, bool log_h50);

  PropertyVector transform(const PropertyVector &raw) const;
  PropertyVector inverse(const PropertyVector &scaled) const;

  const PropertyVector &mean() const noexcept { return mean_; }
  const PropertyVector &stddev() const noexcept { return stddev_; }
  bool log_h50() const noexcept { return log_h50_; }

  bool operator==(const TargetScaler &) const = default;

private:
  PropertyVector mean_ {};
  PropertyVector stddev_ {};
  bool log_h50_ = true;
};

struct ColumnMetrics {
  double r2 = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
};

// Pairs whose true value is NaN are skipped. Throws kLengthMismatch,
// kTooFewRows (fewer than 2 pairs), kZeroVariance.
ColumnMetrics regression_metrics(std::span<const double> y_true, std::span<const double> y_pred);
std::array<ColumnMetrics, kTargetCount> regression_metrics(std::span<const PropertyVector> y_true,
                                                           std::span<const PropertyVector> y_pred);

struct PredictorCheckpoint {
  static constexpr std::uint32_t kVersion = 1;

  PredictorConfig config;
  TargetScaler scaler;
  PredictorParameters params;
  AdamState adam;
  Rng::State rng {};

  // "HEMGENPK", u32 version, config text, scaler (9 means, 9 stddevs, u32
  // log flag), u32 tensor count, named tensors, u64 Adam step, u32 moment
  // count, named moments, 4 x u64 shuffle state. Little-endian.
  std::vector<std::uint8_t> serialize() const;
  // Throws kCheckpointFormat, kCheckpointVersion.
  static PredictorCheckpoint deserialize(std::span<const std::uint8_t> bytes);

  void save(const std::string &path) const;
  static PredictorCheckpoint load(const std::string &path);
};

struct PredictorHistory {
  // Per epoch, standardized space, over observed entries.
  std::vector<double> train_rmse;
  std::vector<double> test_rmse;  // NaN without a test split

  int epochs() const noexcept { return static_cast<int>(train_rmse.size()); }
};

struct PredictorRun {
  PredictorCheckpoint checkpoint;
  PredictorHistory history;
  // Indices into the input records.
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

struct PredictorTrainOptions {
  std::function<void(int epoch, const PredictorHistory &)> on_epoch;
};

// The split shuffles with derive_seed(seed, "predictor.split") and holds
// out floor(test_fraction * n) records (at most n - 2). Batches are
// reshuffled every epoch from derive_seed(seed, "predictor.train"). Throws
// kEmptyInput (fewer than 2 records), kInvalidSmiles(index),
// kDegenerateTarget, kUnsupportedElement(index).
PredictorRun train_predictor(const PredictorConfig &config,
                             std::span<const MoleculeRecord> records,
                             const PredictorTrainOptions &options = {});

// Throws kInvalidSmiles(index), kUnsupportedElement(index).
std::vector<GraphTensors> featurize_all(std::span<const std::string> smiles);

// Raw-unit predictions. Throws like featurize_all.
std::vector<PropertyVector> predict_properties(const PredictorCheckpoint &ckpt,
                                               std::span<const std::string> smiles);

// Standardized-space predictions, one row per graph.
std::vector<PropertyVector> predict_scaled(const PredictorParameters &params,
                                           std::span<const GraphTensors> graphs);

}  // namespace hemgen::gnn

#endif  // HEMGEN_GNN_PREDICTOR_H_
