//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/gnn/predictor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string_view>

#include "hemgen/binio.h"
#include "hemgen/chem/smiles.h"
#include "hemgen/config.h"
#include "hemgen/error.h"

namespace hemgen::gnn {

using Eigen::MatrixXd;

namespace {

constexpr std::string_view kMagic = "HEMGENPK";
constexpr std::size_t kPredictChunk = 64;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TargetScaler::TargetScaler(PropertyVector mean, PropertyVector stddev, bool log_h50)
  : mean_(mean), stddev_(stddev), log_h50_(log_h50) { }

TargetScaler TargetScaler::fit(std::span<const PropertyVector> values, bool log_h50) {
  PropertyVector mean {};
  PropertyVector sd {};
  for (int t = 0; t < kTargetCount; ++t) {
    std::vector<double> col;
    for (const auto &v: values) {
      double x = v[t];
      if (!std::isfinite(x))
        continue;
      if (t == kTargetH50 && log_h50) {
        if (!(x > 0.0))
          throw Error(Errc::kDegenerateTarget, "h50 must be positive for log scaling");
        x = std::log10(x);
      }
      col.push_back(x);
    }
    const std::string name(kTargetNames[t]);
    if (col.empty())
      throw Error(Errc::kDegenerateTarget, "target " + name + " has no observed values");
    const double n = static_cast<double>(col.size());
    double m = 0.0;
    for (const double x: col)
      m += x;
    m /= n;
    double var = 0.0;
    for (const double x: col)
      var += (x - m) * (x - m);
    var /= n;
    if (!(var > 0.0))
      throw Error(Errc::kDegenerateTarget, "target " + name + " has zero variance");
    mean[t] = m;
    sd[t] = std::sqrt(var);
  }
  return TargetScaler(mean, sd, log_h50);
}

PropertyVector TargetScaler::transform(const PropertyVector &raw) const {
  PropertyVector out;
  for (int t = 0; t < kTargetCount; ++t) {
    double x = raw[t];
    if (t == kTargetH50 && log_h50_)
      x = x > 0.0 ? std::log10(x) : kNaN;
    out[t] = (x - mean_[t]) / stddev_[t];
  }
  return out;
}

PropertyVector TargetScaler::inverse(const PropertyVector &scaled) const {
  PropertyVector out;
  for (int t = 0; t < kTargetCount; ++t) {
    double x = scaled[t] * stddev_[t] + mean_[t];
    if (t == kTargetH50 && log_h50_)
      x = std::pow(10.0, x);
    out[t] = x;
  }
  return out;
}

ColumnMetrics regression_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size())
    throw Error(Errc::kLengthMismatch, "regression metrics: length mismatch");
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    if (std::isfinite(y_true[i]))
      pairs.emplace_back(y_true[i], y_pred[i]);
  if (pairs.size() < 2)
    throw Error(Errc::kTooFewRows, "regression metrics need at least 2 observed values");
  const double n = static_cast<double>(pairs.size());
  double mean = 0.0;
  for (const auto &[y, p]: pairs)
    mean += y;
  mean /= n;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  double abs_sum = 0.0;
  for (const auto &[y, p]: pairs) {
    ss_res += (y - p) * (y - p);
    ss_tot += (y - mean) * (y - mean);
    abs_sum += std::abs(y - p);
  }
  if (!(ss_tot > 0.0))
    throw Error(Errc::kZeroVariance, "R^2 is undefined for a constant target");
  ColumnMetrics m;
  m.n = pairs.size();
  m.r2 = 1.0 - ss_res / ss_tot;
  m.mae = abs_sum / n;
  m.rmse = std::sqrt(ss_res / n);
  return m;
}

std::array<ColumnMetrics, kTargetCount> regression_metrics(std::span<const PropertyVector> y_true,
                                                           std::span<const PropertyVector> y_pred) {
  if (y_true.size() != y_pred.size())
    throw Error(Errc::kLengthMismatch, "regression metrics: length mismatch");
  std::array<ColumnMetrics, kTargetCount> out;
  std::vector<double> a(y_true.size());
  std::vector<double> b(y_true.size());
  for (int t = 0; t < kTargetCount; ++t) {
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      a[i] = y_true[i][t];
      b[i] = y_pred[i][t];
    }
    out[t] = regression_metrics(a, b);
  }
  return out;
}

std::vector<std::uint8_t> PredictorCheckpoint::serialize() const {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  KeyValues kv;
  config.store(kv, "");
  w.str(kv.to_text());
  for (const double m: scaler.mean())
    w.f64(m);
  for (const double s: scaler.stddev())
    w.f64(s);
  w.u32(scaler.log_h50() ? 1 : 0);
  const auto tensors = params.tensors();
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto &[name, m]: tensors)
    w.matrix(name, *m);
  if (!adam.m.empty() && adam.m.size() != tensors.size())
    throw Error(Errc::kShapeMismatch, "optimizer state does not match parameters");
  w.u64(static_cast<std::uint64_t>(adam.step));
  w.u32(static_cast<std::uint32_t>(adam.m.size()));
  for (std::size_t k = 0; k < adam.m.size(); ++k) {
    w.matrix("adam.m." + tensors[k].first, adam.m[k]);
    w.matrix("adam.v." + tensors[k].first, adam.v[k]);
  }
  for (const auto s: rng)
    w.u64(s);
  return w.data();
}

PredictorCheckpoint PredictorCheckpoint::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.bytes(kMagic.size()) != kMagic)
    throw Error(Errc::kCheckpointFormat, "not a predictor checkpoint");
  if (const auto v = r.u32(); v != kVersion)
    throw Error(Errc::kCheckpointVersion,
                "unsupported predictor checkpoint version " + std::to_string(v));
  PredictorCheckpoint ck;
  {
    const KeyValues kv = KeyValues::parse(r.str());
    std::set<std::string> used;
    ck.config.load(kv, "", used);
    kv.reject_unknown(used);
    try {
      ck.config.validate();
    } catch (const Error &e) {
      throw Error(Errc::kCheckpointFormat, std::string("bad predictor config: ") + e.what());
    }
  }
  PropertyVector mean;
  PropertyVector sd;
  for (auto &m: mean)
    m = r.f64();
  for (auto &s: sd)
    s = r.f64();
  const std::uint32_t log_flag = r.u32();
  if (log_flag > 1)
    throw Error(Errc::kCheckpointFormat, "bad scaler flag");
  ck.scaler = TargetScaler(mean, sd, log_flag == 1);

  ck.params = init_predictor(ck.config);
  auto tensors = ck.params.tensors();
  if (r.u32() != tensors.size())
    throw Error(Errc::kCheckpointFormat, "unexpected tensor count");
  for (auto &[name, m]: tensors) {
    MatrixXd stored = r.matrix(name);
    if (stored.rows() != m->rows() || stored.cols() != m->cols())
      throw Error(Errc::kCheckpointFormat, "tensor " + name + " disagrees with the config");
    *m = std::move(stored);
  }
  ck.adam.step = static_cast<std::int64_t>(r.u64());
  const std::uint32_t moments = r.u32();
  if (moments != 0 && moments != tensors.size())
    throw Error(Errc::kCheckpointFormat, "unexpected optimizer moment count");
  for (std::uint32_t k = 0; k < moments; ++k) {
    ck.adam.m.push_back(r.matrix("adam.m." + tensors[k].first));
    ck.adam.v.push_back(r.matrix("adam.v." + tensors[k].first));
    const auto &p = *tensors[k].second;
    if (ck.adam.m.back().rows() != p.rows() || ck.adam.m.back().cols() != p.cols() ||
        ck.adam.v.back().rows() != p.rows() || ck.adam.v.back().cols() != p.cols())
      throw Error(Errc::kCheckpointFormat, "optimizer moment shape mismatch");
  }
  for (auto &s: ck.rng)
    s = r.u64();
  if (!r.at_end())
    throw Error(Errc::kCheckpointFormat, "trailing bytes after predictor checkpoint");
  return ck;
}

void PredictorCheckpoint::save(const std::string &path) const {
  write_file(path, serialize());
}

PredictorCheckpoint PredictorCheckpoint::load(const std::string &path) {
  return deserialize(read_file(path));
}

std::vector<GraphTensors> featurize_all(std::span<const std::string> smiles) {
  std::vector<GraphTensors> out;
  out.reserve(smiles.size());
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    if (!chem::is_valid(smiles[i]))
      throw Error(Errc::kInvalidSmiles, "invalid SMILES '" + smiles[i] + "'", i);
    try {
      out.push_back(featurize(chem::parse(smiles[i])));
    } catch (const Error &e) {
      throw Error(e.code(), "molecule " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  return out;
}

std::vector<PropertyVector> predict_scaled(const PredictorParameters &params,
                                           std::span<const GraphTensors> graphs) {
  std::vector<PropertyVector> out;
  out.reserve(graphs.size());
  for (std::size_t begin = 0; begin < graphs.size(); begin += kPredictChunk) {
    const auto chunk = graphs.subspan(begin, std::min(kPredictChunk, graphs.size() - begin));
    const auto result = predict(params, batch_graphs(chunk));
    for (Eigen::Index i = 0; i < result.y.rows(); ++i) {
      PropertyVector v;
      for (int t = 0; t < kTargetCount; ++t)
        v[t] = result.y(i, t);
      out.push_back(v);
    }
  }
  return out;
}

std::vector<PropertyVector> predict_properties(const PredictorCheckpoint &ckpt,
                                               std::span<const std::string> smiles) {
  const auto graphs = featurize_all(smiles);
  auto scaled = predict_scaled(ckpt.params, graphs);
  for (auto &v: scaled)
    v = ckpt.scaler.inverse(v);
  return scaled;
}

namespace {

// Root mean square error over observed entries of the selected records.
double subset_rmse(const PredictorParameters &params, const std::vector<GraphTensors> &graphs,
                   const std::vector<PropertyVector> &targets,
                   const std::vector<std::size_t> &indices) {
  if (indices.empty())
    return kNaN;
  std::vector<GraphTensors> sel;
  sel.reserve(indices.size());
  for (const auto i: indices)
    sel.push_back(graphs[i]);
  const auto pred = predict_scaled(params, sel);
  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    for (int t = 0; t < kTargetCount; ++t) {
      const double y = targets[indices[k]][t];
      if (!std::isfinite(y))
        continue;
      sq += (pred[k][t] - y) * (pred[k][t] - y);
      ++count;
    }
  }
  return count == 0 ? kNaN : std::sqrt(sq / static_cast<double>(count));
}

}  // namespace

PredictorRun train_predictor(const PredictorConfig &config,
                             std::span<const MoleculeRecord> records,
                             const PredictorTrainOptions &options) {
  config.validate();
  if (records.size() < 2)
    throw Error(Errc::kEmptyInput, "predictor training needs at least 2 records");
  const auto graphs = featurize_all(smiles_of(records));

  PredictorRun run;
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split(derive_seed(config.seed, "predictor.split"));
  split.shuffle(std::span(order));
  auto n_test = static_cast<std::size_t>(
      std::floor(config.test_fraction * static_cast<double>(records.size())));
  n_test = std::min(n_test, records.size() - 2);
  run.test_indices.assign(order.begin(), order.begin() + n_test);
  run.train_indices.assign(order.begin() + n_test, order.end());
  std::sort(run.test_indices.begin(), run.test_indices.end());
  std::sort(run.train_indices.begin(), run.train_indices.end());

  std::vector<PropertyVector> train_raw;
  for (const auto i: run.train_indices)
    train_raw.push_back(records[i].properties);
  PredictorCheckpoint &ck = run.checkpoint;
  ck.config = config;
  ck.scaler = TargetScaler::fit(train_raw, config.log_h50);
  std::vector<PropertyVector> targets;
  targets.reserve(records.size());
  for (const auto &r: records)
    targets.push_back(ck.scaler.transform(r.properties));

  ck.params = init_predictor(config);
  Rng shuffle(derive_seed(config.seed, "predictor.train"));
  AdamConfig adam;
  adam.lr = config.lr;
  adam.weight_decay = config.weight_decay;
  adam.clip_norm = 0.0;

  auto named = ck.params.tensors();
  std::vector<MatrixXd *> ptrs;
  for (auto &[name, m]: named)
    ptrs.push_back(m);

  std::vector<std::size_t> epoch_order = run.train_indices;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle.shuffle(std::span(epoch_order));
    for (std::size_t begin = 0; begin < epoch_order.size(); begin += batch) {
      const std::size_t end = std::min(begin + batch, epoch_order.size());
      std::vector<const GraphTensors *> sel;
      MatrixXd target(static_cast<Eigen::Index>(end - begin), kTargetCount);
      bool observed = false;
      for (std::size_t k = begin; k < end; ++k) {
        sel.push_back(&graphs[epoch_order[k]]);
        for (int t = 0; t < kTargetCount; ++t) {
          target(static_cast<Eigen::Index>(k - begin), t) = targets[epoch_order[k]][t];
          observed = observed || std::isfinite(targets[epoch_order[k]][t]);
        }
      }
      if (!observed)
        continue;
      const auto out = predict(ck.params, batch_graphs(std::span<const GraphTensors *const>(sel)));
      MatrixXd dy;
      masked_mse(out.y, target, &dy);
      const PredictorParameters grads = predictor_backward(ck.params, out.cache, dy);
      std::vector<MatrixXd> g;
      for (const auto &[name, m]: grads.tensors())
        g.push_back(*m);
      adam_step(ptrs, g, ck.adam, adam);
    }
    run.history.train_rmse.push_back(subset_rmse(ck.params, graphs, targets, run.train_indices));
    run.history.test_rmse.push_back(subset_rmse(ck.params, graphs, targets, run.test_indices));
    if (options.on_epoch)
      options.on_epoch(epoch, run.history);
  }
  ck.rng = shuffle.state();
  return run;
}

}  // namespace hemgen::gnn
