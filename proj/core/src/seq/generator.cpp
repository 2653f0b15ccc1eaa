//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/seq/generator.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "hemgen/binio.h"
#include "hemgen/chem/smiles.h"
#include "hemgen/chem/writer.h"
#include "hemgen/error.h"

namespace hemgen::seq {

using Eigen::MatrixXd;

namespace {

constexpr std::string_view kMagic = "HEMGENCK";
constexpr int kSampleChunk = 256;

}  // namespace

std::vector<std::uint8_t> GeneratorCheckpoint::serialize() const {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  KeyValues kv;
  config.store(kv, "");
  w.str(kv.to_text());
  w.u32(static_cast<std::uint32_t>(vocab.size()));
  for (const auto &t: vocab.tokens())
    w.str(t);

  auto &p = const_cast<LstmParameters &>(params);
  const auto tensors = p.trainable();
  w.u32(static_cast<std::uint32_t>(tensors.size() + 1));
  w.matrix("embedding.E_f", params.embedding.fixed());
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

GeneratorCheckpoint GeneratorCheckpoint::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.bytes(kMagic.size()) != kMagic)
    throw Error(Errc::kCheckpointFormat, "not a generator checkpoint");
  if (const auto v = r.u32(); v != kVersion)
    throw Error(Errc::kCheckpointVersion,
                "unsupported generator checkpoint version " + std::to_string(v));
  GeneratorCheckpoint ck;
  {
    const KeyValues kv = KeyValues::parse(r.str());
    std::set<std::string> used;
    ck.config.load(kv, "", used);
    kv.reject_unknown(used);
    ck.config.validate();
  }
  const std::uint32_t V = r.u32();
  if (V < Vocabulary::kReserved)
    throw Error(Errc::kCheckpointFormat, "vocabulary too small");
  std::vector<std::string> tokens;
  for (std::uint32_t i = 0; i < V; ++i) {
    std::string t = r.str();
    if (i >= Vocabulary::kReserved)
      tokens.push_back(std::move(t));
  }
  ck.vocab = Vocabulary(tokens);
  if (ck.vocab.size() != static_cast<int>(V))
    throw Error(Errc::kCheckpointFormat, "vocabulary tokens are not distinct");

  LstmParameters &p = ck.params;
  p.layers.resize(ck.config.layers);
  const auto tensors = p.trainable();
  if (r.u32() != tensors.size() + 1)
    throw Error(Errc::kCheckpointFormat, "unexpected tensor count");
  MatrixXd fixed = r.matrix("embedding.E_f");
  MatrixXd trainable = r.matrix(tensors[0].first);
  for (std::size_t k = 1; k < tensors.size(); ++k)
    *ck.params.trainable()[k].second = r.matrix(tensors[k].first);
  p.embedding = HybridEmbedding(ck.config.mode, std::move(trainable), std::move(fixed));
  if (p.embedding.vocab_size() != static_cast<int>(V) ||
      p.embedding.dim() != ck.config.d || p.hidden() != ck.config.hidden_size ||
      p.vocab_size() != static_cast<int>(V))
    throw Error(Errc::kCheckpointFormat, "tensor shapes disagree with the config");

  ck.adam.step = static_cast<std::int64_t>(r.u64());
  const std::uint32_t moments = r.u32();
  if (moments != 0 && moments != tensors.size())
    throw Error(Errc::kCheckpointFormat, "unexpected optimizer state size");
  const auto names = p.trainable_names();
  for (std::uint32_t k = 0; k < moments; ++k) {
    ck.adam.m.push_back(r.matrix("adam.m." + names[k]));
    ck.adam.v.push_back(r.matrix("adam.v." + names[k]));
  }
  for (auto &s: ck.rng)
    s = r.u64();
  if (!r.at_end())
    throw Error(Errc::kCheckpointFormat, "trailing bytes after checkpoint");
  return ck;
}

void GeneratorCheckpoint::save(const std::string &path) const {
  write_file(path, serialize());
}

GeneratorCheckpoint GeneratorCheckpoint::load(const std::string &path) {
  return deserialize(read_file(path));
}

bool TrainingHistory::same_losses(const TrainingHistory &other) const {
  auto bits_equal = [](const std::vector<double> &a, const std::vector<double> &b) {
    if (a.size() != b.size())
      return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i]))
        return false;
    return true;
  };
  return bits_equal(train_loss, other.train_loss) && bits_equal(val_loss, other.val_loss);
}

TrainingSetup prepare_training(const GeneratorConfig &config,
                               std::span<const std::string> corpus,
                               const TrainOptions &options) {
  config.validate();
  if (corpus.empty())
    throw Error(Errc::kEmptyCorpus, "training corpus is empty");
  if (!(options.val_fraction >= 0.0 && options.val_fraction <= 0.5))
    throw Error(Errc::kBadConfig, "val_fraction must lie in [0, 0.5]");
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (!chem::is_valid(corpus[i]))
      throw Error(Errc::kInvalidSmiles, "invalid training SMILES '" + corpus[i] + "'", i);

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split(derive_seed(config.seed, "generator.split"));
  split.shuffle(std::span(order));
  const auto n_val = static_cast<std::size_t>(
      std::floor(options.val_fraction * static_cast<double>(corpus.size())));
  std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
  std::vector<std::size_t> train_idx(order.begin() + n_val, order.end());
  std::sort(val_idx.begin(), val_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  std::vector<std::string> train_smiles;
  for (auto i: train_idx)
    train_smiles.push_back(corpus[i]);
  std::vector<std::string> val_smiles;
  for (auto i: val_idx)
    val_smiles.push_back(corpus[i]);
  const auto augmented = chem::augment_dataset(
      train_smiles, options.augment_factor, derive_seed(config.seed, "generator.augment"));

  std::vector<std::string> all = augmented;
  all.insert(all.end(), val_smiles.begin(), val_smiles.end());

  TrainingSetup setup;
  GeneratorCheckpoint &ck = setup.initial;
  ck.config = config;
  ck.vocab = Vocabulary::from_smiles(all);
  ck.params = init_parameters(config, ck.vocab);
  Rng train_rng(derive_seed(config.seed, "generator.train"));
  ck.rng = train_rng.state();
  for (const auto &s: augmented)
    setup.train.push_back(ck.vocab.encode(s).ids);
  for (const auto &s: val_smiles)
    setup.validation.push_back(ck.vocab.encode(s).ids);
  return setup;
}

double evaluate_loss(const LstmParameters &params,
                     std::span<const std::vector<int>> sequences, int batch_size) {
  if (sequences.empty())
    return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  long long count = 0;
  for (std::size_t start = 0; start < sequences.size();
       start += static_cast<std::size_t>(batch_size)) {
    const auto chunk = sequences.subspan(
        start, std::min<std::size_t>(batch_size, sequences.size() - start));
    const Batch batch = make_batch(chunk);
    const auto fwd = forward(params, batch, 0.0, false, 0);
    const int n = batch.unmasked_count();
    total += sequence_loss(fwd.logits, batch) * n;
    count += n;
  }
  return total / static_cast<double>(count);
}

TrainResult run_training(TrainingSetup setup, const TrainOptions &options) {
  TrainResult result;
  GeneratorCheckpoint &ck = result.checkpoint;
  ck = std::move(setup.initial);
  const GeneratorConfig &cfg = ck.config;
  if (setup.train.empty())
    throw Error(Errc::kEmptyCorpus, "no training sequences after the split");

  Rng rng;
  rng.set_state(ck.rng);
  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  auto named = ck.params.trainable();
  std::vector<MatrixXd *> tensors;
  for (auto &[n, m]: named)
    tensors.push_back(m);
  if (ck.adam.m.empty())
    ck.adam.reset(tensors);

  std::vector<std::size_t> order(setup.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<int>> chunk;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(std::span(order));
    double total = 0.0;
    long long count = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      chunk.clear();
      for (std::size_t k = start; k < end; ++k)
        chunk.push_back(setup.train[order[k]]);
      const Batch batch = make_batch(chunk);
      const std::uint64_t drop_seed = rng.next_u64();
      const auto fwd = forward(ck.params, batch, cfg.dropout, true, drop_seed);
      const int n = batch.unmasked_count();
      total += sequence_loss(fwd.logits, batch) * n;
      count += n;
      const auto grads = backward(ck.params, fwd.cache, loss_gradient(fwd.logits, batch));
      adam_step(tensors, grads.trainable_list(), ck.adam, adam_cfg);
      ++ck.params.revision;
    }
    result.history.train_loss.push_back(total / static_cast<double>(count));
    result.history.val_loss.push_back(
        evaluate_loss(ck.params, setup.validation, cfg.batch_size));
    result.history.wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (options.on_epoch)
      options.on_epoch(epoch, result.history);
  }
  ck.rng = rng.state();
  return result;
}

namespace {

int draw_token(const Eigen::Ref<const Eigen::RowVectorXd> &logits, double temperature,
               bool greedy, Rng &rng) {
  const int V = static_cast<int>(logits.size());
  constexpr int first = Vocabulary::kEos;
  if (greedy) {
    int best = first;
    for (int v = first + 1; v < V; ++v)
      if (logits[v] > logits[best])
        best = v;
    return best;
  }
  double m = -std::numeric_limits<double>::infinity();
  for (int v = first; v < V; ++v)
    m = std::max(m, logits[v] / temperature);
  thread_local std::vector<double> w;
  w.assign(V, 0.0);
  double sum = 0.0;
  for (int v = first; v < V; ++v) {
    w[v] = std::exp(logits[v] / temperature - m);
    sum += w[v];
  }
  double u = rng.uniform() * sum;
  for (int v = first; v < V; ++v) {
    u -= w[v];
    if (u < 0.0)
      return v;
  }
  for (int v = V - 1; v >= first; --v)
    if (w[v] > 0.0)
      return v;
  return first;
}

}  // namespace

std::vector<std::string> sample(const LstmParameters &params, const Vocabulary &vocab,
                                const SampleOptions &options, int default_max_length) {
  if (!options.greedy && !(options.temperature > 0.0 && std::isfinite(options.temperature)))
    throw Error(Errc::kBadTemperature, "temperature must be a positive finite number");
  if (options.n < 1)
    throw Error(Errc::kBadConfig, "sample count must be >= 1");
  if (vocab.size() != params.vocab_size())
    throw Error(Errc::kShapeMismatch, "vocabulary does not match the model");
  const int max_len = options.max_length > 0 ? options.max_length : default_max_length;

  std::vector<std::string> out;
  out.reserve(options.n);
  for (int start = 0; start < options.n; start += kSampleChunk) {
    const int rows = std::min(kSampleChunk, options.n - start);
    std::vector<Rng> rngs;
    for (int k = 0; k < rows; ++k)
      rngs.emplace_back(mix64(options.seed ^ mix64(static_cast<std::uint64_t>(start + k) + 1)));
    std::vector<std::vector<int>> ids(rows);
    std::vector<char> done(rows, 0);
    std::vector<int> tokens(rows, Vocabulary::kBos);
    LstmState state = zero_state(params, rows);
    int active = rows;
    for (int t = 0; t < max_len && active > 0; ++t) {
      const MatrixXd logits = step(params, tokens, state);
      for (int k = 0; k < rows; ++k) {
        if (done[k])
          continue;
        const int tok = draw_token(logits.row(k), options.temperature, options.greedy, rngs[k]);
        tokens[k] = tok;
        if (tok == Vocabulary::kEos) {
          done[k] = 1;
          --active;
        } else {
          ids[k].push_back(tok);
        }
      }
    }
    for (const auto &s: ids)
      out.push_back(vocab.decode(s));
  }
  return out;
}

}  // namespace hemgen::seq
