//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "hemgen/binio.h"
#include "hemgen/chem/smiles.h"
#include "hemgen/chem/writer.h"
#include "hemgen/error.h"
#include "hemgen/optim.h"
#include "hemgen/seq/generator.h"
#include "hemgen/seq/lstm.h"
#include "test_util.h"

namespace hemgen::seq {
namespace {

using Eigen::MatrixXd;

Vocabulary toy_vocab() { return Vocabulary({ "C", "N", "O" }); }  // V = 6

GeneratorConfig toy_config() {
  GeneratorConfig c;
  c.hidden_size = 8;
  c.d = 7;
  c.d_t = 3;
  c.mode = EmbeddingMode::kShaFixed;
  c.seed = 11;
  return c;
}

std::vector<std::vector<int>> toy_sequences() {
  // "CCO" and "NC" under toy_vocab.
  return { { 3, 3, 5 }, { 4, 3 } };
}

// Scalar per-timestep reference: one sequence at a time, explicit loops.
std::vector<std::vector<std::vector<double>>>
reference_logits(const LstmParameters &p, const Batch &batch) {
  const int H = p.hidden();
  const int V = p.vocab_size();
  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  std::vector<std::vector<std::vector<double>>> out(
      batch.steps, std::vector<std::vector<double>>(batch.rows));
  for (int b = 0; b < batch.rows; ++b) {
    std::vector<std::vector<double>> h(p.layers.size(), std::vector<double>(H, 0.0));
    auto c = h;
    for (int t = 0; t < batch.steps; ++t) {
      const int id = batch.input(t, b);
      std::vector<double> x;
      for (int j = 0; j < p.embedding.d_t(); ++j)
        x.push_back(p.embedding.trainable()(id, j));
      for (int j = 0; j < p.embedding.d_f(); ++j)
        x.push_back(p.embedding.fixed()(id, j));
      for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto &L = p.layers[l];
        std::vector<double> z(4 * H);
        for (int k = 0; k < 4 * H; ++k) {
          double s = L.b(0, k);
          for (std::size_t q = 0; q < x.size(); ++q)
            s += x[q] * L.w_x(q, k);
          for (int q = 0; q < H; ++q)
            s += h[l][q] * L.w_h(q, k);
          z[k] = s;
        }
        for (int k = 0; k < H; ++k) {
          const double ig = sig(z[k]);
          const double fg = sig(z[H + k]);
          const double gg = std::tanh(z[2 * H + k]);
          const double og = sig(z[3 * H + k]);
          c[l][k] = fg * c[l][k] + ig * gg;
          h[l][k] = og * std::tanh(c[l][k]);
        }
        x = h[l];
      }
      std::vector<double> logit(V);
      for (int v = 0; v < V; ++v) {
        double s = p.b_out(0, v);
        for (int q = 0; q < H; ++q)
          s += x[q] * p.w_out(q, v);
        logit[v] = s;
      }
      out[t][b] = logit;
    }
  }
  return out;
}

TEST(Batch, Layout) {
  const auto seqs = toy_sequences();
  const Batch b = make_batch(seqs);
  EXPECT_EQ(b.rows, 2);
  EXPECT_EQ(b.steps, 4);
  EXPECT_EQ(b.input(0, 0), Vocabulary::kBos);
  EXPECT_EQ(b.input(1, 0), 3);
  EXPECT_EQ(b.target(3, 0), Vocabulary::kEos);
  EXPECT_EQ(b.target(2, 1), Vocabulary::kEos);
  EXPECT_TRUE(b.masked(3, 1));
  EXPECT_EQ(b.input(3, 1), Vocabulary::kPad);
  EXPECT_EQ(b.unmasked_count(), 7);
}

TEST(Forward, MatchesScalarReference) {
  const auto p = init_parameters(toy_config(), toy_vocab());
  const auto seqs = toy_sequences();
  const Batch batch = make_batch(seqs);
  const auto fwd = forward(p, batch, 0.0, false, 0);
  const auto ref = reference_logits(p, batch);
  double worst = 0.0;
  for (int t = 0; t < batch.steps; ++t)
    for (int b = 0; b < batch.rows; ++b)
      for (int v = 0; v < p.vocab_size(); ++v)
        worst = std::max(worst, testing::relative_error(fwd.logits[t](b, v), ref[t][b][v], 1e-300));
  EXPECT_LE(worst, 1e-12);
}

TEST(Forward, ZeroWeightsGiveUniformLogits) {
  auto p = init_parameters(toy_config(), toy_vocab());
  for (auto &[name, m]: p.trainable())
    m->setZero();
  const auto seqs = toy_sequences();
  const Batch batch = make_batch(seqs);
  const auto fwd = forward(p, batch, 0.0, false, 0);
  for (const auto &l: fwd.logits)
    EXPECT_EQ(l.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(sequence_loss(fwd.logits, batch), std::log(6.0), 1e-15);
}

TEST(Forward, Determinism) {
  const auto p = init_parameters(toy_config(), toy_vocab());
  const auto seqs = toy_sequences();
  const Batch batch = make_batch(seqs);
  const auto a = forward(p, batch, 0.5, false, 1);
  const auto b = forward(p, batch, 0.5, false, 2);
  const auto c = forward(p, batch, 0.5, true, 3);
  const auto d = forward(p, batch, 0.5, true, 3);
  const auto e = forward(p, batch, 0.5, true, 4);
  bool differs = false;
  for (int t = 0; t < batch.steps; ++t) {
    EXPECT_TRUE((a.logits[t].array() == b.logits[t].array()).all());
    EXPECT_TRUE((c.logits[t].array() == d.logits[t].array()).all());
    differs = differs || !(c.logits[t].array() == e.logits[t].array()).all();
  }
  EXPECT_TRUE(differs);
}

TEST(Forward, PaddingInvariance) {
  const auto p = init_parameters(toy_config(), toy_vocab());
  const auto seqs = toy_sequences();
  const Batch batch = make_batch(seqs);
  Batch padded = batch;
  for (int extra = 0; extra < 3; ++extra) {
    for (int b = 0; b < padded.rows; ++b) {
      padded.inputs.push_back(Vocabulary::kPad);
      padded.targets.push_back(Vocabulary::kPad);
    }
    ++padded.steps;
  }
  const auto a = forward(p, batch, 0.0, false, 0);
  const auto b = forward(p, padded, 0.0, false, 0);
  for (int t = 0; t < batch.steps; ++t)
    for (int r = 0; r < batch.rows; ++r)
      if (!batch.masked(t, r))
        EXPECT_TRUE((a.logits[t].row(r).array() == b.logits[t].row(r).array()).all());
  EXPECT_EQ(sequence_loss(a.logits, batch), sequence_loss(b.logits, padded));

  // A longer neighbour in the batch pads the short row further.
  const std::vector<std::vector<int>> wider = { seqs[0], seqs[1], { 3, 3, 3, 3, 3, 3 } };
  const auto w = forward(p, make_batch(wider), 0.0, false, 0);
  for (int t = 0; t < batch.steps; ++t)
    for (int r = 0; r < batch.rows; ++r)
      if (!batch.masked(t, r))
        for (int v = 0; v < p.vocab_size(); ++v)
          EXPECT_NEAR(a.logits[t](r, v), w.logits[t](r, v), 1e-12);
}

TEST(Forward, Errors) {
  const auto p = init_parameters(toy_config(), toy_vocab());
  Batch bad = make_batch(toy_sequences());
  bad.inputs[1] = 17;
  try {
    forward(p, bad, 0.0, false, 0);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kIndexOutOfVocabulary);
  }
  auto nan = p;
  nan.w_out(0, 0) = std::nan("");
  try {
    forward(nan, make_batch(toy_sequences()), 0.0, false, 0);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kNonFiniteActivation);
  }
  auto shape = p;
  shape.layers[1].w_h.resize(3, 3);
  EXPECT_THROW(forward(shape, make_batch(toy_sequences()), 0.0, false, 0), Error);
}

TEST(Loss, UniformAndExtreme) {
  Batch b;
  b.rows = 1;
  b.steps = 2;
  b.inputs = { 1, 3 };
  b.targets = { 3, 2 };
  std::vector<MatrixXd> uniform(2, MatrixXd::Zero(1, 5));
  EXPECT_NEAR(sequence_loss(uniform, b), std::log(5.0), 1e-15);
  std::vector<MatrixXd> sharp(2, MatrixXd::Constant(1, 5, -500.0));
  sharp[0](0, 3) = 500.0;
  sharp[1](0, 2) = 500.0;
  EXPECT_NEAR(sequence_loss(sharp, b), 0.0, 1e-300);
}

TEST(Loss, BruteForceOracle) {
  const auto p = init_parameters(toy_config(), toy_vocab());
  const Batch batch = make_batch(toy_sequences());
  const auto fwd = forward(p, batch, 0.0, false, 0);
  double total = 0.0;
  int n = 0;
  for (int t = 0; t < batch.steps; ++t) {
    for (int b = 0; b < batch.rows; ++b) {
      if (batch.masked(t, b))
        continue;
      double z = 0.0;
      for (int v = 0; v < p.vocab_size(); ++v)
        z += std::exp(fwd.logits[t](b, v));
      total += -std::log(std::exp(fwd.logits[t](b, batch.target(t, b))) / z);
      ++n;
    }
  }
  EXPECT_NEAR(sequence_loss(fwd.logits, batch), total / n, 1e-12);
}

TEST(Loss, AllMasked) {
  Batch b;
  b.rows = 1;
  b.steps = 1;
  b.inputs = { 1 };
  b.targets = { 0 };
  std::vector<MatrixXd> l(1, MatrixXd::Zero(1, 4));
  try {
    sequence_loss(l, b);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kAllPositionsMasked);
  }
}

TEST(Loss, GradientZeroAtPadding) {
  const auto p = init_parameters(toy_config(), toy_vocab());
  const Batch batch = make_batch(toy_sequences());
  const auto fwd = forward(p, batch, 0.0, false, 0);
  const auto g = loss_gradient(fwd.logits, batch);
  for (int t = 0; t < batch.steps; ++t)
    for (int b = 0; b < batch.rows; ++b)
      if (batch.masked(t, b))
        EXPECT_EQ(g[t].row(b).cwiseAbs().maxCoeff(), 0.0);
      else
        EXPECT_NEAR(g[t].row(b).sum(), 0.0, 1e-15);
}

void check_gradients(double dropout) {
  auto p = init_parameters(toy_config(), toy_vocab());
  const Batch batch = make_batch(toy_sequences());
  const std::uint64_t seed = 77;
  const auto fwd = forward(p, batch, dropout, true, seed);
  const auto grads = backward(p, fwd.cache, loss_gradient(fwd.logits, batch));
  EXPECT_EQ(grads.embedding.rightCols(p.embedding.d_f()).cwiseAbs().maxCoeff(), 0.0);
  const auto list = grads.trainable_list();
  auto named = p.trainable();
  ASSERT_EQ(list.size(), named.size());
  auto f = [&] { return sequence_loss(forward(p, batch, dropout, true, seed).logits, batch); };
  for (std::size_t k = 0; k < named.size(); ++k) {
    const auto r = testing::finite_difference(*named[k].second, list[k], f);
    EXPECT_LE(r.worst, 1e-4) << named[k].first;
    EXPECT_EQ(r.checked, named[k].second->size());
  }
}

TEST(Backward, FiniteDifferences) { check_gradients(0.0); }

TEST(Backward, FiniteDifferencesWithDropout) { check_gradients(0.3); }

TEST(Backward, StaleCache) {
  auto p = init_parameters(toy_config(), toy_vocab());
  const Batch batch = make_batch(toy_sequences());
  const auto fwd = forward(p, batch, 0.0, false, 0);
  ++p.revision;
  try {
    backward(p, fwd.cache, loss_gradient(fwd.logits, batch));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kStaleCache);
  }
}

TEST(Adam, ZeroGradient) {
  MatrixXd x = MatrixXd::Constant(2, 3, 1.5);
  MatrixXd *ptr = &x;
  const MatrixXd g = MatrixXd::Zero(2, 3);
  AdamState s;
  adam_step(std::span(&ptr, 1), std::span(&g, 1), s, AdamConfig {});
  EXPECT_EQ(s.step, 1);
  EXPECT_TRUE((x.array() == 1.5).all());
}

TEST(Adam, FirstStepMovesByLr) {
  MatrixXd x = MatrixXd::Zero(1, 2);
  MatrixXd *ptr = &x;
  const MatrixXd g = MatrixXd::Constant(1, 2, 1.0);
  AdamState s;
  AdamConfig c;
  c.lr = 0.01;
  adam_step(std::span(&ptr, 1), std::span(&g, 1), s, c);
  EXPECT_NEAR(x(0, 0), -0.01, 1e-9);
  EXPECT_NEAR(x(0, 1), -0.01, 1e-9);
}

TEST(Adam, ClipsGlobalNorm) {
  MatrixXd a = MatrixXd::Zero(1, 1), b = MatrixXd::Zero(1, 1);
  std::vector<MatrixXd *> ps = { &a, &b };
  std::vector<MatrixXd> gs = { MatrixXd::Constant(1, 1, 6.0), MatrixXd::Constant(1, 1, 8.0) };
  AdamState s;
  const double norm = adam_step(ps, gs, s, AdamConfig {});
  EXPECT_DOUBLE_EQ(norm, 10.0);
  // m = (1 - beta1) * g * 5 / 10
  EXPECT_NEAR(s.m[0](0, 0), 0.1 * 3.0, 1e-15);
  EXPECT_NEAR(s.m[1](0, 0), 0.1 * 4.0, 1e-15);
}

TEST(Adam, DecoupledWeightDecay) {
  MatrixXd x = MatrixXd::Constant(1, 1, 2.0);
  MatrixXd *ptr = &x;
  const MatrixXd g = MatrixXd::Zero(1, 1);
  AdamState s;
  AdamConfig c;
  c.lr = 0.1;
  c.weight_decay = 0.5;
  adam_step(std::span(&ptr, 1), std::span(&g, 1), s, c);
  EXPECT_DOUBLE_EQ(x(0, 0), 2.0 * (1.0 - 0.05));
}

TEST(Adam, QuadraticBowl) {
  MatrixXd x(1, 3);
  x << 3.0, -2.0, 0.5;
  MatrixXd *ptr = &x;
  AdamState s;
  AdamConfig c;
  c.lr = 0.1;
  int steps = 0;
  while (x.cwiseAbs().maxCoeff() >= 1e-3 && steps < 500) {
    const MatrixXd g = x;  // gradient of |x|^2 / 2
    adam_step(std::span(&ptr, 1), std::span(&g, 1), s, c);
    ++steps;
  }
  EXPECT_LT(x.cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_LE(steps, 500);
}

TEST(Adam, ShapeMismatch) {
  MatrixXd x = MatrixXd::Zero(2, 2);
  MatrixXd *ptr = &x;
  const MatrixXd g = MatrixXd::Zero(2, 3);
  AdamState s;
  EXPECT_THROW(adam_step(std::span(&ptr, 1), std::span(&g, 1), s, AdamConfig {}), Error);
}

TEST(Config, RoundTrip) {
  GeneratorConfig c = toy_config();
  c.lr = 0.1 + 0.2;
  c.dropout = 0.3;
  KeyValues kv;
  c.store(kv, "gen.");
  const KeyValues back = KeyValues::parse(kv.to_text());
  GeneratorConfig d;
  std::set<std::string> used;
  d.load(back, "gen.", used);
  EXPECT_EQ(c, d);
  EXPECT_NO_THROW(back.reject_unknown(used));
  EXPECT_THROW(KeyValues::parse("a = 1\na = 2\n"), Error);
  EXPECT_THROW(KeyValues::parse("novalue\n"), Error);
  const KeyValues extra = KeyValues::parse("gen.bogus = 1\n");
  std::set<std::string> none;
  EXPECT_THROW(extra.reject_unknown(none), Error);
}

TEST(Config, Validation) {
  GeneratorConfig c;
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = GeneratorConfig {};
  c.mode = EmbeddingMode::kTrainableOnly;
  EXPECT_THROW(c.validate(), Error);
  c.d_t = c.d;
  EXPECT_NO_THROW(c.validate());
}

GeneratorConfig small_config() {
  GeneratorConfig c;
  c.hidden_size = 32;
  c.d = 32;
  c.d_t = 8;
  c.batch_size = 8;
  c.epochs = 4;
  c.lr = 5e-3;
  c.seed = 5;
  return c;
}

TEST(Train, Deterministic) {
  const auto corpus = testing::fixture_smiles("fixture5.csv");
  TrainOptions o;
  o.val_fraction = 0.2;
  const auto a = train(small_config(), corpus, o);
  const auto b = train(small_config(), corpus, o);
  EXPECT_TRUE(a.history.same_losses(b.history));
  EXPECT_EQ(a.history.epochs(), 4U);
  EXPECT_EQ(a.history.wall_seconds.size(), 4U);
  EXPECT_FALSE(std::isnan(a.history.val_loss[0]));
  EXPECT_EQ(a.checkpoint.serialize(), b.checkpoint.serialize());
  auto c = small_config();
  c.seed = 6;
  EXPECT_FALSE(train(c, corpus, o).history.same_losses(a.history));
}

TEST(Train, ValidationSplitByMolecule) {
  const auto corpus = testing::fixture_smiles();
  TrainOptions o;
  o.val_fraction = 0.1;
  o.augment_factor = 3;
  const auto setup = prepare_training(small_config(), corpus, o);
  EXPECT_EQ(setup.validation.size(), 2U);
  EXPECT_EQ(setup.train.size(), 18U * 3U);
  std::set<std::string> val;
  for (const auto &ids: setup.validation)
    val.insert(chem::canonical_smiles(setup.initial.vocab.decode(ids)));
  for (const auto &ids: setup.train)
    EXPECT_FALSE(val.contains(chem::canonical_smiles(setup.initial.vocab.decode(ids))));
}

TEST(Train, Errors) {
  EXPECT_THROW(train(small_config(), std::vector<std::string> {}), Error);
  try {
    train(small_config(), std::vector<std::string> { "CCO", "C1CC" });
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kInvalidSmiles);
    EXPECT_EQ(e.index(), 1U);
  }
  TrainOptions o;
  o.val_fraction = 0.7;
  EXPECT_THROW(train(small_config(), std::vector<std::string> { "CCO" }, o), Error);
}

TEST(Train, FixedBlockConserved) {
  const auto corpus = testing::fixture_smiles("fixture5.csv");
  TrainOptions o;
  o.val_fraction = 0.0;
  const auto setup = prepare_training(small_config(), corpus, o);
  const auto before = setup.initial.params.embedding.fixed_checksum();
  const auto after = run_training(setup, o).checkpoint.params.embedding.fixed_checksum();
  EXPECT_EQ(before, after);
}

TEST(Train, MovingAverageLossNonIncreasing) {
  auto c = small_config();
  c.hidden_size = 64;
  c.epochs = 100;
  c.batch_size = 32;
  TrainOptions o;
  o.val_fraction = 0.0;
  const auto r = train(c, testing::fixture_smiles(), o);
  const auto &l = r.history.train_loss;
  std::vector<double> avg;
  for (std::size_t i = 10; i <= l.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = i - 10; k < i; ++k)
      s += l[k];
    avg.push_back(s / 10);
  }
  for (std::size_t i = 1; i < avg.size(); ++i)
    EXPECT_LE(avg[i], avg[i - 1]) << "window ending at epoch " << i + 10;
}

TEST(Checkpoint, RoundTripBytes) {
  const auto corpus = testing::fixture_smiles("fixture5.csv");
  TrainOptions o;
  o.val_fraction = 0.0;
  const auto r = train(small_config(), corpus, o);
  const auto bytes = r.checkpoint.serialize();
  const auto loaded = GeneratorCheckpoint::deserialize(bytes);
  EXPECT_EQ(loaded.serialize(), bytes);
  EXPECT_EQ(loaded.config, r.checkpoint.config);
  EXPECT_EQ(loaded.vocab, r.checkpoint.vocab);

  SampleOptions so;
  so.n = 20;
  so.seed = 3;
  EXPECT_EQ(sample(loaded, so), sample(r.checkpoint, so));

  const auto path = std::filesystem::temp_directory_path() / "hemgen_gen_ckpt.bin";
  r.checkpoint.save(path.string());
  EXPECT_EQ(GeneratorCheckpoint::load(path.string()).serialize(), bytes);
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsBadInput) {
  const auto r = train(small_config(), testing::fixture_smiles("fixture5.csv"));
  auto bytes = r.checkpoint.serialize();
  auto versioned = bytes;
  versioned[8] = 9;
  try {
    GeneratorCheckpoint::deserialize(versioned);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kCheckpointVersion);
  }
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(GeneratorCheckpoint::deserialize(magic), Error);
  bytes.resize(bytes.size() / 2);
  try {
    GeneratorCheckpoint::deserialize(bytes);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kCheckpointFormat);
  }
}

TEST(Sample, GreedyAndTemperature) {
  const auto r = train(small_config(), testing::fixture_smiles("fixture5.csv"));
  SampleOptions g;
  g.n = 3;
  g.greedy = true;
  g.seed = 1;
  const auto a = sample(r.checkpoint, g);
  g.seed = 2;
  const auto b = sample(r.checkpoint, g);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0], a[1]);
  SampleOptions bad;
  bad.temperature = 0.0;
  try {
    sample(r.checkpoint, bad);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kBadTemperature);
  }
  SampleOptions s;
  s.n = 300;
  s.seed = 4;
  s.max_length = 30;
  const auto out = sample(r.checkpoint, s);
  EXPECT_EQ(out.size(), 300U);
  EXPECT_EQ(out, sample(r.checkpoint, s));
  for (const auto &x: out) {
    EXPECT_EQ(x.find("<"), std::string::npos);
    if (!x.empty())
      EXPECT_LE(chem::tokenize(x).size(), 30U);
  }
}

TEST(Sample, UntrainedVersusTrainedValidity) {
  const auto corpus = testing::fixture_smiles();
  GeneratorConfig c;
  c.hidden_size = 128;
  c.epochs = 300;
  c.lr = 5e-3;
  c.seed = 21;
  TrainOptions o;
  o.val_fraction = 0.0;
  auto setup = prepare_training(c, corpus, o);
  SampleOptions s;
  s.n = 200;
  s.seed = 8;
  auto rate = [](const std::vector<std::string> &xs) {
    int v = 0;
    for (const auto &x: xs)
      v += chem::is_valid(x);
    return static_cast<double>(v) / static_cast<double>(xs.size());
  };
  const double before = rate(sample(setup.initial, s));
  const double after = rate(sample(run_training(std::move(setup), o).checkpoint, s));
  EXPECT_LT(before, 0.2);
  EXPECT_GT(after, 0.5);
}

}  // namespace
}  // namespace hemgen::seq
