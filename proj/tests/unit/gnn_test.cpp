//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "hemgen/chem/smiles.h"
#include "hemgen/chem/writer.h"
#include "hemgen/dataset.h"
#include "hemgen/error.h"
#include "hemgen/gnn/features.h"
#include "hemgen/gnn/model.h"
#include "hemgen/gnn/predictor.h"
#include "test_util.h"

namespace hemgen::gnn {
namespace {

using Eigen::MatrixXd;

template <typename F>
Errc error_code(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kIo;
}

GraphTensors graph_of(const std::string &smiles) {
  return featurize(chem::parse(smiles));
}

PredictorConfig toy_config(int hidden = 8) {
  PredictorConfig c;
  c.hidden = hidden;
  c.seed = 21;
  return c;
}

// Perturbs every tensor so that biases and attention are non-trivial.
PredictorParameters toy_params(int hidden = 8) {
  auto p = init_predictor(toy_config(hidden));
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto &[name, m]: p.tensors())
    for (Eigen::Index i = 0; i < m->size(); ++i)
      m->data()[i] += u(gen);
  return p;
}

// Node rows and (src row, dst row, edge row) triples as sorted multisets.
using NodeKey = std::vector<double>;
using EdgeKey = std::tuple<NodeKey, NodeKey, NodeKey>;

NodeKey key(const MatrixXd &m, Eigen::Index i) {
  NodeKey k(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    k[j] = m(i, j);
  return k;
}

std::pair<std::vector<NodeKey>, std::vector<EdgeKey>> multisets(const GraphTensors &g) {
  std::vector<NodeKey> nodes;
  for (int i = 0; i < g.nodes(); ++i)
    nodes.push_back(key(g.x, i));
  std::vector<EdgeKey> edges;
  for (int e = 0; e < g.edges(); ++e)
    edges.emplace_back(key(g.x, g.src[e]), key(g.x, g.dst[e]), key(g.edge_x, e));
  std::sort(nodes.begin(), nodes.end());
  std::sort(edges.begin(), edges.end());
  return { nodes, edges };
}

GraphTensors permuted(const GraphTensors &g, std::mt19937_64 &gen) {
  std::vector<int> perm(g.nodes());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);  // old index -> new index
  std::vector<int> edge_order(g.edges());
  std::iota(edge_order.begin(), edge_order.end(), 0);
  std::shuffle(edge_order.begin(), edge_order.end(), gen);
  GraphTensors out = g;
  for (int i = 0; i < g.nodes(); ++i) {
    out.x.row(perm[i]) = g.x.row(i);
    out.graph_of[perm[i]] = g.graph_of[i];
  }
  for (int k = 0; k < g.edges(); ++k) {
    const int e = edge_order[k];
    out.src[k] = perm[g.src[e]];
    out.dst[k] = perm[g.dst[e]];
    out.edge_x.row(k) = g.edge_x.row(e);
  }
  return out;
}

TEST(Featurize, Sizes) {
  const auto c = graph_of("C");
  EXPECT_EQ(c.nodes(), 1);
  EXPECT_EQ(c.edges(), 0);
  EXPECT_EQ(c.x.cols(), kNodeFeatures);
  const auto e = graph_of("CCO");
  EXPECT_EQ(e.nodes(), 3);
  EXPECT_EQ(e.edges(), 4);
  for (int k = 0; k < e.edges(); k += 2) {
    EXPECT_EQ(e.src[k], e.dst[k + 1]);
    EXPECT_EQ(e.dst[k], e.src[k + 1]);
  }
  EXPECT_EQ(error_code([] { featurize(chem::MolGraph()); }), Errc::kEmptyGraph);
}

TEST(Featurize, Table) {
  // Nitromethane: C0, N1 (+1, three neighbors), O2 (double), O3 (-1).
  const auto g = graph_of("C[N+](=O)[O-]");
  ASSERT_EQ(g.nodes(), 4);
  EXPECT_EQ(g.x(0, 2), 1.0);                   // carbon
  EXPECT_EQ(g.x(0, kDegreeOffset + 1), 1.0);
  EXPECT_EQ(g.x(0, kHydrogenOffset + 3), 1.0);
  EXPECT_EQ(g.x(1, 3), 1.0);                   // nitrogen
  EXPECT_EQ(g.x(1, kDegreeOffset + 3), 1.0);
  EXPECT_EQ(g.x(1, kChargeColumn), 1.0);
  EXPECT_EQ(g.x(1, kHydrogenOffset + 0), 1.0);
  EXPECT_EQ(g.x(3, kChargeColumn), -1.0);
  EXPECT_EQ(g.x(0, kRingColumn), 0.0);
  for (int i = 0; i < g.nodes(); ++i) {
    EXPECT_EQ(g.x.row(i).head(12).sum(), 1.0);
    EXPECT_EQ(g.x.row(i).segment(kDegreeOffset, 6).sum(), 1.0);
    EXPECT_EQ(g.x.row(i).segment(kHydrogenOffset, 5).sum(), 1.0);
  }
  // Only the N1=O2 bond is double.
  for (int e = 0; e < g.edges(); ++e) {
    const bool nd = (g.src[e] == 1 && g.dst[e] == 2) || (g.src[e] == 2 && g.dst[e] == 1);
    EXPECT_EQ(g.edge_x(e, 1), nd ? 1.0 : 0.0);
    EXPECT_EQ(g.edge_x.row(e).head(4).sum(), 1.0);
  }
  const auto benz = graph_of("c1ccccc1");
  for (int i = 0; i < benz.nodes(); ++i) {
    EXPECT_EQ(benz.x(i, kAromaticColumn), 1.0);
    EXPECT_EQ(benz.x(i, kRingColumn), 1.0);
  }
  for (int e = 0; e < benz.edges(); ++e) {
    EXPECT_EQ(benz.edge_x(e, 3), 1.0);
    EXPECT_EQ(benz.edge_x(e, 4), 1.0);
  }
}

TEST(Featurize, UnsupportedElement) {
  try {
    graph_of("CC[Na]");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kUnsupportedElement);
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(Featurize, InvariantAcrossWritings) {
  for (const auto &s: testing::fixture_smiles()) {
    const auto g = chem::parse(s);
    const auto ref = multisets(featurize(g));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto w = chem::enumerate_random(g, seed);
      EXPECT_EQ(multisets(graph_of(w)), ref) << s << " vs " << w;
    }
  }
}

TEST(Featurize, Batch) {
  const std::vector<GraphTensors> gs = { graph_of("CCO"), graph_of("N"), graph_of("C=C") };
  const auto b = batch_graphs(gs);
  EXPECT_EQ(b.graphs, 3);
  EXPECT_EQ(b.nodes(), 6);
  EXPECT_EQ(b.edges(), 6);
  EXPECT_EQ(b.graph_of, (std::vector<int> { 0, 0, 0, 1, 2, 2 }));
  EXPECT_EQ(b.src[4], 4);
  EXPECT_EQ(b.dst[4], 5);
  EXPECT_TRUE((b.x.row(3).array() == gs[1].x.row(0).array()).all());
}

TEST(Predict, SingleNode) {
  const auto p = toy_params();
  const auto out = predict(p, graph_of("C"));
  ASSERT_EQ(out.y.rows(), 1);
  ASSERT_EQ(out.y.cols(), 9);
  EXPECT_TRUE(out.y.allFinite());
  ASSERT_EQ(out.readout_attention.size(), 3u);
  for (const auto &a: out.readout_attention)
    EXPECT_EQ(a[0], 1.0);
  for (const auto &a: out.edge_attention)
    EXPECT_EQ(a.size(), 0);
}

void expect_normalized(const PredictorOutput &out, const GraphTensors &g) {
  for (const auto &alpha: out.edge_attention) {
    std::vector<double> sums(g.nodes(), 0.0);
    for (int e = 0; e < g.edges(); ++e) {
      EXPECT_GT(alpha[e], 0.0);
      sums[g.dst[e]] += alpha[e];
    }
    for (int v = 0; v < g.nodes(); ++v)
      if (sums[v] != 0.0)
        EXPECT_NEAR(sums[v], 1.0, 1e-12);
  }
  for (const auto &beta: out.readout_attention) {
    std::vector<double> sums(g.graphs, 0.0);
    for (int v = 0; v < g.nodes(); ++v) {
      EXPECT_GT(beta[v], 0.0);
      sums[g.graph_of[v]] += beta[v];
    }
    for (const double s: sums)
      EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Predict, AttentionNormalized) {
  const auto p = toy_params(16);
  const auto mols = testing::fixture_smiles();
  const auto graphs = featurize_all(mols);
  for (const auto &g: graphs)
    expect_normalized(predict(p, g), g);
  const auto b = batch_graphs(graphs);
  expect_normalized(predict(p, b), b);
}

TEST(Predict, PermutationInvariant) {
  const auto p = toy_params(16);
  std::mt19937_64 gen(12);
  for (const auto &s: testing::fixture_smiles()) {
    const auto g = graph_of(s);
    const auto ref = predict(p, g).y;
    for (int k = 0; k < 3; ++k) {
      const auto y = predict(p, permuted(g, gen)).y;
      EXPECT_LE((y - ref).cwiseAbs().maxCoeff(), 1e-10) << s;
    }
    const auto w = chem::enumerate_random(chem::parse(s), 99);
    EXPECT_LE((predict(p, graph_of(w)).y - ref).cwiseAbs().maxCoeff(), 1e-10) << w;
  }
}

TEST(Predict, BatchEqualsSingles) {
  const auto p = toy_params(16);
  const auto graphs = featurize_all(testing::fixture_smiles("fixture5.csv"));
  const auto batched = predict(p, batch_graphs(graphs)).y;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto single = predict(p, graphs[i]).y;
    EXPECT_LE((batched.row(i) - single.row(0)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Predict, ReadoutSpansComponents) {
  const auto p = toy_params(16);
  const auto g = graph_of("CCO.N");
  const auto out = predict(p, g);
  ASSERT_EQ(out.y.rows(), 1);
  for (const auto &beta: out.readout_attention) {
    ASSERT_EQ(beta.size(), 4);
    EXPECT_GT(beta[3], 0.0);
    EXPECT_NEAR(beta.sum(), 1.0, 1e-12);
  }
  const auto alone = predict(p, graph_of("CCO")).y;
  EXPECT_GT((out.y - alone).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Predict, Errors) {
  const auto p = toy_params();
  GraphTensors empty;
  EXPECT_EQ(error_code([&] { predict(p, empty); }), Errc::kEmptyGraph);
  auto g = graph_of("CC");
  g.graphs = 2;
  EXPECT_EQ(error_code([&] { predict(p, g); }), Errc::kEmptyGraph);
  auto bad = graph_of("CC");
  bad.src[0] = 7;
  EXPECT_EQ(error_code([&] { predict(p, bad); }), Errc::kShapeMismatch);
}

TEST(Backward, FiniteDifferences) {
  // Two molecules with rings, charges, aromatic and multiple bonds; one
  // missing target entry.
  auto p = toy_params(8);
  const std::vector<GraphTensors> gs = { graph_of("O=C1NC(=O)c2ccccc21"),
                                         graph_of("C[N+](=O)[O-]") };
  const auto g = batch_graphs(gs);
  MatrixXd target(2, 9);
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  for (Eigen::Index i = 0; i < target.size(); ++i)
    target.data()[i] = nd(gen);
  target(1, 4) = std::numeric_limits<double>::quiet_NaN();

  const auto out = predict(p, g);
  MatrixXd dy;
  masked_mse(out.y, target, &dy);
  auto grads = predictor_backward(p, out.cache, dy);
  const auto f = [&] { return masked_mse(predict(p, g).y, target, nullptr); };
  auto named = p.tensors();
  auto gnamed = grads.tensors();
  ASSERT_EQ(named.size(), gnamed.size());
  long checked = 0;
  for (std::size_t k = 0; k < named.size(); ++k) {
    const auto r = testing::finite_difference(*named[k].second, *gnamed[k].second, f);
    EXPECT_LE(r.worst, 1e-4) << named[k].first;
    checked += r.checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(Loss, MaskedMse) {
  MatrixXd y(2, 2);
  y << 1, 2, 3, 4;
  MatrixXd t(2, 2);
  t << 0, std::numeric_limits<double>::quiet_NaN(), 3, 6;
  MatrixXd g;
  EXPECT_DOUBLE_EQ(masked_mse(y, t, &g), (1.0 + 0.0 + 4.0) / 3.0);
  EXPECT_DOUBLE_EQ(g(0, 0), 2.0 / 3.0);
  EXPECT_EQ(g(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(g(1, 1), -4.0 / 3.0);
  MatrixXd nan = MatrixXd::Constant(2, 2, std::numeric_limits<double>::quiet_NaN());
  EXPECT_EQ(error_code([&] { masked_mse(y, nan, nullptr); }), Errc::kAllPositionsMasked);
}

TEST(Scaler, RoundTripAndFit) {
  std::vector<PropertyVector> rows;
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.5, 400.0);
  for (int i = 0; i < 30; ++i) {
    PropertyVector v;
    for (auto &x: v)
      x = u(gen) - 100.0;
    v[kTargetH50] = u(gen);
    rows.push_back(v);
  }
  rows[3][2] = std::numeric_limits<double>::quiet_NaN();
  for (const bool log: { false, true }) {
    const auto s = TargetScaler::fit(rows, log);
    for (const auto &v: rows) {
      const auto back = s.inverse(s.transform(v));
      for (int t = 0; t < kTargetCount; ++t) {
        if (std::isnan(v[t]))
          EXPECT_TRUE(std::isnan(back[t]));
        else
          EXPECT_LE(testing::relative_error(back[t], v[t], 1.0), 1e-12);
      }
    }
    // Training-space columns have mean 0 and population stddev 1.
    for (int t = 0; t < kTargetCount; ++t) {
      double m = 0, q = 0;
      int n = 0;
      for (const auto &v: rows) {
        const double z = s.transform(v)[t];
        if (std::isnan(z))
          continue;
        m += z;
        q += z * z;
        ++n;
      }
      EXPECT_NEAR(m / n, 0.0, 1e-12);
      EXPECT_NEAR(q / n, 1.0, 1e-12);
    }
  }
  const auto s = TargetScaler::fit(rows, true);
  double lm = 0;
  for (const auto &v: rows)
    lm += std::log10(v[kTargetH50]) / 30.0;
  EXPECT_NEAR(s.mean()[kTargetH50], lm, 1e-12);
}

TEST(Scaler, Degenerate) {
  std::vector<PropertyVector> rows(3);
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < kTargetCount; ++t)
      rows[i][t] = 1.0 + i * (t + 1);
  EXPECT_NO_THROW(TargetScaler::fit(rows, true));
  auto flat = rows;
  for (auto &r: flat)
    r[kTargetD] = 8.0;
  EXPECT_EQ(error_code([&] { TargetScaler::fit(flat, true); }), Errc::kDegenerateTarget);
  auto neg = rows;
  neg[0][kTargetH50] = -1.0;
  EXPECT_EQ(error_code([&] { TargetScaler::fit(neg, true); }), Errc::kDegenerateTarget);
  EXPECT_NO_THROW(TargetScaler::fit(neg, false));
}

TEST(Metrics, Examples) {
  const std::vector<double> y = { 0, 1, 2 };
  const auto same = regression_metrics(y, y);
  EXPECT_EQ(same.r2, 1.0);
  EXPECT_EQ(same.mae, 0.0);
  EXPECT_EQ(same.rmse, 0.0);
  const std::vector<double> mean = { 1, 1, 1 };
  EXPECT_EQ(regression_metrics(y, mean).r2, 0.0);
  const std::vector<double> zero = { 0, 0, 0 };
  const auto m = regression_metrics(y, zero);
  EXPECT_DOUBLE_EQ(m.r2, -1.5);
  EXPECT_DOUBLE_EQ(m.mae, 1.0);
  EXPECT_DOUBLE_EQ(m.rmse, std::sqrt(5.0 / 3.0));

  const std::vector<double> two = { 0, 1 };
  EXPECT_EQ(error_code([&] { regression_metrics(y, two); }), Errc::kLengthMismatch);
  const std::vector<double> one = { 1 };
  EXPECT_EQ(error_code([&] { regression_metrics(one, one); }), Errc::kTooFewRows);
  const std::vector<double> flat = { 2, 2, 2 };
  EXPECT_EQ(error_code([&] { regression_metrics(flat, y); }), Errc::kZeroVariance);
}

std::vector<MoleculeRecord> fixture_records(const std::string &name = "fixture20.csv") {
  return read_dataset(testing::data_path(name)).records;
}

TEST(Train, DeterministicAndSplit) {
  auto cfg = toy_config(16);
  cfg.epochs = 5;
  cfg.lr = 1e-3;
  const auto recs = fixture_records();
  const auto a = train_predictor(cfg, recs);
  const auto b = train_predictor(cfg, recs);
  EXPECT_EQ(a.history.train_rmse, b.history.train_rmse);
  EXPECT_EQ(a.history.test_rmse, b.history.test_rmse);
  EXPECT_EQ(a.checkpoint.serialize(), b.checkpoint.serialize());
  EXPECT_EQ(a.test_indices.size(), 4u);
  EXPECT_EQ(a.train_indices.size(), 16u);
  std::vector<std::size_t> all = a.train_indices;
  all.insert(all.end(), a.test_indices.begin(), a.test_indices.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i)
    EXPECT_EQ(all[i], i);

  // Scaler statistics come from the training split alone.
  std::vector<PropertyVector> train;
  for (const auto i: a.train_indices)
    train.push_back(recs[i].properties);
  EXPECT_EQ(a.checkpoint.scaler, TargetScaler::fit(train, true));

  cfg.seed = 22;
  const auto c = train_predictor(cfg, recs);
  EXPECT_NE(c.history.train_rmse, a.history.train_rmse);
}

TEST(Train, ReducesTrainingError) {
  auto cfg = toy_config(32);
  cfg.epochs = 150;
  cfg.lr = 1e-3;
  cfg.test_fraction = 0.0;
  const auto run = train_predictor(cfg, fixture_records());
  ASSERT_EQ(run.history.epochs(), 150);
  EXPECT_TRUE(std::isnan(run.history.test_rmse.back()));
  EXPECT_LT(run.history.train_rmse.back(), 0.5 * run.history.train_rmse.front());
}

TEST(Train, Errors) {
  auto cfg = toy_config();
  cfg.epochs = 1;
  auto recs = fixture_records("fixture5.csv");
  EXPECT_EQ(error_code([&] { train_predictor(cfg, std::span(recs).first(1)); }),
            Errc::kEmptyInput);
  auto bad = recs;
  bad[2].smiles = "C1CC";
  try {
    train_predictor(cfg, bad);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kInvalidSmiles);
    EXPECT_EQ(e.index(), 2u);
  }
  auto flat = recs;
  for (auto &r: flat)
    r.properties[kTargetP] = 30.0;
  cfg.test_fraction = 0.0;
  EXPECT_EQ(error_code([&] { train_predictor(cfg, flat); }), Errc::kDegenerateTarget);
  cfg.batch_size = 0;
  EXPECT_EQ(error_code([&] { train_predictor(cfg, recs); }), Errc::kBadConfig);
}

TEST(Checkpoint, RoundTrip) {
  auto cfg = toy_config(12);
  cfg.epochs = 3;
  const auto run = train_predictor(cfg, fixture_records());
  const auto bytes = run.checkpoint.serialize();
  const auto back = PredictorCheckpoint::deserialize(bytes);
  EXPECT_EQ(back.serialize(), bytes);
  EXPECT_EQ(back.config, cfg);
  EXPECT_EQ(back.adam.step, run.checkpoint.adam.step);
  const auto mols = testing::fixture_smiles();
  const auto p1 = predict_properties(run.checkpoint, mols);
  const auto p2 = predict_properties(back, mols);
  EXPECT_EQ(p1, p2);

  // Raw units are the inverse-scaled standardized outputs.
  const auto scaled = predict_scaled(back.params, featurize_all(mols));
  for (std::size_t i = 0; i < mols.size(); ++i)
    EXPECT_EQ(back.scaler.inverse(scaled[i]), p1[i]);

  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(error_code([&] { PredictorCheckpoint::deserialize(bad); }),
            Errc::kCheckpointFormat);
  auto version = bytes;
  version[8] = 9;
  EXPECT_EQ(error_code([&] { PredictorCheckpoint::deserialize(version); }),
            Errc::kCheckpointVersion);
  auto cut = bytes;
  cut.resize(cut.size() - 5);
  EXPECT_EQ(error_code([&] { PredictorCheckpoint::deserialize(cut); }),
            Errc::kCheckpointFormat);
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_EQ(error_code([&] { PredictorCheckpoint::deserialize(extra); }),
            Errc::kCheckpointFormat);
}

}  // namespace
}  // namespace hemgen::gnn
