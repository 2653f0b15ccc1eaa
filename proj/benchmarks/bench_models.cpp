//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//
// Training-step and inference cost of the LSTM generator and the graph
// property predictor at their default sizes.

#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "hemgen/chem/smiles.h"
#include "hemgen/dataset.h"
#include "hemgen/gnn/features.h"
#include "hemgen/gnn/model.h"
#include "hemgen/gnn/predictor.h"
#include "hemgen/seq/generator.h"
#include "hemgen/seq/lstm.h"
#include "hemgen/seq/vocabulary.h"

namespace {

using namespace hemgen;

const std::vector<std::string> &corpus() {
  static const auto s =
      smiles_of(read_dataset(std::string(HEMGEN_BENCH_DATA_DIR) + "/fixture20.csv").records);
  return s;
}

struct LstmFixture {
  seq::Vocabulary vocab;
  seq::LstmParameters params;
  seq::Batch batch;

  explicit LstmFixture(int hidden) : vocab(seq::Vocabulary::from_smiles(corpus())) {
    seq::GeneratorConfig c;
    c.hidden_size = hidden;
    params = seq::init_parameters(c, vocab);
    std::vector<std::vector<int>> seqs;
    for (const auto &s: corpus())
      seqs.push_back(vocab.encode(s).ids);
    batch = seq::make_batch(seqs);
  }
};

void BM_LstmForward(benchmark::State &state) {
  const LstmFixture f(static_cast<int>(state.range(0)));
  for (auto _: state)
    benchmark::DoNotOptimize(seq::forward(f.params, f.batch, 0.1, true, 1));
  state.SetItemsProcessed(state.iterations() * f.batch.unmasked_count());
}
BENCHMARK(BM_LstmForward)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_LstmForwardBackward(benchmark::State &state) {
  const LstmFixture f(static_cast<int>(state.range(0)));
  for (auto _: state) {
    const auto fwd = seq::forward(f.params, f.batch, 0.1, true, 1);
    benchmark::DoNotOptimize(
        seq::backward(f.params, fwd.cache, seq::loss_gradient(fwd.logits, f.batch)));
  }
  state.SetItemsProcessed(state.iterations() * f.batch.unmasked_count());
}
BENCHMARK(BM_LstmForwardBackward)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Sample(benchmark::State &state) {
  const LstmFixture f(256);
  seq::SampleOptions o;
  o.n = static_cast<int>(state.range(0));
  for (auto _: state)
    benchmark::DoNotOptimize(seq::sample(f.params, f.vocab, o));
  state.SetItemsProcessed(state.iterations() * o.n);
}
BENCHMARK(BM_Sample)->Arg(32)->Unit(benchmark::kMillisecond);

struct GnnFixture {
  gnn::PredictorParameters params = gnn::init_predictor({});
  gnn::GraphTensors graph;

  GnnFixture() {
    const auto graphs = gnn::featurize_all(corpus());
    graph = gnn::batch_graphs(graphs);
  }
};

void BM_GnnPredict(benchmark::State &state) {
  const GnnFixture f;
  for (auto _: state)
    benchmark::DoNotOptimize(gnn::predict(f.params, f.graph));
  state.SetItemsProcessed(state.iterations() * f.graph.graphs);
}
BENCHMARK(BM_GnnPredict)->Unit(benchmark::kMillisecond);

void BM_GnnForwardBackward(benchmark::State &state) {
  const GnnFixture f;
  for (auto _: state) {
    const auto out = gnn::predict(f.params, f.graph);
    Eigen::MatrixXd dy;
    gnn::masked_mse(out.y, Eigen::MatrixXd::Zero(out.y.rows(), out.y.cols()), &dy);
    benchmark::DoNotOptimize(gnn::predictor_backward(f.params, out.cache, dy));
  }
  state.SetItemsProcessed(state.iterations() * f.graph.graphs);
}
BENCHMARK(BM_GnnForwardBackward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
