//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//
// SMILES parsing, canonicalization, augmentation and fingerprint
// similarity over the bundled 20-molecule fixture.

#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "hemgen/chem/smiles.h"
#include "hemgen/chem/writer.h"
#include "hemgen/dataset.h"
#include "hemgen/metrics/genmetrics.h"

namespace {

const std::vector<std::string> &corpus() {
  static const auto s = hemgen::smiles_of(
      hemgen::read_dataset(std::string(HEMGEN_BENCH_DATA_DIR) + "/fixture20.csv").records);
  return s;
}

void BM_Parse(benchmark::State &state) {
  for (auto _: state)
    for (const auto &s: corpus())
      benchmark::DoNotOptimize(hemgen::chem::parse(s));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(corpus().size()));
}
BENCHMARK(BM_Parse);

void BM_Canonical(benchmark::State &state) {
  for (auto _: state)
    for (const auto &s: corpus())
      benchmark::DoNotOptimize(hemgen::chem::canonical_smiles(s));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(corpus().size()));
}
BENCHMARK(BM_Canonical);

void BM_Augment(benchmark::State &state) {
  for (auto _: state)
    benchmark::DoNotOptimize(
        hemgen::chem::augment_dataset(corpus(), static_cast<int>(state.range(0)), 1));
}
BENCHMARK(BM_Augment)->Arg(3)->Arg(10);

void BM_MeanTanimoto(benchmark::State &state) {
  for (auto _: state)
    benchmark::DoNotOptimize(hemgen::metrics::mean_tanimoto(corpus()));
}
BENCHMARK(BM_MeanTanimoto);

}  // namespace

BENCHMARK_MAIN();
