//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//
// Embedding construction, mutual coherence and batch conditioning checks.

#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "hemgen/seq/embedding.h"
#include "hemgen/theory/verifier.h"

namespace {

using namespace hemgen;

void BM_ShaEmbedding(benchmark::State &state) {
  const int v = static_cast<int>(state.range(0));
  for (auto _: state)
    benchmark::DoNotOptimize(seq::sha_fixed_embedding(v, 128, 10));
}
BENCHMARK(BM_ShaEmbedding)->Arg(41)->Arg(100);

void BM_Coherence(benchmark::State &state) {
  const auto e = seq::sha_fixed_embedding(static_cast<int>(state.range(0)), 128, 10);
  for (auto _: state)
    benchmark::DoNotOptimize(theory::coherence(e));
}
BENCHMARK(BM_Coherence)->Arg(41)->Arg(100)->Arg(400);

void BM_Gershgorin(benchmark::State &state) {
  const auto e = seq::sha_fixed_embedding(100, 128, 10);
  std::vector<int> batch(static_cast<std::size_t>(state.range(0)));
  std::iota(batch.begin(), batch.end(), 0);
  for (auto _: state)
    benchmark::DoNotOptimize(theory::gershgorin_check(e, batch));
}
BENCHMARK(BM_Gershgorin)->Arg(8)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
