//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_GNN_FEATURES_H_
#define HEMGEN_GNN_FEATURES_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hemgen/chem/molgraph.h"

namespace hemgen::gnn {

// Supported elements, in one-hot order: H B C N O F Si P S Cl Br I.
inline constexpr std::array<std::uint8_t, 12> kFeatureElements = {
  1, 5, 6, 7, 8, 9, 14, 15, 16, 17, 35, 53,
};

// Node feature layout (26 columns):
//   [0, 12)   element one-hot
//   [12, 18)  degree one-hot 0..5 (explicit neighbors, clamped at 5)
//   18        formal charge
//   19        aromatic flag
//   [20, 25)  hydrogen count one-hot 0..4 (clamped at 4)
//   25        ring membership flag
inline constexpr int kNodeFeatures = 26;
inline constexpr int kDegreeOffset = 12;
inline constexpr int kChargeColumn = 18;
inline constexpr int kAromaticColumn = 19;
inline constexpr int kHydrogenOffset = 20;
inline constexpr int kRingColumn = 25;

// Edge feature layout (5 columns): bond order one-hot single, double,
// triple, aromatic; ring flag.
inline constexpr int kEdgeFeatures = 5;

// One graph or a batch of graphs. Bond k of a graph becomes directed edges
// 2k (a -> b) and 2k + 1 (b -> a).
struct GraphTensors {
  int graphs = 0;
  Eigen::MatrixXd x;       // nodes x kNodeFeatures
  Eigen::MatrixXd edge_x;  // edges x kEdgeFeatures
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<int> graph_of;  // per node

  int nodes() const noexcept { return static_cast<int>(x.rows()); }
  int edges() const noexcept { return static_cast<int>(src.size()); }
};

// Throws kUnsupportedElement(atom index), kEmptyGraph.
GraphTensors featurize(const chem::MolGraph &g);

// Concatenates graphs, offsetting node indices and graph ids.
GraphTensors batch_graphs(std::span<const GraphTensors> graphs);
GraphTensors batch_graphs(std::span<const GraphTensors *const> graphs);

}  // namespace hemgen::gnn

#endif  // HEMGEN_GNN_FEATURES_H_
