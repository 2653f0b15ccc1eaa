//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/gnn/features.h"

#include <algorithm>
#include <string>

#include "hemgen/chem/element.h"
#include "hemgen/error.h"

namespace hemgen::gnn {

using Eigen::MatrixXd;

GraphTensors featurize(const chem::MolGraph &g) {
  if (g.empty())
    throw Error(Errc::kEmptyGraph, "cannot featurize an empty graph");
  GraphTensors t;
  t.graphs = 1;
  const int n = g.atom_count();
  t.x = MatrixXd::Zero(n, kNodeFeatures);
  for (int i = 0; i < n; ++i) {
    const auto &a = g.atom(i);
    const auto it = std::find(kFeatureElements.begin(), kFeatureElements.end(),
                              a.atomic_number);
    if (it == kFeatureElements.end())
      throw Error(Errc::kUnsupportedElement,
                  "element " + std::string(chem::element(a.atomic_number).symbol) +
                    " has no feature column",
                  static_cast<std::size_t>(i));
    t.x(i, it - kFeatureElements.begin()) = 1.0;
    t.x(i, kDegreeOffset + std::min(g.degree(i), 5)) = 1.0;
    t.x(i, kChargeColumn) = a.charge;
    t.x(i, kAromaticColumn) = a.aromatic ? 1.0 : 0.0;
    t.x(i, kHydrogenOffset + std::clamp(a.hydrogens, 0, 4)) = 1.0;
    t.x(i, kRingColumn) = g.atom_in_ring(i) ? 1.0 : 0.0;
  }
  const int m = g.bond_count();
  t.edge_x = MatrixXd::Zero(2 * m, kEdgeFeatures);
  t.src.resize(2 * m);
  t.dst.resize(2 * m);
  for (int k = 0; k < m; ++k) {
    const auto &b = g.bond(k);
    int col = 0;
    switch (b.order) {
    case chem::BondOrder::kSingle: col = 0; break;
    case chem::BondOrder::kDouble: col = 1; break;
    case chem::BondOrder::kTriple: col = 2; break;
    case chem::BondOrder::kAromatic: col = 3; break;
    }
    for (const int e: { 2 * k, 2 * k + 1 }) {
      t.edge_x(e, col) = 1.0;
      t.edge_x(e, 4) = g.bond_in_ring(k) ? 1.0 : 0.0;
    }
    t.src[2 * k] = b.a;
    t.dst[2 * k] = b.b;
    t.src[2 * k + 1] = b.b;
    t.dst[2 * k + 1] = b.a;
  }
  t.graph_of.assign(n, 0);
  return t;
}

GraphTensors batch_graphs(std::span<const GraphTensors *const> graphs) {
  GraphTensors out;
  int nodes = 0;
  int edges = 0;
  for (const auto *g: graphs) {
    nodes += g->nodes();
    edges += g->edges();
  }
  out.x.resize(nodes, kNodeFeatures);
  out.edge_x.resize(edges, kEdgeFeatures);
  out.src.reserve(edges);
  out.dst.reserve(edges);
  out.graph_of.reserve(nodes);
  int node_base = 0;
  int edge_base = 0;
  for (const auto *g: graphs) {
    out.x.middleRows(node_base, g->nodes()) = g->x;
    out.edge_x.middleRows(edge_base, g->edges()) = g->edge_x;
    for (int e = 0; e < g->edges(); ++e) {
      out.src.push_back(g->src[e] + node_base);
      out.dst.push_back(g->dst[e] + node_base);
    }
    for (const int id: g->graph_of)
      out.graph_of.push_back(id + out.graphs);
    out.graphs += g->graphs;
    node_base += g->nodes();
    edge_base += g->edges();
  }
  return out;
}

GraphTensors batch_graphs(std::span<const GraphTensors> graphs) {
  std::vector<const GraphTensors *> ptrs;
  ptrs.reserve(graphs.size());
  for (const auto &g: graphs)
    ptrs.push_back(&g);
  return batch_graphs(std::span<const GraphTensors *const>(ptrs));
}

}  // namespace hemgen::gnn
