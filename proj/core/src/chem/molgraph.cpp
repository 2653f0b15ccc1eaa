//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/chem/molgraph.h"

#include <algorithm>
#include <set>
#include <utility>

#include "hemgen/error.h"

namespace hemgen::chem {

double bond_order_value(BondOrder order) noexcept {
  switch (order) {
  case BondOrder::kSingle: return 1.0;
  case BondOrder::kDouble: return 2.0;
  case BondOrder::kTriple: return 3.0;
  case BondOrder::kAromatic: return 1.5;
  }
  return 0.0;
}

MolGraph::MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
  const int n = atom_count();
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < bonds_.size(); ++i) {
    const Bond &b = bonds_[i];
    if (b.a < 0 || b.b < 0 || b.a >= n || b.b >= n)
      throw Error(Errc::kInvalidGraph, "bond endpoint out of range", i);
    if (b.a == b.b)
      throw Error(Errc::kInvalidGraph, "self bond", i);
    if (!seen.emplace(std::min(b.a, b.b), std::max(b.a, b.b)).second)
      throw Error(Errc::kInvalidGraph, "duplicate bond", i);
  }
  build_adjacency();
  find_components();
  find_ring_bonds();
}

void MolGraph::build_adjacency() {
  const int n = atom_count();
  std::vector<int> deg(n, 0);
  for (const Bond &b: bonds_) {
    ++deg[b.a];
    ++deg[b.b];
  }
  adj_offset_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i)
    adj_offset_[i + 1] = adj_offset_[i] + deg[i];
  adj_.resize(adj_offset_[n]);
  std::vector<int> fill(adj_offset_.begin(), adj_offset_.end() - 1);
  for (int i = 0; i < bond_count(); ++i) {
    const Bond &b = bonds_[i];
    adj_[fill[b.a]++] = { b.b, i };
    adj_[fill[b.b]++] = { b.a, i };
  }
}

void MolGraph::find_components() {
  const int n = atom_count();
  component_.assign(n, -1);
  components_ = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (component_[s] >= 0)
      continue;
    component_[s] = components_;
    stack.push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const Neighbor &nb: neighbors(v)) {
        if (component_[nb.atom] < 0) {
          component_[nb.atom] = components_;
          stack.push_back(nb.atom);
        }
      }
    }
    ++components_;
  }
}

// A bond lies on a ring iff it is not a bridge (iterative Tarjan lowlink).
void MolGraph::find_ring_bonds() {
  const int n = atom_count();
  ring_bond_.assign(bonds_.size(), 1);
  ring_atom_.assign(n, 0);
  std::vector<int> disc(n, -1), low(n, 0);
  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  std::vector<Frame> stack;
  int timer = 0;
  for (int s = 0; s < n; ++s) {
    if (disc[s] >= 0)
      continue;
    disc[s] = low[s] = timer++;
    stack.push_back({ s, -1, 0 });
    while (!stack.empty()) {
      Frame &f = stack.back();
      auto nbs = neighbors(f.atom);
      if (f.next < nbs.size()) {
        const Neighbor nb = nbs[f.next++];
        if (nb.bond == f.parent_bond)
          continue;
        if (disc[nb.atom] < 0) {
          disc[nb.atom] = low[nb.atom] = timer++;
          stack.push_back({ nb.atom, nb.bond, 0 });
        } else {
          low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame &parent = stack.back();
          low[parent.atom] = std::min(low[parent.atom], low[done.atom]);
          if (low[done.atom] > disc[parent.atom])
            ring_bond_[done.parent_bond] = 0;
        }
      }
    }
  }
  for (std::size_t i = 0; i < bonds_.size(); ++i) {
    if (ring_bond_[i]) {
      ring_atom_[bonds_[i].a] = 1;
      ring_atom_[bonds_[i].b] = 1;
    }
  }
}

int MolGraph::find_bond(int a, int b) const noexcept {
  for (const Neighbor &nb: neighbors(a))
    if (nb.atom == b)
      return nb.bond;
  return -1;
}

double MolGraph::valence_sum(int atom) const noexcept {
  double sum = atoms_[atom].hydrogens;
  for (const Neighbor &nb: neighbors(atom))
    sum += bond_order_value(bonds_[nb.bond].order);
  return sum;
}

}  // namespace hemgen::chem
