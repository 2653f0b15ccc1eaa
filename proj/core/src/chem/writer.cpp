//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/chem/writer.h"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>
#include <tuple>

#include "hemgen/chem/element.h"
#include "hemgen/chem/smiles.h"
#include "hemgen/error.h"
#include "hemgen/rng.h"

namespace hemgen::chem {
namespace {

std::string atom_symbol(const MolGraph &g, int i, bool isotopes) {
  const Atom &a = g.atom(i);
  const Element &e = element(a.atomic_number);
  std::string sym(e.symbol);
  if (a.aromatic)
    sym[0] = static_cast<char>(sym[0] - 'A' + 'a');

  const bool with_isotope = isotopes && a.isotope.has_value();
  const bool plain = is_organic_subset(a.atomic_number) && a.charge == 0
                     && !with_isotope
                     && (!a.aromatic || is_aromatic_capable(a.atomic_number))
                     && implicit_hydrogens(g, i) == a.hydrogens;
  if (plain)
    return sym;

  std::string out = "[";
  if (with_isotope)
    out += std::to_string(*a.isotope);
  out += sym;
  if (a.hydrogens > 0) {
    out += 'H';
    if (a.hydrogens > 1)
      out += std::to_string(a.hydrogens);
  }
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1)
      out += std::to_string(std::abs(a.charge));
  }
  out += ']';
  return out;
}

std::string bond_symbol(const MolGraph &g, const Bond &b) {
  const bool both_aromatic = g.atom(b.a).aromatic && g.atom(b.b).aromatic;
  switch (b.order) {
  case BondOrder::kSingle: return both_aromatic ? "-" : "";
  case BondOrder::kDouble: return "=";
  case BondOrder::kTriple: return "#";
  case BondOrder::kAromatic: return both_aromatic ? "" : ":";
  }
  return "";
}

std::string ring_label(int digit) {
  if (digit < 10)
    return std::string(1, static_cast<char>('0' + digit));
  return "%" + std::to_string(digit);
}

class Writer {
public:
  Writer(const MolGraph &g, const WritePlan &plan)
      : g_(g), plan_(plan), visited_(g.atom_count(), 0),
        bond_seen_(g.bond_count(), 0), children_(g.atom_count()),
        ring_open_(g.atom_count()), ring_close_(g.atom_count()),
        digit_of_(g.bond_count(), -1), digit_used_(100, 0) { }

  std::string run() {
    std::string out;
    bool first = true;
    for (const int root: plan_.roots) {
      if (visited_[root])
        continue;
      discover(root, -1);
      if (!first)
        out += '.';
      first = false;
      emit(root, -1, out);
    }
    return out;
  }

private:
  void discover(int u, int parent_bond) {
    visited_[u] = 1;
    for (const Neighbor &nb: plan_.neighbor_order[u]) {
      if (nb.bond == parent_bond || bond_seen_[nb.bond])
        continue;
      bond_seen_[nb.bond] = 1;
      if (!visited_[nb.atom]) {
        children_[u].push_back(nb);
        discover(nb.atom, nb.bond);
      } else {
        // nb.atom is an ancestor: the ring opens there and closes here
        ring_open_[nb.atom].push_back(nb.bond);
        ring_close_[u].push_back(nb.bond);
      }
    }
  }

  void emit(int u, int parent_bond, std::string &out) {
    if (parent_bond >= 0)
      out += bond_symbol(g_, g_.bond(parent_bond));
    out += atom_symbol(g_, u, plan_.isotopes);

    for (const int b: ring_close_[u])
      out += ring_label(digit_of_[b]);
    for (const int b: ring_open_[u]) {
      int d = 1;
      while (d < 100 && digit_used_[d])
        ++d;
      if (d >= 100)
        throw Error(Errc::kInvalidGraph, "more than 99 open rings");
      digit_used_[d] = 1;
      digit_of_[b] = d;
      out += bond_symbol(g_, g_.bond(b));
      out += ring_label(d);
    }
    for (const int b: ring_close_[u])
      digit_used_[digit_of_[b]] = 0;

    const auto &kids = children_[u];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const bool last = i + 1 == kids.size();
      if (!last)
        out += '(';
      emit(kids[i].atom, kids[i].bond, out);
      if (!last)
        out += ')';
    }
  }

  const MolGraph &g_;
  const WritePlan &plan_;
  std::vector<char> visited_;
  std::vector<char> bond_seen_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<int>> ring_open_;
  std::vector<std::vector<int>> ring_close_;
  std::vector<int> digit_of_;
  std::vector<char> digit_used_;
};

// Dense ranks (0..k-1) of `keys`, equal keys share a rank.
template <class Key>
std::vector<int> dense_ranks(const std::vector<Key> &keys) {
  std::vector<int> idx(keys.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return keys[a] < keys[b]; });
  std::vector<int> rank(keys.size(), 0);
  int r = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k > 0 && keys[idx[k - 1]] < keys[idx[k]])
      ++r;
    rank[idx[k]] = r;
  }
  return rank;
}

int class_count(const std::vector<int> &rank) {
  return rank.empty() ? 0 : *std::max_element(rank.begin(), rank.end()) + 1;
}

// Iterates neighbor-signature refinement until the partition is stable.
std::vector<int> refine(const MolGraph &g, std::vector<int> rank) {
  const int n = g.atom_count();
  int classes = class_count(rank);
  while (true) {
    std::vector<std::pair<int, std::vector<std::pair<int, int>>>> keys(n);
    for (int v = 0; v < n; ++v) {
      keys[v].first = rank[v];
      auto &sig = keys[v].second;
      for (const Neighbor &nb: g.neighbors(v))
        sig.emplace_back(static_cast<int>(g.bond(nb.bond).order),
                         rank[nb.atom]);
      std::sort(sig.begin(), sig.end());
    }
    std::vector<int> next = dense_ranks(keys);
    const int next_classes = class_count(next);
    rank = std::move(next);
    if (next_classes == classes)
      return rank;
    classes = next_classes;
  }
}

std::string emit_ranked(const MolGraph &g, const std::vector<int> &rank) {
  const int n = g.atom_count();
  WritePlan plan;
  plan.neighbor_order.resize(n);
  for (int v = 0; v < n; ++v) {
    auto nbs = g.neighbors(v);
    auto &order = plan.neighbor_order[v];
    order.assign(nbs.begin(), nbs.end());
    std::sort(order.begin(), order.end(),
              [&](const Neighbor &a, const Neighbor &b) {
                return rank[a.atom] < rank[b.atom];
              });
  }

  const int comps = g.component_count();
  std::vector<int> root(comps, -1);
  auto comp = g.component_of();
  for (int v = 0; v < n; ++v)
    if (root[comp[v]] < 0 || rank[v] < rank[root[comp[v]]])
      root[comp[v]] = v;

  std::vector<std::string> parts;
  parts.reserve(comps);
  for (const int r: root) {
    plan.roots = { r };
    parts.push_back(write_smiles(g, plan));
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0)
      out += '.';
    out += parts[i];
  }
  return out;
}

// Terminal atoms hanging off the same atom through the same bond order are
// interchangeable; branching on more than one of them is redundant.
bool twin_of(const MolGraph &g, int a, int b) {
  if (g.degree(a) != 1 || g.degree(b) != 1)
    return false;
  const Neighbor na = g.neighbors(a)[0];
  const Neighbor nb = g.neighbors(b)[0];
  return na.atom == nb.atom
         && g.bond(na.bond).order == g.bond(nb.bond).order;
}

class CanonicalSearch {
public:
  explicit CanonicalSearch(const MolGraph &g): g_(g) { }

  std::string run() {
    search(refine(g_, invariant_ranks(g_)));
    return best_;
  }

private:
  void search(const std::vector<int> &rank) {
    const int n = g_.atom_count();
    if (class_count(rank) == n) {
      ++leaves_;
      std::string s = emit_ranked(g_, rank);
      if (!have_best_ || s < best_) {
        best_ = std::move(s);
        have_best_ = true;
      }
      return;
    }

    // lowest rank value shared by more than one atom
    std::vector<int> size(n, 0);
    for (const int r: rank)
      ++size[r];
    int target = -1;
    for (int r = 0; r < n; ++r) {
      if (size[r] > 1) {
        target = r;
        break;
      }
    }

    std::vector<int> tried;
    for (int v = 0; v < n; ++v) {
      if (rank[v] != target)
        continue;
      if (std::any_of(tried.begin(), tried.end(),
                      [&](int t) { return twin_of(g_, t, v); }))
        continue;
      if (!tried.empty() && leaves_ >= kCanonicalLeafBudget)
        break;
      tried.push_back(v);

      // individualize v: it keeps rank `target`, the rest of the class and
      // every higher class move up by one
      std::vector<int> split(rank);
      for (int u = 0; u < n; ++u)
        if (rank[u] > target || (rank[u] == target && u != v))
          split[u] = rank[u] + 1;
      search(refine(g_, split));
    }
  }

  const MolGraph &g_;
  std::string best_;
  bool have_best_ = false;
  int leaves_ = 0;
};

}  // namespace

std::string write_smiles(const MolGraph &g, const WritePlan &plan) {
  if (static_cast<int>(plan.neighbor_order.size()) != g.atom_count())
    throw Error(Errc::kInvalidGraph, "write plan does not match graph");
  return Writer(g, plan).run();
}

std::vector<int> invariant_ranks(const MolGraph &g) {
  using Key = std::tuple<int, int, int, int, int>;
  std::vector<Key> keys(g.atom_count());
  for (int v = 0; v < g.atom_count(); ++v) {
    const Atom &a = g.atom(v);
    keys[v] = { a.atomic_number, a.aromatic ? 1 : 0, a.charge, g.degree(v),
                a.hydrogens };
  }
  return dense_ranks(keys);
}

std::string canonicalize(const MolGraph &g) {
  if (g.empty())
    throw Error(Errc::kInvalidGraph, "empty graph");
  if (!has_valid_valences(g))
    throw Error(Errc::kInvalidGraph, "valence check failed");
  return CanonicalSearch(g).run();
}

std::string canonical_smiles(std::string_view smiles) {
  return canonicalize(parse(smiles));
}

std::string enumerate_random(const MolGraph &g, std::uint64_t seed) {
  if (g.empty() || !has_valid_valences(g))
    throw Error(Errc::kInvalidGraph, "cannot enumerate an invalid graph");
  Rng rng(seed);
  const int n = g.atom_count();

  WritePlan plan;
  plan.isotopes = true;
  plan.neighbor_order.resize(n);
  for (int v = 0; v < n; ++v) {
    auto nbs = g.neighbors(v);
    plan.neighbor_order[v].assign(nbs.begin(), nbs.end());
    rng.shuffle(std::span(plan.neighbor_order[v]));
  }

  std::vector<std::vector<int>> members(g.component_count());
  auto comp = g.component_of();
  for (int v = 0; v < n; ++v)
    members[comp[v]].push_back(v);
  for (const auto &m: members)
    plan.roots.push_back(m[rng.below(m.size())]);
  rng.shuffle(std::span(plan.roots));
  return write_smiles(g, plan);
}

std::vector<std::string> augment_dataset(std::span<const std::string> smiles,
                                         int factor, std::uint64_t seed) {
  if (factor < 1)
    throw Error(Errc::kBadConfig, "augmentation factor must be >= 1");
  std::vector<MolGraph> graphs;
  graphs.reserve(smiles.size());
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    try {
      graphs.push_back(parse(smiles[i]));
    } catch (const Error &e) {
      throw Error(Errc::kInvalidMolecule, e.what(), i);
    }
    if (!has_valid_valences(graphs.back()))
      throw Error(Errc::kInvalidMolecule, "valence check failed", i);
  }
  if (factor == 1)
    return { smiles.begin(), smiles.end() };

  std::vector<std::string> out;
  out.reserve(smiles.size() * factor);
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    out.push_back(smiles[i]);
    for (int k = 1; k < factor; ++k) {
      const std::uint64_t s = mix64(seed ^ mix64(i * 1009 + k));
      out.push_back(enumerate_random(graphs[i], s));
    }
  }
  return out;
}

}  // namespace hemgen::chem
