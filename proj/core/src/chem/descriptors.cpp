//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/chem/descriptors.h"

#include <vector>

#include "hemgen/chem/element.h"
#include "hemgen/error.h"

namespace hemgen::chem {
namespace {

constexpr int kC = 6, kN = 7, kO = 8;

bool is(const MolGraph &g, int atom, int z) {
  return g.atom(atom).atomic_number == z;
}

BondOrder order(const MolGraph &g, const Neighbor &nb) {
  return g.bond(nb.bond).order;
}

// N bearing two terminal oxygens as N(=O)=O or [N+](=O)[O-]. Returns the
// index of the remaining (attachment) neighbor, -1 for a bare NO2, or -2
// when `n` is not a nitro nitrogen.
int nitro_attachment(const MolGraph &g, int n) {
  if (!is(g, n, kN) || g.atom(n).aromatic)
    return -2;
  int doubles = 0, anionic = 0, attach = -1, others = 0;
  for (const Neighbor &nb: g.neighbors(n)) {
    const Atom &o = g.atom(nb.atom);
    const bool terminal_o = o.atomic_number == kO && g.degree(nb.atom) == 1
                            && o.hydrogens == 0;
    if (terminal_o && order(g, nb) == BondOrder::kDouble && o.charge == 0)
      ++doubles;
    else if (terminal_o && order(g, nb) == BondOrder::kSingle
             && o.charge == -1)
      ++anionic;
    else {
      attach = nb.atom;
      ++others;
    }
  }
  if (others > 1)
    return -2;
  const int charge = g.atom(n).charge;
  if ((doubles == 2 && anionic == 0 && charge == 0)
      || (doubles == 1 && anionic == 1 && charge == 1))
    return attach;
  return -2;
}

bool carbonyl_carbon(const MolGraph &g, int c, int *oxygen) {
  if (!is(g, c, kC))
    return false;
  for (const Neighbor &nb: g.neighbors(c)) {
    if (is(g, nb.atom, kO) && order(g, nb) == BondOrder::kDouble
        && g.degree(nb.atom) == 1) {
      if (oxygen != nullptr)
        *oxygen = nb.atom;
      return true;
    }
  }
  return false;
}

int aromatic_cycles(const MolGraph &g) {
  // cyclomatic number of the subgraph made of aromatic bonds
  const int n = g.atom_count();
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i)
    parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  int cycles = 0;
  for (const Bond &b: g.bonds()) {
    if (b.order != BondOrder::kAromatic)
      continue;
    const int ra = find(b.a), rb = find(b.b);
    if (ra == rb)
      ++cycles;
    else
      parent[ra] = rb;
  }
  return cycles;
}

}  // namespace

std::string_view group_name(Group g) noexcept {
  switch (g) {
  case Group::kNitro: return "nitro";
  case Group::kNitramine: return "nitramine";
  case Group::kNitrateEster: return "nitrate_ester";
  case Group::kAromaticRing: return "aromatic_ring";
  case Group::kEther: return "ether";
  case Group::kKetone: return "ketone";
  case Group::kAmide: return "amide";
  case Group::kEster: return "ester";
  }
  return "";
}

int count_group(const MolGraph &g, Group group) {
  int count = 0;
  const int n = g.atom_count();
  switch (group) {
  case Group::kNitro:
  case Group::kNitramine:
  case Group::kNitrateEster:
    for (int v = 0; v < n; ++v) {
      const int attach = nitro_attachment(g, v);
      if (attach == -2)
        continue;
      if (group == Group::kNitro)
        ++count;
      else if (group == Group::kNitramine && attach >= 0 && is(g, attach, kN))
        ++count;
      else if (group == Group::kNitrateEster && attach >= 0
               && is(g, attach, kO))
        ++count;
    }
    return count;
  case Group::kAromaticRing:
    return aromatic_cycles(g);
  case Group::kEther:
    for (int v = 0; v < n; ++v) {
      if (!is(g, v, kO) || g.atom(v).aromatic || g.degree(v) != 2
          || g.atom(v).hydrogens != 0)
        continue;
      bool ok = true;
      for (const Neighbor &nb: g.neighbors(v))
        ok = ok && is(g, nb.atom, kC) && order(g, nb) == BondOrder::kSingle
             && !carbonyl_carbon(g, nb.atom, nullptr);
      count += ok ? 1 : 0;
    }
    return count;
  case Group::kKetone:
  case Group::kAmide:
  case Group::kEster:
    for (int v = 0; v < n; ++v) {
      int oxo = -1;
      if (!carbonyl_carbon(g, v, &oxo))
        continue;
      int carbons = 0, others = 0;
      bool amide_n = false, ester_o = false;
      for (const Neighbor &nb: g.neighbors(v)) {
        if (nb.atom == oxo)
          continue;
        if (is(g, nb.atom, kC)) {
          ++carbons;
          continue;
        }
        ++others;
        if (order(g, nb) != BondOrder::kSingle)
          continue;
        if (is(g, nb.atom, kN))
          amide_n = true;
        if (is(g, nb.atom, kO) && g.degree(nb.atom) == 2) {
          for (const Neighbor &o2: g.neighbors(nb.atom))
            if (o2.atom != v && is(g, o2.atom, kC))
              ester_o = true;
        }
      }
      if (group == Group::kKetone && carbons == 2 && others == 0)
        ++count;
      else if (group == Group::kAmide && amide_n)
        ++count;
      else if (group == Group::kEster && ester_o && carbons >= 1)
        ++count;
    }
    return count;
  }
  return 0;
}

double molecular_weight(const MolGraph &g) {
  double mw = 0.0;
  for (const Atom &a: g.atoms())
    mw += element(a.atomic_number).mass + a.hydrogens * kHydrogenMass;
  return mw;
}

DescriptorSet descriptors(const MolGraph &g) {
  if (g.empty())
    throw Error(Errc::kInvalidGraph, "empty graph");
  DescriptorSet d;
  d.molecular_weight = molecular_weight(g);
  d.ring_count = g.ring_count();
  for (const Group grp: kAllGroups)
    d.group_counts[std::string(group_name(grp))] = count_group(g, grp);
  return d;
}

}  // namespace hemgen::chem
