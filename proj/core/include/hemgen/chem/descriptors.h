//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_CHEM_DESCRIPTORS_H_
#define HEMGEN_CHEM_DESCRIPTORS_H_

#include <array>
#include <map>
#include <string>
#include <string_view>

#include "hemgen/chem/molgraph.h"

namespace hemgen::chem {

enum class Group {
  kNitro,
  kNitramine,
  kNitrateEster,
  kAromaticRing,
  kEther,
  kKetone,
  kAmide,
  kEster,
};

inline constexpr std::array kAllGroups = {
  Group::kNitro, Group::kNitramine, Group::kNitrateEster,
  Group::kAromaticRing, Group::kEther, Group::kKetone,
  Group::kAmide, Group::kEster,
};

std::string_view group_name(Group g) noexcept;

struct DescriptorSet {
  double molecular_weight = 0.0;
  int ring_count = 0;
  std::map<std::string, int> group_counts;
};

// Functional group counts:
//   nitro          every NO2 nitrogen, N(=O)=O or [N+](=O)[O-]
//   nitramine      NO2 whose remaining neighbor is a nitrogen
//   nitrate ester  NO2 whose remaining neighbor is an oxygen
//   aromatic ring  cyclomatic number of the aromatic-bond subgraph
//   ether          non-aromatic O with two single bonds to non-carbonyl C
//   ketone         carbonyl C whose other two neighbors are both carbon
//   amide          carbonyl C with a singly bonded N neighbor
//   ester          carbonyl C with a singly bonded O (bonded on to C) and a
//                  C neighbor
// A carbonyl C is a carbon double bonded to a one-connected oxygen.
int count_group(const MolGraph &g, Group group);

// Throws kInvalidGraph for empty graphs.
DescriptorSet descriptors(const MolGraph &g);

double molecular_weight(const MolGraph &g);

}  // namespace hemgen::chem

#endif  // HEMGEN_CHEM_DESCRIPTORS_H_
