//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_CHEM_WRITER_H_
#define HEMGEN_CHEM_WRITER_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hemgen/chem/molgraph.h"

namespace hemgen::chem {

// Traversal plan for write_smiles: one root per component in output order
// and, per atom, the order in which neighbors are explored.
struct WritePlan {
  std::vector<int> roots;
  std::vector<std::vector<Neighbor>> neighbor_order;
  bool isotopes = false;
};

// Depth-first SMILES writer. Stereo marks are not written.
std::string write_smiles(const MolGraph &g, const WritePlan &plan);

// Canonical ranks after Morgan-style partition refinement seeded with
// (element, aromatic, charge, degree, hydrogens). Ties are kept.
std::vector<int> invariant_ranks(const MolGraph &g);

// Deterministic canonical string: refinement plus individualization of
// tied classes, keeping the lexicographically smallest emitted string. The
// search visits at most kCanonicalLeafBudget complete orderings; past the
// budget only the first branch of each remaining tie is followed.
// Throws kInvalidGraph if the graph is empty or fails the valence check.
std::string canonicalize(const MolGraph &g);

inline constexpr int kCanonicalLeafBudget = 20000;

// parse + validity check + canonicalize.
std::string canonical_smiles(std::string_view smiles);

// A random writing: uniformly chosen root per component, uniformly shuffled
// neighbor order at every atom, shuffled component order.
std::string enumerate_random(const MolGraph &g, std::uint64_t seed);

// Each molecule contributes itself followed by factor - 1 random writings.
// factor == 1 returns the input unchanged. Throws kInvalidMolecule(index).
std::vector<std::string> augment_dataset(std::span<const std::string> smiles,
                                         int factor, std::uint64_t seed);

}  // namespace hemgen::chem

#endif  // HEMGEN_CHEM_WRITER_H_
