//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_CHEM_SMILES_H_
#define HEMGEN_CHEM_SMILES_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hemgen/chem/molgraph.h"

namespace hemgen::chem {

// Character-level tokens. "Cl", "Br" and "%nn" ring closures are single
// tokens; everything else, including the inside of bracket atoms, is one
// character per token. Throws kEmptyInput / kNonAsciiInput.
std::vector<std::string> tokenize(std::string_view smiles);

std::string detokenize(std::span<const std::string> tokens);

struct ParseInfo {
  // Number of ring-closure digit pairs consumed.
  int ring_closures = 0;
};

// Parses the supported SMILES subset into a graph and assigns implicit
// hydrogens to unbracketed atoms. Throws hemgen::Error with the character
// offset of the problem.
MolGraph parse(std::string_view smiles, ParseInfo *info = nullptr);

// Implicit hydrogen count an unbracketed atom would receive in `g` given its
// current bonds.
int implicit_hydrogens(const MolGraph &g, int atom);

// Atoms that violate the valence table (see allowed_valences) or carry an
// aromatic flag outside a ring. Aromatic atoms count each aromatic bond as
// one plus either zero or one extra unit for the ring pi contribution; the
// zero-extra form (lone-pair donors, exocyclic double bonds) is only
// accepted for heteroatoms, charged atoms, or atoms with an exocyclic
// double bond.
std::vector<int> valence_violations(const MolGraph &g);

bool has_valid_valences(const MolGraph &g);

// parse() succeeds and there are no valence violations. Never throws.
bool is_valid(std::string_view smiles) noexcept;

}  // namespace hemgen::chem

#endif  // HEMGEN_CHEM_SMILES_H_
