//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_CHEM_MOLGRAPH_H_
#define HEMGEN_CHEM_MOLGRAPH_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hemgen::chem {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Bond order in units of shared electron pairs (aromatic counted as 1.5).
double bond_order_value(BondOrder order) noexcept;

struct Atom {
  std::uint8_t atomic_number = 0;
  bool aromatic = false;
  int charge = 0;
  // Total hydrogens carried by the atom: the explicit count of a bracket
  // atom, or the implicit count assigned from the valence table.
  int hydrogens = 0;
  std::optional<int> isotope;
  bool bracket = false;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::kSingle;
  // '/' or '\\' as written; ignored for graph identity.
  char stereo = '\0';

  int other(int atom) const noexcept { return atom == a ? b : a; }
};

struct Neighbor {
  int atom;
  int bond;
};

// Parsed molecular graph. Atoms and bonds are immutable once built; the
// adjacency, component and ring data are derived on construction.
class MolGraph {
public:
  MolGraph() = default;
  // Throws Error(kInvalidGraph) on self bonds, duplicate bonds or
  // out-of-range endpoints.
  MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds);

  int atom_count() const noexcept { return static_cast<int>(atoms_.size()); }
  int bond_count() const noexcept { return static_cast<int>(bonds_.size()); }
  bool empty() const noexcept { return atoms_.empty(); }

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::span<const Bond> bonds() const noexcept { return bonds_; }
  const Atom &atom(int i) const { return atoms_[i]; }
  const Bond &bond(int i) const { return bonds_[i]; }

  std::span<const Neighbor> neighbors(int atom) const noexcept {
    return { adj_.data() + adj_offset_[atom],
             adj_.data() + adj_offset_[atom + 1] };
  }
  int degree(int atom) const noexcept {
    return adj_offset_[atom + 1] - adj_offset_[atom];
  }

  int component_count() const noexcept { return components_; }
  // Component index per atom, numbered in order of first appearance.
  std::span<const int> component_of() const noexcept { return component_; }

  // bonds - atoms + components
  int ring_count() const noexcept {
    return bond_count() - atom_count() + components_;
  }

  bool bond_in_ring(int bond) const noexcept { return ring_bond_[bond]; }
  bool atom_in_ring(int atom) const noexcept { return ring_atom_[atom]; }

  // -1 if the atoms are not bonded.
  int find_bond(int a, int b) const noexcept;

  // Sum of bond orders with aromatic bonds counted 1.5, plus hydrogens.
  double valence_sum(int atom) const noexcept;

private:
  void build_adjacency();
  void find_components();
  void find_ring_bonds();

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<Neighbor> adj_;
  std::vector<int> adj_offset_ { 0 };
  std::vector<int> component_;
  std::vector<char> ring_bond_;
  std::vector<char> ring_atom_;
  int components_ = 0;
};

}  // namespace hemgen::chem

#endif  // HEMGEN_CHEM_MOLGRAPH_H_
