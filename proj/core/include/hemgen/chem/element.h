//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_CHEM_ELEMENT_H_
#define HEMGEN_CHEM_ELEMENT_H_

#include <cstdint>
#include <span>
#include <string_view>

namespace hemgen::chem {

struct Element {
  std::uint8_t atomic_number;
  std::string_view symbol;
  // Standard atomic weight, g/mol (IUPAC conventional values).
  double mass;
  // Valence shell electron count for main-group elements that have a
  // valence rule; 0 means "no valence rule" (metals, noble gases).
  std::uint8_t valence_electrons;
  // Elements of period >= 3 that take expanded octets (P, S, ...).
  bool hypervalent;
};

constexpr double kHydrogenMass = 1.008;

// nullptr if the symbol is not in the bundled table.
const Element *find_element(std::string_view symbol) noexcept;
const Element &element(std::uint8_t atomic_number);

std::span<const Element> element_table() noexcept;

// The organic subset that may be written without brackets.
bool is_organic_subset(std::uint8_t atomic_number) noexcept;
// Elements that may be written as lowercase aromatic symbols.
bool is_aromatic_capable(std::uint8_t atomic_number) noexcept;

// Allowed total valences (bond-order sum including hydrogens) for an
// element with the given formal charge, ascending. Empty when the element
// has no valence rule.
//
//   B 3, C 4, N 3, O 2, F/Cl/Br/I 1, P {3,5}, S {2,4,6}, Si 4, Se {2,4,6}.
//   Charged atoms follow the isoelectronic element: N+ 4, O+ 3, O- 1,
//   N- 2, C+/C- 3, B- 4, S+ {3,5}, P+ 4, ...
struct ValenceList {
  std::uint8_t count = 0;
  std::uint8_t values[4] {};

  bool empty() const noexcept { return count == 0; }
  bool contains(int v) const noexcept {
    for (int i = 0; i < count; ++i)
      if (values[i] == v)
        return true;
    return false;
  }
  std::span<const std::uint8_t> view() const noexcept {
    return { values, count };
  }
};

ValenceList allowed_valences(std::uint8_t atomic_number, int charge) noexcept;

}  // namespace hemgen::chem

#endif  // HEMGEN_CHEM_ELEMENT_H_
