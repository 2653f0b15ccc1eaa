//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/chem/element.h"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace hemgen::chem {
namespace {
// clang-format off
constexpr std::array kElements = {
  Element { 0, "*", 0.0, 0, false },
  Element { 1, "H", 1.008, 1, false },
  Element { 2, "He", 4.0026, 0, false },
  Element { 3, "Li", 6.94, 0, false },
  Element { 4, "Be", 9.0122, 0, false },
  Element { 5, "B", 10.81, 3, false },
  Element { 6, "C", 12.011, 4, false },
  Element { 7, "N", 14.007, 5, false },
  Element { 8, "O", 15.999, 6, false },
  Element { 9, "F", 18.998, 7, false },
  Element { 10, "Ne", 20.180, 0, false },
  Element { 11, "Na", 22.990, 0, false },
  Element { 12, "Mg", 24.305, 0, false },
  Element { 13, "Al", 26.982, 0, false },
  Element { 14, "Si", 28.085, 4, true },
  Element { 15, "P", 30.974, 5, true },
  Element { 16, "S", 32.06, 6, true },
  Element { 17, "Cl", 35.45, 7, false },
  Element { 18, "Ar", 39.948, 0, false },
  Element { 19, "K", 39.098, 0, false },
  Element { 20, "Ca", 40.078, 0, false },
  Element { 26, "Fe", 55.845, 0, false },
  Element { 27, "Co", 58.933, 0, false },
  Element { 28, "Ni", 58.693, 0, false },
  Element { 29, "Cu", 63.546, 0, false },
  Element { 30, "Zn", 65.38, 0, false },
  Element { 33, "As", 74.922, 5, true },
  Element { 34, "Se", 78.971, 6, true },
  Element { 35, "Br", 79.904, 7, false },
  Element { 47, "Ag", 107.87, 0, false },
  Element { 50, "Sn", 118.71, 0, false },
  Element { 52, "Te", 127.60, 6, true },
  Element { 53, "I", 126.90, 7, false },
  Element { 55, "Cs", 132.91, 0, false },
  Element { 56, "Ba", 137.33, 0, false },
  Element { 82, "Pb", 207.2, 0, false },
};
// clang-format on
}  // namespace

std::span<const Element> element_table() noexcept {
  return kElements;
}

const Element *find_element(std::string_view symbol) noexcept {
  for (const auto &e: kElements)
    if (e.symbol == symbol)
      return &e;
  return nullptr;
}

const Element &element(std::uint8_t atomic_number) {
  for (const auto &e: kElements)
    if (e.atomic_number == atomic_number)
      return e;
  throw std::out_of_range("element not in table");
}

bool is_organic_subset(std::uint8_t z) noexcept {
  switch (z) {
  case 5: case 6: case 7: case 8: case 9: case 15: case 16: case 17:
  case 35: case 53:
    return true;
  default:
    return false;
  }
}

bool is_aromatic_capable(std::uint8_t z) noexcept {
  switch (z) {
  case 5: case 6: case 7: case 8: case 15: case 16: case 33: case 34:
    return true;
  default:
    return false;
  }
}

ValenceList allowed_valences(std::uint8_t z, int charge) noexcept {
  ValenceList out;
  const Element *e = nullptr;
  for (const auto &el: kElements)
    if (el.atomic_number == z)
      e = &el;
  if (e == nullptr || e->valence_electrons == 0)
    return out;

  if (z == 1) {
    // H 1; H+ and H- take no bonds.
    out.values[out.count++] = charge == 0 ? 1 : 0;
    return out;
  }

  const int electrons = e->valence_electrons - charge;
  if (electrons <= 0 || electrons > 8)
    return out;

  const int base = electrons <= 4 ? electrons : 8 - electrons;
  out.values[out.count++] = static_cast<std::uint8_t>(base);

  // Halogens are restricted to valence 1 (neutral).
  const bool halogen = e->valence_electrons == 7;
  if (e->hypervalent && !halogen) {
    for (int v = base + 2; v <= electrons && out.count < 4; v += 2)
      out.values[out.count++] = static_cast<std::uint8_t>(v);
  }
  return out;
}

}  // namespace hemgen::chem
