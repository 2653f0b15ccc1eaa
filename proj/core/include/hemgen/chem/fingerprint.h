//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_CHEM_FINGERPRINT_H_
#define HEMGEN_CHEM_FINGERPRINT_H_

#include <cstdint>
#include <vector>

#include "hemgen/chem/molgraph.h"

namespace hemgen::chem {

class Fingerprint {
public:
  Fingerprint() = default;
  Fingerprint(int nbits, int radius);

  int nbits() const noexcept { return nbits_; }
  int radius() const noexcept { return radius_; }

  void set(std::uint32_t bit) noexcept { words_[bit >> 6] |= 1ULL << (bit & 63); }
  bool test(std::uint32_t bit) const noexcept {
    return (words_[bit >> 6] >> (bit & 63)) & 1U;
  }
  int popcount() const noexcept;

  const std::vector<std::uint64_t> &words() const noexcept { return words_; }

  bool operator==(const Fingerprint &) const = default;

private:
  int nbits_ = 0;
  int radius_ = 0;
  std::vector<std::uint64_t> words_;
};

inline constexpr int kDefaultFingerprintBits = 2048;
inline constexpr int kDefaultFingerprintRadius = 2;

// Per-atom circular identifiers for iterations 0..radius (ECFP-style).
// Iteration 0 hashes (element, heavy degree, charge, hydrogens, ring flag,
// aromatic flag); iteration r hashes (r, previous id, sorted (bond order,
// neighbor id) pairs). Hashing is FNV-1a over little-endian 64-bit words.
std::vector<std::vector<std::uint64_t>>
circular_identifiers(const MolGraph &g, int radius);

// Identifiers are passed through the splitmix64 finalizer and folded as
// h & (nbits - 1). Throws kInvalidGraph for empty
// graphs and kBadDimensions unless radius >= 0 and nbits is a power of two
// that is a multiple of 64.
Fingerprint morgan_fingerprint(const MolGraph &g,
                               int radius = kDefaultFingerprintRadius,
                               int nbits = kDefaultFingerprintBits);

// |a & b| / |a | b|, 0 when both are empty. Throws kWidthMismatch.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

}  // namespace hemgen::chem

#endif  // HEMGEN_CHEM_FINGERPRINT_H_
