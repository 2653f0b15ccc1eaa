//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/chem/fingerprint.h"

#include <algorithm>
#include <bit>
#include <utility>

#include "hemgen/error.h"
#include "hemgen/rng.h"

namespace hemgen::chem {

Fingerprint::Fingerprint(int nbits, int radius)
    : nbits_(nbits), radius_(radius), words_((nbits + 63) / 64, 0) { }

int Fingerprint::popcount() const noexcept {
  int n = 0;
  for (const auto w: words_)
    n += std::popcount(w);
  return n;
}

std::vector<std::vector<std::uint64_t>>
circular_identifiers(const MolGraph &g, int radius) {
  const int n = g.atom_count();
  std::vector<std::vector<std::uint64_t>> ids(radius + 1,
                                              std::vector<std::uint64_t>(n));
  for (int v = 0; v < n; ++v) {
    const Atom &a = g.atom(v);
    std::uint64_t h = kFnvOffset;
    h = fnv1a64_u64(a.atomic_number, h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(g.degree(v)), h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(a.charge)), h);
    h = fnv1a64_u64(static_cast<std::uint64_t>(a.hydrogens), h);
    h = fnv1a64_u64(g.atom_in_ring(v) ? 1 : 0, h);
    h = fnv1a64_u64(a.aromatic ? 1 : 0, h);
    ids[0][v] = h;
  }

  std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
  for (int r = 1; r <= radius; ++r) {
    for (int v = 0; v < n; ++v) {
      env.clear();
      for (const Neighbor &nb: g.neighbors(v))
        env.emplace_back(static_cast<std::uint64_t>(g.bond(nb.bond).order),
                         ids[r - 1][nb.atom]);
      std::sort(env.begin(), env.end());
      std::uint64_t h = kFnvOffset;
      h = fnv1a64_u64(static_cast<std::uint64_t>(r), h);
      h = fnv1a64_u64(ids[r - 1][v], h);
      for (const auto &[order, id]: env) {
        h = fnv1a64_u64(order, h);
        h = fnv1a64_u64(id, h);
      }
      ids[r][v] = h;
    }
  }
  return ids;
}

Fingerprint morgan_fingerprint(const MolGraph &g, int radius, int nbits) {
  if (g.empty())
    throw Error(Errc::kInvalidGraph, "empty graph");
  if (radius < 0 || nbits < 64 || !std::has_single_bit(static_cast<unsigned>(nbits)))
    throw Error(Errc::kBadDimensions,
                "radius must be >= 0 and nbits a power of two >= 64");
  Fingerprint fp(nbits, radius);
  const auto mask = static_cast<std::uint64_t>(nbits - 1);
  for (const auto &level: circular_identifiers(g, radius))
    for (const std::uint64_t id: level)
      fp.set(static_cast<std::uint32_t>(mix64(id) & mask));
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.nbits() != b.nbits())
    throw Error(Errc::kWidthMismatch, "fingerprint widths differ");
  int both = 0, either = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    both += std::popcount(a.words()[i] & b.words()[i]);
    either += std::popcount(a.words()[i] | b.words()[i]);
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / either;
}

}  // namespace hemgen::chem
