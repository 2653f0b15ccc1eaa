//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cctype>

#include "hemgen/chem/smiles.h"
#include "hemgen/error.h"

namespace hemgen::chem {

std::vector<std::string> tokenize(std::string_view smiles) {
  if (smiles.empty())
    throw Error(Errc::kEmptyInput, "empty SMILES");
  for (std::size_t i = 0; i < smiles.size(); ++i)
    if (static_cast<unsigned char>(smiles[i]) > 0x7f)
      throw Error(Errc::kNonAsciiInput, "non-ASCII byte", i);

  std::vector<std::string> tokens;
  tokens.reserve(smiles.size());
  for (std::size_t i = 0; i < smiles.size();) {
    const char c = smiles[i];
    const char next = i + 1 < smiles.size() ? smiles[i + 1] : '\0';
    if ((c == 'C' && next == 'l') || (c == 'B' && next == 'r')) {
      tokens.emplace_back(smiles.substr(i, 2));
      i += 2;
    } else if (c == '%' && i + 2 < smiles.size()
               && std::isdigit(static_cast<unsigned char>(smiles[i + 1]))
               && std::isdigit(static_cast<unsigned char>(smiles[i + 2]))) {
      tokens.emplace_back(smiles.substr(i, 3));
      i += 3;
    } else {
      tokens.emplace_back(1, c);
      ++i;
    }
  }
  return tokens;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (const auto &t: tokens)
    out += t;
  return out;
}

}  // namespace hemgen::chem
