//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/properties.h"

#include <string>

#include "hemgen/error.h"

namespace hemgen {

int target_index(std::string_view name) {
  for (int i = 0; i < kTargetCount; ++i)
    if (kTargetNames[i] == name)
      return i;
  if (name == "h50")
    return kTargetH50;
  throw Error(Errc::kUnknownTarget, "unknown target '" + std::string(name) + "'");
}

}  // namespace hemgen
