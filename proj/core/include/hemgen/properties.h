//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_PROPERTIES_H_
#define HEMGEN_PROPERTIES_H_

#include <array>
#include <string_view>

namespace hemgen {

inline constexpr int kTargetCount = 9;

// Column order of the dataset and of every 9-vector.
inline constexpr std::array<std::string_view, kTargetCount> kTargetNames = {
  "OB(CO2)", "r0", "HGAS", "HSUB", "Q", "D", "P", "EG", "h50(obs)",
};

inline constexpr int kTargetD = 5;
inline constexpr int kTargetP = 6;
inline constexpr int kTargetH50 = 8;

// OB(CO2) %, r0 g/cm3, HGAS, HSUB, Q, D km/s, P GPa, EG, h50(obs) cm.
using PropertyVector = std::array<double, kTargetCount>;

// Accepts the column names above and "h50" for h50(obs).
// Throws Error(kUnknownTarget).
int target_index(std::string_view name);

}  // namespace hemgen

#endif  // HEMGEN_PROPERTIES_H_
