//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_DATASET_H_
#define HEMGEN_DATASET_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hemgen/properties.h"

namespace hemgen {

// Missing property values are NaN.
struct MoleculeRecord {
  std::string smiles;
  std::string category;
  PropertyVector properties {};
  // 1-based line in the source file; 0 for records built in memory.
  std::size_t line = 0;
};

inline constexpr std::string_view kSmilesColumn = "SMILES";
inline constexpr std::string_view kCategoryColumn = "Category";

struct IngestOptions {
  // Rows whose SMILES fail the validity check are kept unless this is set.
  bool drop_invalid = false;
};

struct IngestResult {
  std::vector<MoleculeRecord> records;
  // Lines whose SMILES failed the validity check, dropped or not.
  std::vector<std::size_t> invalid_lines;
};

// Comma separated, first line a header holding SMILES, Category and the nine
// target columns in any order; extra columns are ignored. Empty fields and
// "nan"/"NA" mark missing values. Fields may be double quoted.
// Throws kMissingColumn, kUnparseableRow(line).
IngestResult parse_dataset(std::string_view text, const IngestOptions &options = {});

// Throws kFileNotFound and everything parse_dataset throws.
IngestResult read_dataset(const std::string &path, const IngestOptions &options = {});

std::vector<std::string> smiles_of(std::span<const MoleculeRecord> records);

}  // namespace hemgen

#endif  // HEMGEN_DATASET_H_
