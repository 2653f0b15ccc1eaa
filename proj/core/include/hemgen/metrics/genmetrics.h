//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_METRICS_GENMETRICS_H_
#define HEMGEN_METRICS_GENMETRICS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hemgen/chem/fingerprint.h"
#include "hemgen/properties.h"

namespace hemgen::metrics {

// Exact counts behind the library ratios. Set membership is by canonical
// form.
struct LibraryCounts {
  std::size_t generated = 0;
  std::size_t valid = 0;
  std::size_t novel = 0;         // valid and absent from training
  std::size_t unique_valid = 0;  // distinct canonical forms among valid
};

LibraryCounts count_library(std::span<const std::string> generated,
                            std::span<const std::string> training);

// valid / generated. Throws kEmptyInput.
double validity(std::span<const std::string> generated);

// novel / generated: the denominator counts invalid strings too.
// Throws kEmptyInput when either list is empty.
double novelty(std::span<const std::string> generated,
               std::span<const std::string> training);

// novel / valid. Throws kEmptyInput, kNoValidMolecules.
double novelty_among_valid(std::span<const std::string> generated,
                           std::span<const std::string> training);

// unique_valid / valid. Throws kNoValidMolecules.
double uniqueness(std::span<const std::string> generated);

struct FingerprintOptions {
  int radius = chem::kDefaultFingerprintRadius;
  int nbits = chem::kDefaultFingerprintBits;
};

// Mean over unordered pairs i < j. Throws kEmptyInput, kEmptyPairSet for a
// single molecule, kInvalidMolecule(index).
double mean_tanimoto(std::span<const std::string> set, const FingerprintOptions &fp = {});

// Mean over the full cross product.
double mean_tanimoto(std::span<const std::string> a, std::span<const std::string> b,
                     const FingerprintOptions &fp = {});

struct Histogram {
  // counts[k] covers [edges[k], edges[k + 1]).
  std::vector<double> edges;
  std::vector<std::size_t> counts;

  std::size_t total() const noexcept;
};

struct StructuralProfile {
  Histogram molecular_weight;
  std::map<int, std::size_t> ring_counts;
  std::map<std::string, std::size_t> group_counts;
};

// Bins start at 0 with the given width. Throws kEmptyInput,
// kInvalidMolecule(index).
StructuralProfile structural_profile(std::span<const std::string> molecules,
                                     double bin_width = 50.0);

enum class Direction {
  kGreater,
  kGreaterEqual,
  kLess,
  kLessEqual,
};

// Throws kBadConfig on anything but ">", ">=", "<", "<=".
Direction parse_direction(std::string_view s);
std::string_view direction_symbol(Direction d) noexcept;

struct Candidate {
  std::string smiles;
  PropertyVector properties {};
};

// Keeps molecules whose named target passes threshold; every candidate
// carries its full 9-vector. Throws kUnknownTarget, kLengthMismatch.
std::vector<Candidate> filter_by_property(std::span<const std::string> molecules,
                                          std::span<const PropertyVector> predictions,
                                          std::string_view target, double threshold,
                                          Direction direction);

struct PropertySummary {
  std::string target;
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

struct EvalReport {
  LibraryCounts counts;
  double validity = 0.0;
  double novelty = 0.0;
  double novelty_among_valid = 0.0;
  double uniqueness = 0.0;
  // Absent when fewer than two valid molecules.
  std::optional<double> intra_tanimoto;
  std::optional<double> tanimoto_vs_training;
  StructuralProfile profile;
  std::vector<PropertySummary> properties;

  std::string to_json() const;
  // "section,key,value" rows.
  std::string to_csv() const;
};

struct EvalOptions {
  FingerprintOptions fingerprint;
  double mw_bin_width = 50.0;
};

// predictions, when given, align with the valid generated molecules in
// input order. All sums run over sorted terms, so the report does not depend
// on input order.
EvalReport evaluate(std::span<const std::string> generated,
                    std::span<const std::string> training,
                    std::span<const PropertyVector> predictions = {},
                    const EvalOptions &options = {});

std::vector<PropertySummary> summarize(std::span<const PropertyVector> values);

}  // namespace hemgen::metrics

#endif  // HEMGEN_METRICS_GENMETRICS_H_
