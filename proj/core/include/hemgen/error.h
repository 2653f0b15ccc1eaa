//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_ERROR_H_
#define HEMGEN_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hemgen {

enum class Errc {
  // tokenizer / parser
  kNonAsciiInput,
  kEmptyInput,
  kUnbalancedParenthesis,
  kUnclosedRingBond,
  kUnknownAtomSymbol,
  kMalformedBracketAtom,
  kDanglingBondSymbol,
  kConflictingRingBond,
  kDuplicateBond,
  kUnexpectedCharacter,
  kInvalidGraph,
  kInvalidMolecule,
  kWidthMismatch,
  // embeddings
  kEmptyCorpus,
  kBadDimensions,
  kIndexOutOfVocabulary,
  kUnknownToken,
  kShapeMismatch,
  // sequence model
  kNonFiniteActivation,
  kAllPositionsMasked,
  kStaleCache,
  kInvalidSmiles,
  kBadTemperature,
  kBadConfig,
  kCheckpointFormat,
  kCheckpointVersion,
  // metrics
  kNoValidMolecules,
  kEmptyPairSet,
  kUnknownTarget,
  kLengthMismatch,
  kZeroVariance,
  // predictor
  kUnsupportedElement,
  kEmptyGraph,
  kDegenerateTarget,
  // theory
  kZeroRow,
  kTooFewRows,
  kBadEpsilon,
  kBatchTooLarge,
  kDegenerateBatch,
  kBadInputs,
  kDimensionMismatch,
  // io / pipeline
  kFileNotFound,
  kMissingColumn,
  kUnparseableRow,
  kIo,
};

std::string_view errc_name(Errc code) noexcept;

class Error: public std::runtime_error {
public:
  Error(Errc code, const std::string &what,
        std::optional<std::size_t> index = std::nullopt);

  Errc code() const noexcept { return code_; }

  // Position in the input (character offset, row, line, ...) when the error
  // refers to one.
  std::optional<std::size_t> index() const noexcept { return index_; }

private:
  Errc code_;
  std::optional<std::size_t> index_;
};

// Error raised by a pipeline stage; keeps the original code.
class StageError: public Error {
public:
  StageError(std::string stage, const Error &cause);

  const std::string &stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

}  // namespace hemgen

#endif  // HEMGEN_ERROR_H_
