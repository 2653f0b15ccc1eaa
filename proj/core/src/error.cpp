//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/error.h"

#include <string>

namespace hemgen {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
  case Errc::kNonAsciiInput: return "NonAsciiInput";
  case Errc::kEmptyInput: return "EmptyInput";
  case Errc::kUnbalancedParenthesis: return "UnbalancedParenthesis";
  case Errc::kUnclosedRingBond: return "UnclosedRingBond";
  case Errc::kUnknownAtomSymbol: return "UnknownAtomSymbol";
  case Errc::kMalformedBracketAtom: return "MalformedBracketAtom";
  case Errc::kDanglingBondSymbol: return "DanglingBondSymbol";
  case Errc::kConflictingRingBond: return "ConflictingRingBond";
  case Errc::kDuplicateBond: return "DuplicateBond";
  case Errc::kUnexpectedCharacter: return "UnexpectedCharacter";
  case Errc::kInvalidGraph: return "InvalidGraph";
  case Errc::kInvalidMolecule: return "InvalidMolecule";
  case Errc::kWidthMismatch: return "WidthMismatch";
  case Errc::kEmptyCorpus: return "EmptyCorpus";
  case Errc::kBadDimensions: return "BadDimensions";
  case Errc::kIndexOutOfVocabulary: return "IndexOutOfVocabulary";
  case Errc::kUnknownToken: return "UnknownToken";
  case Errc::kShapeMismatch: return "ShapeMismatch";
  case Errc::kNonFiniteActivation: return "NonFiniteActivation";
  case Errc::kAllPositionsMasked: return "AllPositionsMasked";
  case Errc::kStaleCache: return "StaleCache";
  case Errc::kInvalidSmiles: return "InvalidSmiles";
  case Errc::kBadTemperature: return "BadTemperature";
  case Errc::kBadConfig: return "BadConfig";
  case Errc::kCheckpointFormat: return "CheckpointFormat";
  case Errc::kCheckpointVersion: return "CheckpointVersion";
  case Errc::kNoValidMolecules: return "NoValidMolecules";
  case Errc::kEmptyPairSet: return "EmptyPairSet";
  case Errc::kUnknownTarget: return "UnknownTarget";
  case Errc::kLengthMismatch: return "LengthMismatch";
  case Errc::kZeroVariance: return "ZeroVariance";
  case Errc::kUnsupportedElement: return "UnsupportedElement";
  case Errc::kEmptyGraph: return "EmptyGraph";
  case Errc::kDegenerateTarget: return "DegenerateTarget";
  case Errc::kZeroRow: return "ZeroRow";
  case Errc::kTooFewRows: return "TooFewRows";
  case Errc::kBadEpsilon: return "BadEpsilon";
  case Errc::kBatchTooLarge: return "BatchTooLarge";
  case Errc::kDegenerateBatch: return "DegenerateBatch";
  case Errc::kBadInputs: return "BadInputs";
  case Errc::kDimensionMismatch: return "DimensionMismatch";
  case Errc::kFileNotFound: return "FileNotFound";
  case Errc::kMissingColumn: return "MissingColumn";
  case Errc::kUnparseableRow: return "UnparseableRow";
  case Errc::kIo: return "Io";
  }
  return "Unknown";
}

namespace {
std::string format_what(Errc code, const std::string &what,
                        std::optional<std::size_t> index) {
  std::string msg(errc_name(code));
  if (index) {
    msg += '(';
    msg += std::to_string(*index);
    msg += ')';
  }
  if (!what.empty()) {
    msg += ": ";
    msg += what;
  }
  return msg;
}
}  // namespace

Error::Error(Errc code, const std::string &what,
             std::optional<std::size_t> index)
    : std::runtime_error(format_what(code, what, index)), code_(code),
      index_(index) { }

StageError::StageError(std::string stage, const Error &cause)
    : Error(cause.code(), "[" + stage + "] " + cause.what(), cause.index()),
      stage_(std::move(stage)) { }

}  // namespace hemgen
