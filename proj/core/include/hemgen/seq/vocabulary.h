//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_SEQ_VOCABULARY_H_
#define HEMGEN_SEQ_VOCABULARY_H_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hemgen::seq {

struct TokenSeq {
  std::vector<int> ids;
  std::string source;
};

// Dense token table: PAD=0, BOS=1, EOS=2, then corpus tokens in byte order.
class Vocabulary {
public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kReserved = 3;

  Vocabulary();
  // Tokens may repeat and come in any order; reserved names are rejected.
  explicit Vocabulary(std::vector<std::string> corpus_tokens);

  // Throws Error(kEmptyCorpus) on an empty corpus.
  static Vocabulary build(std::span<const std::vector<std::string>> corpus);
  static Vocabulary from_smiles(std::span<const std::string> corpus);

  int size() const noexcept { return static_cast<int>(tokens_.size()); }
  const std::string &token(int id) const;
  // Throws Error(kUnknownToken).
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::vector<std::string> &tokens() const noexcept { return tokens_; }

  TokenSeq encode(std::string_view smiles) const;
  // Concatenates non-reserved tokens; throws kIndexOutOfVocabulary.
  std::string decode(std::span<const int> ids) const;

  bool operator==(const Vocabulary &other) const {
    return tokens_ == other.tokens_;
  }

private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> index_;
};

}  // namespace hemgen::seq

#endif  // HEMGEN_SEQ_VOCABULARY_H_
