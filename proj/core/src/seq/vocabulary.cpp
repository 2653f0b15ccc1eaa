//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/seq/vocabulary.h"

#include <algorithm>

#include "hemgen/chem/smiles.h"
#include "hemgen/error.h"

namespace hemgen::seq {

namespace {

constexpr const char *kReservedNames[] = { "<pad>", "<bos>", "<eos>" };

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string> {}) { }

Vocabulary::Vocabulary(std::vector<std::string> corpus_tokens) {
  std::sort(corpus_tokens.begin(), corpus_tokens.end());
  corpus_tokens.erase(std::unique(corpus_tokens.begin(), corpus_tokens.end()),
                      corpus_tokens.end());
  for (const char *r: kReservedNames)
    tokens_.emplace_back(r);
  for (auto &t: corpus_tokens) {
    if (t.empty() || std::find(std::begin(kReservedNames),
                               std::end(kReservedNames), t) !=
                         std::end(kReservedNames))
      throw Error(Errc::kBadConfig, "invalid vocabulary token '" + t + "'");
    tokens_.push_back(std::move(t));
  }
  for (int i = 0; i < size(); ++i)
    index_.emplace(tokens_[i], i);
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> corpus) {
  if (corpus.empty())
    throw Error(Errc::kEmptyCorpus, "cannot build a vocabulary from no sequences");
  std::vector<std::string> all;
  for (const auto &seq: corpus)
    all.insert(all.end(), seq.begin(), seq.end());
  return Vocabulary(std::move(all));
}

Vocabulary Vocabulary::from_smiles(std::span<const std::string> corpus) {
  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(corpus.size());
  for (const auto &s: corpus)
    seqs.push_back(chem::tokenize(s));
  return build(seqs);
}

const std::string &Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw Error(Errc::kIndexOutOfVocabulary, "token id out of range",
                static_cast<std::size_t>(id < 0 ? 0 : id));
  return tokens_[id];
}

int Vocabulary::id(std::string_view token) const {
  const auto it = index_.find(token);
  if (it == index_.end())
    throw Error(Errc::kUnknownToken, "token '" + std::string(token) +
                                         "' is not in the vocabulary");
  return it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.find(token) != index_.end();
}

TokenSeq Vocabulary::encode(std::string_view smiles) const {
  TokenSeq seq;
  seq.source = std::string(smiles);
  for (const auto &t: chem::tokenize(smiles))
    seq.ids.push_back(id(t));
  return seq;
}

std::string Vocabulary::decode(std::span<const int> ids) const {
  std::string out;
  for (const int i: ids) {
    const std::string &t = token(i);
    if (i >= kReserved)
      out += t;
  }
  return out;
}

}  // namespace hemgen::seq
