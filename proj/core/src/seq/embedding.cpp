//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/seq/embedding.h"

#include <cmath>

#include "hemgen/binio.h"
#include "hemgen/error.h"
#include "hemgen/rng.h"
#include "hemgen/sha256.h"

namespace hemgen::seq {

std::string_view embedding_mode_name(EmbeddingMode mode) noexcept {
  switch (mode) {
  case EmbeddingMode::kTrainableOnly: return "trainable_only";
  case EmbeddingMode::kRandomFixed: return "random_fixed";
  case EmbeddingMode::kShaFixed: return "sha_fixed";
  }
  return "";
}

EmbeddingMode parse_embedding_mode(std::string_view name) {
  for (auto m: { EmbeddingMode::kTrainableOnly, EmbeddingMode::kRandomFixed,
                 EmbeddingMode::kShaFixed })
    if (embedding_mode_name(m) == name)
      return m;
  throw Error(Errc::kBadConfig, "unknown embedding mode '" + std::string(name) + "'");
}

Eigen::RowVectorXd sha_row(std::string_view key, int width, bool unit_norm) {
  const Sha256Digest b = sha256(key);
  Eigen::RowVectorXd v(width);
  for (int j = 0; j < width; ++j)
    v[j] = (static_cast<double>(b[j % 32]) - 128.0) / 128.0;
  if (unit_norm) {
    const double n = v.norm();
    if (n > 0.0)
      v /= n;
  }
  return v;
}

Eigen::MatrixXd sha_fixed_embedding(int V, int d, int d_t, bool unit_norm) {
  if (V < 1 || d_t < 0 || d_t >= d)
    throw Error(Errc::kBadDimensions, "sha_fixed_embedding needs V >= 1 and 0 <= d_t < d");
  const int d_f = d - d_t;
  Eigen::MatrixXd e(V, d_f);
  for (int i = 0; i < V; ++i)
    e.row(i) = sha_row("token(" + std::to_string(i) + ")", d_f, unit_norm);
  return e;
}

Eigen::MatrixXd sha_text_embedding(const Vocabulary &vocab, int d_f,
                                   bool unit_norm) {
  if (d_f < 1)
    throw Error(Errc::kBadDimensions, "d_f must be >= 1");
  Eigen::MatrixXd e(vocab.size(), d_f);
  for (int i = 0; i < vocab.size(); ++i)
    e.row(i) = sha_row(vocab.token(i), d_f, unit_norm);
  return e;
}

Eigen::MatrixXd random_fixed_embedding(int V, int d_f, int fan_in,
                                       std::uint64_t seed) {
  if (V < 1 || d_f < 1 || fan_in < 1)
    throw Error(Errc::kBadDimensions, "random_fixed_embedding needs V, d_f, fan_in >= 1");
  const double bound = std::sqrt(6.0 / fan_in);
  Rng rng(seed);
  Eigen::MatrixXd e(V, d_f);
  // Row-major fill order so a row's values do not depend on V.
  for (int i = 0; i < V; ++i)
    for (int j = 0; j < d_f; ++j)
      e(i, j) = rng.uniform(-bound, bound);
  return e;
}

HybridEmbedding::HybridEmbedding(EmbeddingMode mode, Eigen::MatrixXd trainable,
                                 Eigen::MatrixXd fixed)
    : mode_(mode), e_t_(std::move(trainable)), e_f_(std::move(fixed)) {
  if (e_t_.rows() != e_f_.rows())
    throw Error(Errc::kShapeMismatch, "embedding blocks have different row counts");
}

Eigen::RowVectorXd HybridEmbedding::row(int id) const {
  if (id < 0 || id >= vocab_size())
    throw Error(Errc::kIndexOutOfVocabulary, "token id out of range",
                static_cast<std::size_t>(id < 0 ? 0 : id));
  Eigen::RowVectorXd r(dim());
  r << e_t_.row(id), e_f_.row(id);
  return r;
}

Eigen::MatrixXd HybridEmbedding::lookup(std::span<const int> ids) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), dim());
  for (std::size_t j = 0; j < ids.size(); ++j)
    out.row(static_cast<Eigen::Index>(j)) = row(ids[j]);
  return out;
}

void HybridEmbedding::apply_gradient(const Eigen::MatrixXd &grads,
                                     const UpdateRule &rule) {
  if (grads.rows() != vocab_size() || grads.cols() != dim())
    throw Error(Errc::kShapeMismatch, "embedding gradient must be V x d");
  const Eigen::MatrixXd g_t = grads.leftCols(d_t());
  rule(e_t_, g_t);
  if (e_t_.rows() != g_t.rows() || e_t_.cols() != g_t.cols())
    throw Error(Errc::kShapeMismatch, "update rule changed the trainable shape");
}

std::string HybridEmbedding::fixed_checksum() const { return matrix_checksum(e_f_); }

void apply_embedding_gradient(HybridEmbedding &emb, const Eigen::MatrixXd &grads,
                              const HybridEmbedding::UpdateRule &rule) {
  emb.apply_gradient(grads, rule);
}

std::string matrix_checksum(const Eigen::MatrixXd &m) {
  ByteWriter w;
  w.matrix("", m);
  Sha256 h;
  h.update(w.data());
  const auto d = h.finish();
  return to_hex(d);
}

}  // namespace hemgen::seq
