//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_SEQ_EMBEDDING_H_
#define HEMGEN_SEQ_EMBEDDING_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "hemgen/seq/vocabulary.h"

namespace hemgen::seq {

enum class EmbeddingMode {
  kTrainableOnly,
  kRandomFixed,
  kShaFixed,
};

std::string_view embedding_mode_name(EmbeddingMode mode) noexcept;
// Throws Error(kBadConfig).
EmbeddingMode parse_embedding_mode(std::string_view name);

// SHA-256 of key, bytes b mapped to (b - 128) / 128, tiled cyclically to
// width entries. Optionally scaled to unit L2 norm.
Eigen::RowVectorXd sha_row(std::string_view key, int width, bool unit_norm = false);

// Row i hashes the string "token(i)". Width is d - d_t.
// Throws Error(kBadDimensions) unless 0 <= d_t < d and V >= 1.
Eigen::MatrixXd sha_fixed_embedding(int V, int d, int d_t, bool unit_norm = false);

// Row i hashes the text of vocabulary token i instead of its index.
Eigen::MatrixXd sha_text_embedding(const Vocabulary &vocab, int d_f,
                                   bool unit_norm = false);

// i.i.d. uniform on [-sqrt(6 / fan_in), sqrt(6 / fan_in)].
Eigen::MatrixXd random_fixed_embedding(int V, int d_f, int fan_in,
                                       std::uint64_t seed);

// E = [E_t | E_f]. Only E_t is ever written by an update.
class HybridEmbedding {
public:
  using UpdateRule =
      std::function<void(Eigen::MatrixXd &param, const Eigen::MatrixXd &grad)>;

  HybridEmbedding() = default;
  // Throws kShapeMismatch if the row counts differ.
  HybridEmbedding(EmbeddingMode mode, Eigen::MatrixXd trainable,
                  Eigen::MatrixXd fixed);

  EmbeddingMode mode() const noexcept { return mode_; }
  int vocab_size() const noexcept { return static_cast<int>(e_t_.rows()); }
  int d_t() const noexcept { return static_cast<int>(e_t_.cols()); }
  int d_f() const noexcept { return static_cast<int>(e_f_.cols()); }
  int dim() const noexcept { return d_t() + d_f(); }

  const Eigen::MatrixXd &trainable() const noexcept { return e_t_; }
  const Eigen::MatrixXd &fixed() const noexcept { return e_f_; }
  // Mutable access for optimizers; the fixed block has none.
  Eigen::MatrixXd &trainable_mut() noexcept { return e_t_; }

  Eigen::RowVectorXd row(int id) const;
  // Row j = [E_t[ids[j]] | E_f[ids[j]]]. Throws kIndexOutOfVocabulary.
  Eigen::MatrixXd lookup(std::span<const int> ids) const;

  // grads is V x dim(); rule receives E_t and the left d_t columns.
  // Throws kShapeMismatch.
  void apply_gradient(const Eigen::MatrixXd &grads, const UpdateRule &rule);

  // SHA-256 hex digest over the fixed block's shape and bit patterns.
  std::string fixed_checksum() const;

private:
  EmbeddingMode mode_ = EmbeddingMode::kTrainableOnly;
  Eigen::MatrixXd e_t_;
  Eigen::MatrixXd e_f_;
};

// Free-function form of HybridEmbedding::apply_gradient.
void apply_embedding_gradient(HybridEmbedding &emb, const Eigen::MatrixXd &grads,
                              const HybridEmbedding::UpdateRule &rule);

// SHA-256 hex digest of a matrix's shape and column-major bit patterns.
std::string matrix_checksum(const Eigen::MatrixXd &m);

}  // namespace hemgen::seq

#endif  // HEMGEN_SEQ_EMBEDDING_H_
