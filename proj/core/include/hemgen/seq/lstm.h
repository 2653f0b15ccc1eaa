//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_SEQ_LSTM_H_
#define HEMGEN_SEQ_LSTM_H_

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hemgen/config.h"
#include "hemgen/seq/embedding.h"
#include "hemgen/seq/vocabulary.h"

namespace hemgen::seq {

struct GeneratorConfig {
  int hidden_size = 256;
  int layers = 2;
  int d = 128;
  int d_t = 50;
  EmbeddingMode mode = EmbeddingMode::kShaFixed;
  // Hash token text instead of "token(i)".
  bool sha_text_keyed = false;
  bool sha_unit_norm = false;
  double dropout = 0.1;
  double lr = 1e-3;
  int batch_size = 32;
  int epochs = 300;
  int max_length = 200;
  std::uint64_t seed = 0;

  // Throws Error(kBadConfig).
  void validate() const;

  void store(KeyValues &kv, const std::string &prefix) const;
  void load(const KeyValues &kv, const std::string &prefix,
            std::set<std::string> &used);

  bool operator==(const GeneratorConfig &) const = default;
};

// One recurrent layer. Gate columns are ordered [i | f | g | o], each of
// width H; w_x is in x 4H, w_h is H x 4H, b is 1 x 4H.
struct LstmLayer {
  Eigen::MatrixXd w_x;
  Eigen::MatrixXd w_h;
  Eigen::MatrixXd b;
};

struct LstmParameters {
  HybridEmbedding embedding;
  std::vector<LstmLayer> layers;
  Eigen::MatrixXd w_out;  // H x V
  Eigen::MatrixXd b_out;  // 1 x V
  // Bumped by every update through the training API; forward caches record
  // it so backward can detect stale inputs.
  std::uint64_t revision = 0;

  int hidden() const noexcept { return static_cast<int>(w_out.rows()); }
  int vocab_size() const noexcept { return static_cast<int>(w_out.cols()); }

  // Trainable tensors, the embedding's E_t first. E_f is never listed.
  std::vector<std::pair<std::string, Eigen::MatrixXd *>> trainable();
  std::vector<std::string> trainable_names() const;
};

// Builds E_f per the embedding mode and draws every trainable tensor from
// uniform(-1/sqrt(H), 1/sqrt(H)) (E_t from uniform(-1, 1)); forget-gate
// biases start at 1.
LstmParameters init_parameters(const GeneratorConfig &config,
                               const Vocabulary &vocab);

// Teacher-forcing batch with T = longest sequence + 1. Column b holds
// BOS s_b as inputs and s_b EOS as targets, PAD-filled past the end.
struct Batch {
  int rows = 0;
  int steps = 0;
  std::vector<int> inputs;   // index t * rows + b
  std::vector<int> targets;  // PAD where masked

  int input(int t, int b) const { return inputs[static_cast<std::size_t>(t) * rows + b]; }
  int target(int t, int b) const { return targets[static_cast<std::size_t>(t) * rows + b]; }
  bool masked(int t, int b) const { return target(t, b) == Vocabulary::kPad; }
  int unmasked_count() const;
};

// Sequences hold token ids without BOS/EOS.
Batch make_batch(std::span<const std::vector<int>> sequences);

struct LayerStep {
  Eigen::MatrixXd gates;  // activated, B x 4H
  Eigen::MatrixXd c;
  Eigen::MatrixXd tanh_c;
  Eigen::MatrixXd h;
};

struct ForwardCache {
  std::uint64_t revision = 0;
  Batch batch;
  std::vector<Eigen::MatrixXd> x;       // per step, after dropout
  std::vector<Eigen::MatrixXd> x_mask;  // inverted dropout scale per entry
  std::vector<std::vector<LayerStep>> steps;  // [layer][t]
  std::vector<Eigen::MatrixXd> top;           // last layer h after dropout
  std::vector<Eigen::MatrixXd> top_mask;
};

struct ForwardResult {
  std::vector<Eigen::MatrixXd> logits;  // per step, B x V
  ForwardCache cache;
};

// Dropout after the embedding and after the last layer, inverted scaling,
// masks drawn from seed. Throws kShapeMismatch, kIndexOutOfVocabulary,
// kNonFiniteActivation.
ForwardResult forward(const LstmParameters &params, const Batch &batch,
                      double dropout, bool dropout_on, std::uint64_t seed);

// Mean over unmasked positions of -log softmax(logits)[target], in nats.
// Throws kAllPositionsMasked, kShapeMismatch.
double sequence_loss(std::span<const Eigen::MatrixXd> logits, const Batch &batch);

// d(sequence_loss)/d(logits); zero at masked positions.
std::vector<Eigen::MatrixXd> loss_gradient(std::span<const Eigen::MatrixXd> logits,
                                           const Batch &batch);

struct LstmGradients {
  Eigen::MatrixXd embedding;  // V x d; the E_f columns stay zero
  int d_t = 0;
  std::vector<LstmLayer> layers;
  Eigen::MatrixXd w_out;
  Eigen::MatrixXd b_out;

  // Aligned with LstmParameters::trainable().
  std::vector<Eigen::MatrixXd> trainable_list() const;
};

// Exact BPTT. Throws kStaleCache when params changed since the forward pass.
LstmGradients backward(const LstmParameters &params, const ForwardCache &cache,
                       std::span<const Eigen::MatrixXd> dlogits);

// Incremental single-step state used for sampling.
struct LstmState {
  std::vector<Eigen::MatrixXd> h;
  std::vector<Eigen::MatrixXd> c;
};

LstmState zero_state(const LstmParameters &params, int rows);

// Advances state by one token per row and returns B x V logits. No dropout.
Eigen::MatrixXd step(const LstmParameters &params, std::span<const int> tokens,
                     LstmState &state);

}  // namespace hemgen::seq

#endif  // HEMGEN_SEQ_LSTM_H_
