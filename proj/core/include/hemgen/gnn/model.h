//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_GNN_MODEL_H_
#define HEMGEN_GNN_MODEL_H_

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hemgen/config.h"
#include "hemgen/gnn/features.h"

namespace hemgen::gnn {

inline constexpr double kLeakySlope = 0.01;

struct PredictorConfig {
  int hidden = 118;
  int layers = 3;
  int readout_steps = 3;
  int outputs = 9;
  double lr = 1e-4;
  double weight_decay = 1e-3;  // decoupled
  int epochs = 200;
  int batch_size = 32;
  double test_fraction = 0.2;
  // Train on log10(h50) and map predictions back.
  bool log_h50 = true;
  std::uint64_t seed = 0;

  // Throws Error(kBadConfig).
  void validate() const;

  void store(KeyValues &kv, const std::string &prefix) const;
  void load(const KeyValues &kv, const std::string &prefix, std::set<std::string> &used);

  bool operator==(const PredictorConfig &) const = default;
};

// PyTorch-style GRU cell, gate columns [r | z | n]:
//   r = sigmoid(x w_x_r + b_x_r + h w_h_r + b_h_r), z likewise,
//   n = tanh(x w_x_n + b_x_n + r * (h w_h_n + b_h_n)),
//   h' = (1 - z) * n + z * h.
struct GruCell {
  Eigen::MatrixXd w_x;  // in x 3H
  Eigen::MatrixXd w_h;  // H x 3H
  Eigen::MatrixXd b_x;  // 1 x 3H
  Eigen::MatrixXd b_h;  // 1 x 3H
};

// Attention of query rows over key rows grouped into segments:
//   score_e = leaky([q_seg(e) | k_e] a + c), alpha = softmax within segment,
//   context_s = elu(sum_e alpha_e (k_e w + b)), q' = gru(context, q).
struct AttentionBlock {
  Eigen::MatrixXd a;  // 2H x 1
  Eigen::MatrixXd c;  // 1 x 1
  Eigen::MatrixXd w;  // H x H
  Eigen::MatrixXd b;  // 1 x H
  GruCell gru;
};

// h0 = leaky(x w_in + b_in). Layer 0 keys are leaky([h_src | edge_x] w_nb +
// b_nb); later layers use h_src. Queries are node states, segments the
// in-edges of each node. The readout starts from the per-graph sum of final
// node states and attends over all atoms of the graph, every component
// included, for readout_steps steps with one shared block.
struct PredictorParameters {
  Eigen::MatrixXd w_in;  // kNodeFeatures x H
  Eigen::MatrixXd b_in;
  Eigen::MatrixXd w_nb;  // (H + kEdgeFeatures) x H
  Eigen::MatrixXd b_nb;
  std::vector<AttentionBlock> layers;
  AttentionBlock readout;
  Eigen::MatrixXd w_out;  // H x outputs
  Eigen::MatrixXd b_out;
  int readout_steps = 3;

  int hidden() const noexcept { return static_cast<int>(w_in.cols()); }
  int outputs() const noexcept { return static_cast<int>(w_out.cols()); }

  // Stable order used by the optimizer and checkpoints.
  std::vector<std::pair<std::string, Eigen::MatrixXd *>> tensors();
  std::vector<std::pair<std::string, const Eigen::MatrixXd *>> tensors() const;

  // Same shapes, all zeros.
  PredictorParameters zeros_like() const;
};

// Glorot-uniform weights, every GRU tensor uniform +-1/sqrt(H), other
// biases zero. Draws come from derive_seed(config.seed, "predictor.init") in
// tensors() order, row-major within a tensor.
PredictorParameters init_predictor(const PredictorConfig &config);

struct GruCache {
  Eigen::MatrixXd x, h, r, z, n, hn;
};

struct AttentionCache {
  Eigen::MatrixXd q, k;
  std::vector<int> seg;
  Eigen::VectorXd pre;    // score pre-activation per key
  Eigen::VectorXd alpha;  // normalized within segment
  Eigen::MatrixXd t;      // k w + b
  Eigen::MatrixXd agg;    // segment sums before elu
  Eigen::MatrixXd ctx;
  GruCache gru;
};

struct PredictorCache {
  GraphTensors graph;
  Eigen::MatrixXd p0;          // x w_in + b_in
  Eigen::MatrixXd nb_in;       // [h0_src | edge_x]
  Eigen::MatrixXd nb_pre;      // nb_in w_nb + b_nb
  std::vector<AttentionCache> layers;
  std::vector<AttentionCache> readout;
  Eigen::MatrixXd graph_state;  // input of the output head
};

struct PredictorOutput {
  Eigen::MatrixXd y;  // graphs x outputs, standardized space
  // Per layer, one weight per directed edge; sums to 1 over each node's
  // in-edges.
  std::vector<Eigen::VectorXd> edge_attention;
  // Per readout step, one weight per node; sums to 1 over each graph.
  std::vector<Eigen::VectorXd> readout_attention;
  Eigen::MatrixXd node_states;
  PredictorCache cache;
};

// Throws kEmptyGraph when a graph has no nodes, kShapeMismatch on feature
// widths.
PredictorOutput predict(const PredictorParameters &params, const GraphTensors &graph);

// Exact gradient of sum(dy .* y) with respect to every tensor.
PredictorParameters predictor_backward(const PredictorParameters &params,
                                       const PredictorCache &cache,
                                       const Eigen::MatrixXd &dy);

// Mean squared error over the finite entries of target; NaN entries are
// missing. Returns the loss and writes d loss / d y. Throws
// kAllPositionsMasked when no entry is finite.
double masked_mse(const Eigen::MatrixXd &y, const Eigen::MatrixXd &target,
                  Eigen::MatrixXd *grad);

}  // namespace hemgen::gnn

#endif  // HEMGEN_GNN_MODEL_H_
