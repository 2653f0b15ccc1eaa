//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_OPTIM_H_
#define HEMGEN_OPTIM_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace hemgen {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Decoupled (AdamW-style): p -= lr * weight_decay * p before the moment step.
  double weight_decay = 0.0;
  // Global L2 norm over all gradients; <= 0 disables clipping.
  double clip_norm = 5.0;
};

struct AdamState {
  std::int64_t step = 0;
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;

  // Zero moments shaped like params.
  void reset(std::span<Eigen::MatrixXd *const> params);
};

double global_norm(std::span<const Eigen::MatrixXd> grads);

// One Adam update over params[k] with gradient grads[k]. Clipping is applied
// to a copy of the gradients; returns the pre-clip global norm.
// Throws Error(kShapeMismatch) when lists or shapes disagree.
double adam_step(std::span<Eigen::MatrixXd *const> params,
                 std::span<const Eigen::MatrixXd> grads, AdamState &state,
                 const AdamConfig &config);

}  // namespace hemgen

#endif  // HEMGEN_OPTIM_H_
