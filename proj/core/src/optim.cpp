//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/optim.h"

#include <cmath>

#include "hemgen/error.h"

namespace hemgen {

void AdamState::reset(std::span<Eigen::MatrixXd *const> params) {
  step = 0;
  m.clear();
  v.clear();
  for (const auto *p: params) {
    m.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    v.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
  }
}

double global_norm(std::span<const Eigen::MatrixXd> grads) {
  double sq = 0.0;
  for (const auto &g: grads)
    sq += g.squaredNorm();
  return std::sqrt(sq);
}

double adam_step(std::span<Eigen::MatrixXd *const> params,
                 std::span<const Eigen::MatrixXd> grads, AdamState &state,
                 const AdamConfig &config) {
  if (params.size() != grads.size())
    throw Error(Errc::kShapeMismatch, "parameter and gradient counts differ");
  if (state.m.empty() && !params.empty())
    state.reset(params);
  if (state.m.size() != params.size())
    throw Error(Errc::kShapeMismatch, "optimizer state does not match parameters");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto &p = *params[k];
    if (grads[k].rows() != p.rows() || grads[k].cols() != p.cols() ||
        state.m[k].rows() != p.rows() || state.m[k].cols() != p.cols())
      throw Error(Errc::kShapeMismatch, "gradient shape mismatch", k);
  }

  const double norm = global_norm(grads);
  double scale = 1.0;
  if (config.clip_norm > 0.0 && norm > config.clip_norm)
    scale = config.clip_norm / norm;

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Eigen::MatrixXd &p = *params[k];
    auto &m = state.m[k];
    auto &v = state.v[k];
    const auto g = grads[k].array() * scale;
    m.array() = config.beta1 * m.array() + (1.0 - config.beta1) * g;
    v.array() = config.beta2 * v.array() + (1.0 - config.beta2) * g.square();
    if (config.weight_decay != 0.0)
      p.array() -= config.lr * config.weight_decay * p.array();
    p.array() -= config.lr * (m.array() / bc1) /
                 ((v.array() / bc2).sqrt() + config.eps);
  }
  return norm;
}

}  // namespace hemgen
