//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/gnn/model.h"

#include <cmath>
#include <limits>

#include "hemgen/error.h"
#include "hemgen/properties.h"
#include "hemgen/rng.h"

namespace hemgen::gnn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void PredictorConfig::validate() const {
  auto fail = [](const std::string &what) { throw Error(Errc::kBadConfig, what); };
  if (hidden < 1 || layers < 1 || readout_steps < 1 || batch_size < 1 || epochs < 0)
    fail("predictor sizes must be positive");
  if (outputs != kTargetCount)
    fail("predictor outputs must equal the number of targets (9)");
  if (!(lr > 0.0))
    fail("predictor learning rate must be positive");
  if (!(weight_decay >= 0.0))
    fail("predictor weight decay must be non-negative");
  if (!(test_fraction >= 0.0 && test_fraction <= 0.5))
    fail("predictor test_fraction must lie in [0, 0.5]");
}

void PredictorConfig::store(KeyValues &kv, const std::string &prefix) const {
  kv.set(prefix + "hidden", hidden);
  kv.set(prefix + "layers", layers);
  kv.set(prefix + "readout_steps", readout_steps);
  kv.set(prefix + "outputs", outputs);
  kv.set(prefix + "lr", lr);
  kv.set(prefix + "weight_decay", weight_decay);
  kv.set(prefix + "epochs", epochs);
  kv.set(prefix + "batch_size", batch_size);
  kv.set(prefix + "test_fraction", test_fraction);
  kv.set(prefix + "log_h50", log_h50);
  kv.set(prefix + "seed", seed);
}

void PredictorConfig::load(const KeyValues &kv, const std::string &prefix,
                           std::set<std::string> &used) {
  kv.read(prefix + "hidden", hidden, used);
  kv.read(prefix + "layers", layers, used);
  kv.read(prefix + "readout_steps", readout_steps, used);
  kv.read(prefix + "outputs", outputs, used);
  kv.read(prefix + "lr", lr, used);
  kv.read(prefix + "weight_decay", weight_decay, used);
  kv.read(prefix + "epochs", epochs, used);
  kv.read(prefix + "batch_size", batch_size, used);
  kv.read(prefix + "test_fraction", test_fraction, used);
  kv.read(prefix + "log_h50", log_h50, used);
  kv.read(prefix + "seed", seed, used);
}

namespace {

void add_block(std::vector<std::pair<std::string, MatrixXd *>> &out, const std::string &p,
               AttentionBlock &b) {
  out.emplace_back(p + "att.a", &b.a);
  out.emplace_back(p + "att.c", &b.c);
  out.emplace_back(p + "w", &b.w);
  out.emplace_back(p + "b", &b.b);
  out.emplace_back(p + "gru.w_x", &b.gru.w_x);
  out.emplace_back(p + "gru.w_h", &b.gru.w_h);
  out.emplace_back(p + "gru.b_x", &b.gru.b_x);
  out.emplace_back(p + "gru.b_h", &b.gru.b_h);
}

}  // namespace

std::vector<std::pair<std::string, MatrixXd *>> PredictorParameters::tensors() {
  std::vector<std::pair<std::string, MatrixXd *>> out;
  out.emplace_back("input.w", &w_in);
  out.emplace_back("input.b", &b_in);
  out.emplace_back("neighbor.w", &w_nb);
  out.emplace_back("neighbor.b", &b_nb);
  for (std::size_t l = 0; l < layers.size(); ++l)
    add_block(out, "layer" + std::to_string(l) + ".", layers[l]);
  add_block(out, "readout.", readout);
  out.emplace_back("output.w", &w_out);
  out.emplace_back("output.b", &b_out);
  return out;
}

std::vector<std::pair<std::string, const MatrixXd *>> PredictorParameters::tensors() const {
  std::vector<std::pair<std::string, const MatrixXd *>> out;
  for (auto &[name, m]: const_cast<PredictorParameters *>(this)->tensors())
    out.emplace_back(std::move(name), m);
  return out;
}

PredictorParameters PredictorParameters::zeros_like() const {
  PredictorParameters z = *this;
  for (auto &[name, m]: z.tensors())
    m->setZero();
  return z;
}

namespace {

void glorot(MatrixXd &m, Rng &rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rng.uniform(-bound, bound);
}

void uniform(MatrixXd &m, double bound, Rng &rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rng.uniform(-bound, bound);
}

AttentionBlock make_block(int H) {
  AttentionBlock b;
  b.a = MatrixXd::Zero(2 * H, 1);
  b.c = MatrixXd::Zero(1, 1);
  b.w = MatrixXd::Zero(H, H);
  b.b = MatrixXd::Zero(1, H);
  b.gru.w_x = MatrixXd::Zero(H, 3 * H);
  b.gru.w_h = MatrixXd::Zero(H, 3 * H);
  b.gru.b_x = MatrixXd::Zero(1, 3 * H);
  b.gru.b_h = MatrixXd::Zero(1, 3 * H);
  return b;
}

}  // namespace

PredictorParameters init_predictor(const PredictorConfig &config) {
  config.validate();
  const int H = config.hidden;
  PredictorParameters p;
  p.w_in = MatrixXd::Zero(kNodeFeatures, H);
  p.b_in = MatrixXd::Zero(1, H);
  p.w_nb = MatrixXd::Zero(H + kEdgeFeatures, H);
  p.b_nb = MatrixXd::Zero(1, H);
  for (int l = 0; l < config.layers; ++l)
    p.layers.push_back(make_block(H));
  p.readout = make_block(H);
  p.readout_steps = config.readout_steps;
  p.w_out = MatrixXd::Zero(H, config.outputs);
  p.b_out = MatrixXd::Zero(1, config.outputs);

  Rng rng(derive_seed(config.seed, "predictor.init"));
  const double gru_bound = 1.0 / std::sqrt(static_cast<double>(H));
  for (auto &[name, m]: p.tensors()) {
    if (name.find(".gru.") != std::string::npos)
      uniform(*m, gru_bound, rng);
    else if (name.ends_with(".w") || name.ends_with(".a"))
      glorot(*m, rng);
  }
  return p;
}

namespace {

MatrixXd leaky(const MatrixXd &x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
}

MatrixXd leaky_grad(const MatrixXd &pre, const MatrixXd &upstream) {
  return upstream.binaryExpr(pre, [](double g, double v) { return v > 0.0 ? g : kLeakySlope * g; });
}

MatrixXd elu(const MatrixXd &x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
}

MatrixXd elu_grad(const MatrixXd &pre, const MatrixXd &upstream) {
  return upstream.binaryExpr(pre, [](double g, double v) { return v > 0.0 ? g : g * std::exp(v); });
}

MatrixXd sigmoid(const MatrixXd &x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

MatrixXd gather_rows(const MatrixXd &m, const std::vector<int> &idx) {
  MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t e = 0; e < idx.size(); ++e)
    out.row(static_cast<Eigen::Index>(e)) = m.row(idx[e]);
  return out;
}

MatrixXd gru_forward(const GruCell &cell, const MatrixXd &x, const MatrixXd &h, GruCache &c) {
  const Eigen::Index H = h.cols();
  const MatrixXd gx = (x * cell.w_x).rowwise() + cell.b_x.row(0);
  const MatrixXd gh = (h * cell.w_h).rowwise() + cell.b_h.row(0);
  c.x = x;
  c.h = h;
  c.r = sigmoid(gx.leftCols(H) + gh.leftCols(H));
  c.z = sigmoid(gx.middleCols(H, H) + gh.middleCols(H, H));
  c.hn = gh.rightCols(H);
  c.n = (gx.rightCols(H).array() + c.r.array() * c.hn.array()).tanh().matrix();
  return ((1.0 - c.z.array()) * c.n.array() + c.z.array() * h.array()).matrix();
}

// Accumulates parameter gradients into g; returns d/dx and writes d/dh.
MatrixXd gru_backward(const GruCell &cell, const GruCache &c, const MatrixXd &dout,
                      GruCell &g, MatrixXd &dh) {
  const Eigen::Index H = c.h.cols();
  const Eigen::Index rows = c.h.rows();
  const auto z = c.z.array();
  const auto n = c.n.array();
  const auto r = c.r.array();
  const auto d = dout.array();
  const MatrixXd dn_pre = (d * (1.0 - z) * (1.0 - n.square())).matrix();
  const MatrixXd dz_pre = (d * (c.h.array() - n) * z * (1.0 - z)).matrix();
  const MatrixXd dr_pre = (dn_pre.array() * c.hn.array() * r * (1.0 - r)).matrix();
  MatrixXd dgx(rows, 3 * H);
  dgx << dr_pre, dz_pre, dn_pre;
  MatrixXd dgh(rows, 3 * H);
  dgh << dr_pre, dz_pre, (dn_pre.array() * r).matrix();
  g.w_x.noalias() += c.x.transpose() * dgx;
  g.b_x += dgx.colwise().sum();
  g.w_h.noalias() += c.h.transpose() * dgh;
  g.b_h += dgh.colwise().sum();
  dh = (d * z).matrix();
  dh.noalias() += dgh * cell.w_h.transpose();
  return dgx * cell.w_x.transpose();
}

MatrixXd attention_forward(const AttentionBlock &blk, const MatrixXd &q, const MatrixXd &k,
                           const std::vector<int> &seg, AttentionCache &c) {
  const Eigen::Index H = q.cols();
  const Eigen::Index S = q.rows();
  const Eigen::Index E = k.rows();
  c.q = q;
  c.k = k;
  c.seg = seg;
  const VectorXd sq = q * blk.a.topRows(H);
  const VectorXd sk = k * blk.a.bottomRows(H);
  c.pre.resize(E);
  for (Eigen::Index e = 0; e < E; ++e)
    c.pre[e] = sq[seg[e]] + sk[e] + blk.c(0, 0);
  const VectorXd score = leaky(c.pre);

  VectorXd seg_max = VectorXd::Constant(S, -std::numeric_limits<double>::infinity());
  for (Eigen::Index e = 0; e < E; ++e)
    seg_max[seg[e]] = std::max(seg_max[seg[e]], score[e]);
  c.alpha.resize(E);
  VectorXd seg_sum = VectorXd::Zero(S);
  for (Eigen::Index e = 0; e < E; ++e) {
    c.alpha[e] = std::exp(score[e] - seg_max[seg[e]]);
    seg_sum[seg[e]] += c.alpha[e];
  }
  for (Eigen::Index e = 0; e < E; ++e)
    c.alpha[e] /= seg_sum[seg[e]];

  c.t = (k * blk.w).rowwise() + blk.b.row(0);
  c.agg = MatrixXd::Zero(S, H);
  for (Eigen::Index e = 0; e < E; ++e)
    c.agg.row(seg[e]) += c.alpha[e] * c.t.row(e);
  c.ctx = elu(c.agg);
  return gru_forward(blk.gru, c.ctx, q, c.gru);
}

// Accumulates parameter gradients into g; writes d/dq and d/dk.
void attention_backward(const AttentionBlock &blk, const AttentionCache &c,
                        const MatrixXd &dout, AttentionBlock &g, MatrixXd &dq, MatrixXd &dk) {
  const Eigen::Index H = c.q.cols();
  const Eigen::Index S = c.q.rows();
  const Eigen::Index E = c.k.rows();
  const MatrixXd dctx = gru_backward(blk.gru, c.gru, dout, g.gru, dq);
  const MatrixXd dagg = elu_grad(c.agg, dctx);

  MatrixXd dt(E, H);
  VectorXd dalpha(E);
  for (Eigen::Index e = 0; e < E; ++e) {
    dt.row(e) = c.alpha[e] * dagg.row(c.seg[e]);
    dalpha[e] = dagg.row(c.seg[e]).dot(c.t.row(e));
  }
  g.w.noalias() += c.k.transpose() * dt;
  g.b += dt.colwise().sum();
  dk = dt * blk.w.transpose();

  VectorXd seg_dot = VectorXd::Zero(S);
  for (Eigen::Index e = 0; e < E; ++e)
    seg_dot[c.seg[e]] += c.alpha[e] * dalpha[e];
  VectorXd dpre(E);
  for (Eigen::Index e = 0; e < E; ++e) {
    const double ds = c.alpha[e] * (dalpha[e] - seg_dot[c.seg[e]]);
    dpre[e] = c.pre[e] > 0.0 ? ds : kLeakySlope * ds;
  }
  VectorXd dsq = VectorXd::Zero(S);
  for (Eigen::Index e = 0; e < E; ++e)
    dsq[c.seg[e]] += dpre[e];
  g.c(0, 0) += dpre.sum();
  g.a.topRows(H).noalias() += c.q.transpose() * dsq;
  g.a.bottomRows(H).noalias() += c.k.transpose() * dpre;
  dq.noalias() += dsq * blk.a.topRows(H).transpose();
  dk.noalias() += dpre * blk.a.bottomRows(H).transpose();
}

void check_graph(const PredictorParameters &params, const GraphTensors &g) {
  if (g.graphs < 1 || g.nodes() == 0)
    throw Error(Errc::kEmptyGraph, "predict: no nodes");
  if (g.x.cols() != params.w_in.rows() || g.edge_x.cols() != kEdgeFeatures ||
      g.edge_x.rows() != g.edges() || g.dst.size() != g.src.size() ||
      static_cast<int>(g.graph_of.size()) != g.nodes())
    throw Error(Errc::kShapeMismatch, "predict: graph tensor shapes are inconsistent");
  std::vector<int> count(g.graphs, 0);
  for (const int id: g.graph_of) {
    if (id < 0 || id >= g.graphs)
      throw Error(Errc::kShapeMismatch, "predict: graph id out of range");
    ++count[id];
  }
  for (int i = 0; i < g.graphs; ++i)
    if (count[i] == 0)
      throw Error(Errc::kEmptyGraph, "predict: graph has no nodes", static_cast<std::size_t>(i));
  for (int e = 0; e < g.edges(); ++e)
    if (g.src[e] < 0 || g.src[e] >= g.nodes() || g.dst[e] < 0 || g.dst[e] >= g.nodes())
      throw Error(Errc::kShapeMismatch, "predict: edge endpoint out of range",
                  static_cast<std::size_t>(e));
}

}  // namespace

PredictorOutput predict(const PredictorParameters &params, const GraphTensors &graph) {
  check_graph(params, graph);
  PredictorOutput out;
  PredictorCache &c = out.cache;
  c.graph = graph;
  const int H = params.hidden();

  c.p0 = (graph.x * params.w_in).rowwise() + params.b_in.row(0);
  MatrixXd h = leaky(c.p0);
  c.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    MatrixXd k;
    if (l == 0) {
      c.nb_in.resize(graph.edges(), H + kEdgeFeatures);
      c.nb_in << gather_rows(h, graph.src), graph.edge_x;
      c.nb_pre = (c.nb_in * params.w_nb).rowwise() + params.b_nb.row(0);
      k = leaky(c.nb_pre);
    } else {
      k = gather_rows(h, graph.src);
    }
    h = attention_forward(params.layers[l], h, k, graph.dst, c.layers[l]);
    out.edge_attention.push_back(c.layers[l].alpha);
  }
  out.node_states = h;

  MatrixXd state = MatrixXd::Zero(graph.graphs, H);
  for (int v = 0; v < graph.nodes(); ++v)
    state.row(graph.graph_of[v]) += h.row(v);
  c.readout.resize(params.readout_steps);
  for (int t = 0; t < params.readout_steps; ++t) {
    state = attention_forward(params.readout, state, h, graph.graph_of, c.readout[t]);
    out.readout_attention.push_back(c.readout[t].alpha);
  }
  c.graph_state = state;
  out.y = (state * params.w_out).rowwise() + params.b_out.row(0);
  return out;
}

PredictorParameters predictor_backward(const PredictorParameters &params,
                                       const PredictorCache &c, const MatrixXd &dy) {
  const GraphTensors &graph = c.graph;
  if (dy.rows() != graph.graphs || dy.cols() != params.outputs() ||
      c.layers.size() != params.layers.size() ||
      static_cast<int>(c.readout.size()) != params.readout_steps)
    throw Error(Errc::kShapeMismatch, "predictor backward: cache does not match parameters");
  PredictorParameters g = params.zeros_like();
  const int H = params.hidden();

  g.w_out.noalias() = c.graph_state.transpose() * dy;
  g.b_out = dy.colwise().sum();
  MatrixXd dstate = dy * params.w_out.transpose();
  MatrixXd dh = MatrixXd::Zero(graph.nodes(), H);
  MatrixXd dq;
  MatrixXd dk;
  for (int t = params.readout_steps - 1; t >= 0; --t) {
    attention_backward(params.readout, c.readout[t], dstate, g.readout, dq, dk);
    dstate = dq;
    dh += dk;
  }
  for (int v = 0; v < graph.nodes(); ++v)
    dh.row(v) += dstate.row(graph.graph_of[v]);

  for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
    attention_backward(params.layers[l], c.layers[l], dh, g.layers[l], dq, dk);
    dh = dq;
    if (l == 0) {
      const MatrixXd dpre = leaky_grad(c.nb_pre, dk);
      g.w_nb.noalias() += c.nb_in.transpose() * dpre;
      g.b_nb += dpre.colwise().sum();
      const MatrixXd din = dpre * params.w_nb.transpose();
      for (int e = 0; e < graph.edges(); ++e)
        dh.row(graph.src[e]) += din.row(e).head(H);
    } else {
      for (int e = 0; e < graph.edges(); ++e)
        dh.row(graph.src[e]) += dk.row(e);
    }
  }
  const MatrixXd dp0 = leaky_grad(c.p0, dh);
  g.w_in.noalias() = graph.x.transpose() * dp0;
  g.b_in = dp0.colwise().sum();
  return g;
}

double masked_mse(const MatrixXd &y, const MatrixXd &target, MatrixXd *grad) {
  if (y.rows() != target.rows() || y.cols() != target.cols())
    throw Error(Errc::kShapeMismatch, "masked_mse: shapes differ");
  Eigen::Index observed = 0;
  for (Eigen::Index i = 0; i < target.size(); ++i)
    observed += std::isfinite(target.data()[i]) ? 1 : 0;
  if (observed == 0)
    throw Error(Errc::kAllPositionsMasked, "masked_mse: no observed targets");
  const double inv = 1.0 / static_cast<double>(observed);
  if (grad)
    grad->setZero(y.rows(), y.cols());
  double loss = 0.0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      if (!std::isfinite(target(i, j)))
        continue;
      const double r = y(i, j) - target(i, j);
      loss += r * r * inv;
      if (grad)
        (*grad)(i, j) = 2.0 * r * inv;
    }
  }
  return loss;
}

}  // namespace hemgen::gnn
