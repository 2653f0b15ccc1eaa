//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/seq/lstm.h"

#include <algorithm>
#include <cmath>

#include "hemgen/error.h"
#include "hemgen/rng.h"

namespace hemgen::seq {

using Eigen::MatrixXd;

void GeneratorConfig::validate() const {
  auto fail = [](const std::string &what) { throw Error(Errc::kBadConfig, what); };
  if (hidden_size < 1 || layers < 1 || d < 1 || batch_size < 1 || epochs < 0 ||
      max_length < 1)
    fail("generator sizes must be positive");
  if (d_t < 0 || d_t > d)
    fail("generator d_t must lie in [0, d]");
  if (mode == EmbeddingMode::kTrainableOnly && d_t != d)
    fail("trainable_only mode requires d_t == d");
  if (mode == EmbeddingMode::kRandomFixed && d_t == d)
    fail("random_fixed mode requires d_t < d");
  if (!(dropout >= 0.0 && dropout < 1.0))
    fail("dropout must lie in [0, 1)");
  if (!(lr > 0.0))
    fail("learning rate must be positive");
}

void GeneratorConfig::store(KeyValues &kv, const std::string &prefix) const {
  kv.set(prefix + "hidden_size", hidden_size);
  kv.set(prefix + "layers", layers);
  kv.set(prefix + "d", d);
  kv.set(prefix + "d_t", d_t);
  kv.set(prefix + "mode", std::string(embedding_mode_name(mode)));
  kv.set(prefix + "sha_text_keyed", sha_text_keyed);
  kv.set(prefix + "sha_unit_norm", sha_unit_norm);
  kv.set(prefix + "dropout", dropout);
  kv.set(prefix + "lr", lr);
  kv.set(prefix + "batch_size", batch_size);
  kv.set(prefix + "epochs", epochs);
  kv.set(prefix + "max_length", max_length);
  kv.set(prefix + "seed", seed);
}

void GeneratorConfig::load(const KeyValues &kv, const std::string &prefix,
                           std::set<std::string> &used) {
  kv.read(prefix + "hidden_size", hidden_size, used);
  kv.read(prefix + "layers", layers, used);
  kv.read(prefix + "d", d, used);
  kv.read(prefix + "d_t", d_t, used);
  std::string m(embedding_mode_name(mode));
  kv.read(prefix + "mode", m, used);
  mode = parse_embedding_mode(m);
  kv.read(prefix + "sha_text_keyed", sha_text_keyed, used);
  kv.read(prefix + "sha_unit_norm", sha_unit_norm, used);
  kv.read(prefix + "dropout", dropout, used);
  kv.read(prefix + "lr", lr, used);
  kv.read(prefix + "batch_size", batch_size, used);
  kv.read(prefix + "epochs", epochs, used);
  kv.read(prefix + "max_length", max_length, used);
  kv.read(prefix + "seed", seed, used);
}

std::vector<std::pair<std::string, MatrixXd *>> LstmParameters::trainable() {
  std::vector<std::pair<std::string, MatrixXd *>> out;
  out.emplace_back("embedding.E_t", &embedding.trainable_mut());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string p = "lstm" + std::to_string(l) + ".";
    out.emplace_back(p + "w_x", &layers[l].w_x);
    out.emplace_back(p + "w_h", &layers[l].w_h);
    out.emplace_back(p + "b", &layers[l].b);
  }
  out.emplace_back("decoder.w", &w_out);
  out.emplace_back("decoder.b", &b_out);
  return out;
}

std::vector<std::string> LstmParameters::trainable_names() const {
  std::vector<std::string> names;
  for (auto &[n, p]: const_cast<LstmParameters *>(this)->trainable())
    names.push_back(n);
  return names;
}

namespace {

void fill_uniform(MatrixXd &m, Rng &rng, double bound) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      m(i, j) = rng.uniform(-bound, bound);
}

MatrixXd sigmoid(const MatrixXd &z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

// Activated gates, new cell and hidden state for one layer and one step.
void layer_step(const LstmLayer &p, const MatrixXd &x, const MatrixXd &h_prev,
                const MatrixXd &c_prev, LayerStep &out) {
  const Eigen::Index H = h_prev.cols();
  MatrixXd z = x * p.w_x;
  z.noalias() += h_prev * p.w_h;
  z.rowwise() += p.b.row(0);
  out.gates.resize(z.rows(), 4 * H);
  out.gates.leftCols(2 * H) = sigmoid(z.leftCols(2 * H));
  out.gates.middleCols(2 * H, H) = z.middleCols(2 * H, H).array().tanh().matrix();
  out.gates.rightCols(H) = sigmoid(z.rightCols(H));
  const auto i = out.gates.leftCols(H).array();
  const auto f = out.gates.middleCols(H, H).array();
  const auto g = out.gates.middleCols(2 * H, H).array();
  const auto o = out.gates.rightCols(H).array();
  out.c = (f * c_prev.array() + i * g).matrix();
  out.tanh_c = out.c.array().tanh().matrix();
  out.h = (o * out.tanh_c.array()).matrix();
}

MatrixXd dropout_mask(Rng &rng, Eigen::Index rows, Eigen::Index cols, double p) {
  const double keep = 1.0 / (1.0 - p);
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      m(i, j) = rng.uniform() < p ? 0.0 : keep;
  return m;
}

MatrixXd embed_rows(const HybridEmbedding &emb, const Batch &batch, int t) {
  MatrixXd x(batch.rows, emb.dim());
  const int V = emb.vocab_size();
  for (int b = 0; b < batch.rows; ++b) {
    const int id = batch.input(t, b);
    if (id < 0 || id >= V)
      throw Error(Errc::kIndexOutOfVocabulary, "batch token id out of range",
                  static_cast<std::size_t>(id < 0 ? 0 : id));
    x.row(b).head(emb.d_t()) = emb.trainable().row(id);
    x.row(b).tail(emb.d_f()) = emb.fixed().row(id);
  }
  return x;
}

void check_shapes(const LstmParameters &p) {
  const int H = p.hidden();
  const int V = p.vocab_size();
  bool ok = !p.layers.empty() && p.embedding.vocab_size() == V &&
            p.b_out.rows() == 1 && p.b_out.cols() == V;
  Eigen::Index in = p.embedding.dim();
  for (const auto &l: p.layers) {
    ok = ok && l.w_x.rows() == in && l.w_x.cols() == 4 * H && l.w_h.rows() == H &&
         l.w_h.cols() == 4 * H && l.b.rows() == 1 && l.b.cols() == 4 * H;
    in = H;
  }
  if (!ok)
    throw Error(Errc::kShapeMismatch, "inconsistent generator parameter shapes");
}

}  // namespace

LstmParameters init_parameters(const GeneratorConfig &config,
                               const Vocabulary &vocab) {
  config.validate();
  const int V = vocab.size();
  const int H = config.hidden_size;
  const int d_f = config.d - config.d_t;
  Rng rng(derive_seed(config.seed, "generator.init"));

  MatrixXd fixed(V, d_f);
  switch (config.mode) {
  case EmbeddingMode::kTrainableOnly:
    break;
  case EmbeddingMode::kRandomFixed:
    fixed = random_fixed_embedding(V, d_f, d_f,
                                   derive_seed(config.seed, "generator.fixed"));
    break;
  case EmbeddingMode::kShaFixed:
    if (d_f > 0)
      fixed = config.sha_text_keyed
                  ? sha_text_embedding(vocab, d_f, config.sha_unit_norm)
                  : sha_fixed_embedding(V, config.d, config.d_t, config.sha_unit_norm);
    break;
  }
  MatrixXd trainable(V, config.d_t);
  fill_uniform(trainable, rng, 1.0);

  LstmParameters p;
  p.embedding = HybridEmbedding(config.mode, std::move(trainable), std::move(fixed));
  const double bound = 1.0 / std::sqrt(static_cast<double>(H));
  int in = config.d;
  for (int l = 0; l < config.layers; ++l) {
    LstmLayer layer { MatrixXd(in, 4 * H), MatrixXd(H, 4 * H), MatrixXd(1, 4 * H) };
    fill_uniform(layer.w_x, rng, bound);
    fill_uniform(layer.w_h, rng, bound);
    fill_uniform(layer.b, rng, bound);
    layer.b.middleCols(H, H).array() += 1.0;
    p.layers.push_back(std::move(layer));
    in = H;
  }
  p.w_out.resize(H, V);
  p.b_out.resize(1, V);
  fill_uniform(p.w_out, rng, bound);
  fill_uniform(p.b_out, rng, bound);
  return p;
}

int Batch::unmasked_count() const {
  return static_cast<int>(
      std::count_if(targets.begin(), targets.end(),
                    [](int t) { return t != Vocabulary::kPad; }));
}

Batch make_batch(std::span<const std::vector<int>> sequences) {
  Batch batch;
  batch.rows = static_cast<int>(sequences.size());
  std::size_t longest = 0;
  for (const auto &s: sequences)
    longest = std::max(longest, s.size());
  batch.steps = static_cast<int>(longest) + 1;
  const std::size_t n = static_cast<std::size_t>(batch.steps) * batch.rows;
  batch.inputs.assign(n, Vocabulary::kPad);
  batch.targets.assign(n, Vocabulary::kPad);
  for (int b = 0; b < batch.rows; ++b) {
    const auto &s = sequences[b];
    batch.inputs[b] = Vocabulary::kBos;
    for (std::size_t t = 0; t < s.size(); ++t) {
      batch.inputs[(t + 1) * batch.rows + b] = s[t];
      batch.targets[t * batch.rows + b] = s[t];
    }
    batch.targets[s.size() * batch.rows + b] = Vocabulary::kEos;
  }
  return batch;
}

ForwardResult forward(const LstmParameters &params, const Batch &batch,
                      double dropout, bool dropout_on, std::uint64_t seed) {
  check_shapes(params);
  if (batch.rows < 1 || batch.steps < 1 ||
      batch.inputs.size() != static_cast<std::size_t>(batch.rows) * batch.steps ||
      batch.targets.size() != batch.inputs.size())
    throw Error(Errc::kShapeMismatch, "malformed batch");
  const bool drop = dropout_on && dropout > 0.0;
  const int B = batch.rows;
  const int T = batch.steps;
  const int H = params.hidden();
  const std::size_t L = params.layers.size();

  ForwardResult r;
  ForwardCache &c = r.cache;
  c.revision = params.revision;
  c.batch = batch;
  c.steps.assign(L, std::vector<LayerStep>(T));
  Rng rng(seed);

  std::vector<MatrixXd> h(L, MatrixXd::Zero(B, H));
  std::vector<MatrixXd> cell(L, MatrixXd::Zero(B, H));
  for (int t = 0; t < T; ++t) {
    MatrixXd x = embed_rows(params.embedding, batch, t);
    if (drop) {
      c.x_mask.push_back(dropout_mask(rng, B, x.cols(), dropout));
      x.array() *= c.x_mask.back().array();
    }
    c.x.push_back(std::move(x));
    const MatrixXd *in = &c.x.back();
    for (std::size_t l = 0; l < L; ++l) {
      LayerStep &s = c.steps[l][t];
      layer_step(params.layers[l], *in, h[l], cell[l], s);
      h[l] = s.h;
      cell[l] = s.c;
      in = &s.h;
    }
    MatrixXd top = *in;
    if (drop) {
      c.top_mask.push_back(dropout_mask(rng, B, H, dropout));
      top.array() *= c.top_mask.back().array();
    }
    MatrixXd logits = top * params.w_out;
    logits.rowwise() += params.b_out.row(0);
    if (!logits.allFinite())
      throw Error(Errc::kNonFiniteActivation, "non-finite logits", static_cast<std::size_t>(t));
    c.top.push_back(std::move(top));
    r.logits.push_back(std::move(logits));
  }
  return r;
}

namespace {

void check_logits(std::span<const MatrixXd> logits, const Batch &batch) {
  if (logits.size() != static_cast<std::size_t>(batch.steps))
    throw Error(Errc::kShapeMismatch, "logit steps differ from batch steps");
  for (const auto &l: logits)
    if (l.rows() != batch.rows)
      throw Error(Errc::kShapeMismatch, "logit rows differ from batch rows");
}

}  // namespace

double sequence_loss(std::span<const MatrixXd> logits, const Batch &batch) {
  check_logits(logits, batch);
  double total = 0.0;
  int count = 0;
  for (int t = 0; t < batch.steps; ++t) {
    for (int b = 0; b < batch.rows; ++b) {
      if (batch.masked(t, b))
        continue;
      const auto row = logits[t].row(b);
      const double m = row.maxCoeff();
      const double lse = m + std::log((row.array() - m).exp().sum());
      total += lse - row(batch.target(t, b));
      ++count;
    }
  }
  if (count == 0)
    throw Error(Errc::kAllPositionsMasked, "every target position is padding");
  return total / count;
}

std::vector<MatrixXd> loss_gradient(std::span<const MatrixXd> logits,
                                    const Batch &batch) {
  check_logits(logits, batch);
  const int count = batch.unmasked_count();
  if (count == 0)
    throw Error(Errc::kAllPositionsMasked, "every target position is padding");
  std::vector<MatrixXd> grad;
  grad.reserve(logits.size());
  for (int t = 0; t < batch.steps; ++t) {
    MatrixXd g = MatrixXd::Zero(logits[t].rows(), logits[t].cols());
    for (int b = 0; b < batch.rows; ++b) {
      if (batch.masked(t, b))
        continue;
      const auto row = logits[t].row(b);
      const double m = row.maxCoeff();
      Eigen::RowVectorXd p = (row.array() - m).exp().matrix();
      p /= p.sum();
      p(batch.target(t, b)) -= 1.0;
      g.row(b) = p / count;
    }
    grad.push_back(std::move(g));
  }
  return grad;
}

std::vector<MatrixXd> LstmGradients::trainable_list() const {
  std::vector<MatrixXd> out;
  out.push_back(embedding.leftCols(d_t));
  for (const auto &l: layers) {
    out.push_back(l.w_x);
    out.push_back(l.w_h);
    out.push_back(l.b);
  }
  out.push_back(w_out);
  out.push_back(b_out);
  return out;
}

LstmGradients backward(const LstmParameters &params, const ForwardCache &cache,
                       std::span<const MatrixXd> dlogits) {
  if (cache.revision != params.revision)
    throw Error(Errc::kStaleCache, "parameters changed after the forward pass");
  check_shapes(params);
  const Batch &batch = cache.batch;
  check_logits(dlogits, batch);
  const int B = batch.rows;
  const int T = batch.steps;
  const int H = params.hidden();
  const std::size_t L = params.layers.size();
  const bool drop = !cache.x_mask.empty();
  if (cache.x.size() != static_cast<std::size_t>(T) || cache.steps.size() != L)
    throw Error(Errc::kStaleCache, "cache does not match the parameters");

  LstmGradients g;
  const auto &emb = params.embedding;
  g.embedding = MatrixXd::Zero(emb.vocab_size(), emb.dim());
  g.d_t = emb.d_t();
  for (const auto &l: params.layers)
    g.layers.push_back({ MatrixXd::Zero(l.w_x.rows(), l.w_x.cols()),
                         MatrixXd::Zero(l.w_h.rows(), l.w_h.cols()),
                         MatrixXd::Zero(1, l.b.cols()) });
  g.w_out = MatrixXd::Zero(params.w_out.rows(), params.w_out.cols());
  g.b_out = MatrixXd::Zero(1, params.b_out.cols());

  // Upstream gradient into each layer's h, per step; starts at the decoder.
  std::vector<MatrixXd> dh_in(T);
  for (int t = 0; t < T; ++t) {
    g.w_out.noalias() += cache.top[t].transpose() * dlogits[t];
    g.b_out += dlogits[t].colwise().sum();
    dh_in[t] = dlogits[t] * params.w_out.transpose();
    if (drop)
      dh_in[t].array() *= cache.top_mask[t].array();
  }

  const MatrixXd zero = MatrixXd::Zero(B, H);
  MatrixXd dz(B, 4 * H);
  for (std::size_t li = L; li-- > 0;) {
    const LstmLayer &p = params.layers[li];
    LstmLayer &gl = g.layers[li];
    const auto &steps = cache.steps[li];
    MatrixXd dh_next = zero;
    MatrixXd dc_next = zero;
    for (int t = T; t-- > 0;) {
      const LayerStep &s = steps[t];
      const MatrixXd &c_prev = t > 0 ? steps[t - 1].c : zero;
      const MatrixXd &h_prev = t > 0 ? steps[t - 1].h : zero;
      const MatrixXd &x = li == 0 ? cache.x[t] : cache.steps[li - 1][t].h;
      const auto i = s.gates.leftCols(H).array();
      const auto f = s.gates.middleCols(H, H).array();
      const auto gg = s.gates.middleCols(2 * H, H).array();
      const auto o = s.gates.rightCols(H).array();

      const Eigen::ArrayXXd dh = dh_in[t].array() + dh_next.array();
      const Eigen::ArrayXXd dc =
          dh * o * (1.0 - s.tanh_c.array().square()) + dc_next.array();
      dz.leftCols(H) = (dc * gg * i * (1.0 - i)).matrix();
      dz.middleCols(H, H) = (dc * c_prev.array() * f * (1.0 - f)).matrix();
      dz.middleCols(2 * H, H) = (dc * i * (1.0 - gg.square())).matrix();
      dz.rightCols(H) = (dh * s.tanh_c.array() * o * (1.0 - o)).matrix();

      gl.w_x.noalias() += x.transpose() * dz;
      gl.w_h.noalias() += h_prev.transpose() * dz;
      gl.b += dz.colwise().sum();
      dc_next = (dc * f).matrix();
      dh_next.noalias() = dz * p.w_h.transpose();
      // Reuse dh_in as the gradient flowing into this layer's input.
      dh_in[t] = dz * p.w_x.transpose();
    }
  }

  const int d_t = emb.d_t();
  for (int t = 0; t < T; ++t) {
    MatrixXd &dx = dh_in[t];
    if (drop)
      dx.array() *= cache.x_mask[t].array();
    for (int b = 0; b < B; ++b)
      g.embedding.row(batch.input(t, b)).head(d_t) += dx.row(b).head(d_t);
  }
  return g;
}

LstmState zero_state(const LstmParameters &params, int rows) {
  LstmState s;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    s.h.push_back(MatrixXd::Zero(rows, params.hidden()));
    s.c.push_back(MatrixXd::Zero(rows, params.hidden()));
  }
  return s;
}

MatrixXd step(const LstmParameters &params, std::span<const int> tokens,
              LstmState &state) {
  const int B = static_cast<int>(tokens.size());
  const auto &emb = params.embedding;
  MatrixXd x(B, emb.dim());
  for (int b = 0; b < B; ++b)
    x.row(b) = emb.row(tokens[b]);
  LayerStep s;
  const MatrixXd *in = &x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    layer_step(params.layers[l], *in, state.h[l], state.c[l], s);
    state.h[l] = s.h;
    state.c[l] = s.c;
    in = &state.h[l];
  }
  MatrixXd logits = *in * params.w_out;
  logits.rowwise() += params.b_out.row(0);
  return logits;
}

}  // namespace hemgen::seq
