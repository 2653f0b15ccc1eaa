//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/theory/verifier.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "hemgen/error.h"
#include "hemgen/rng.h"
#include "hemgen/seq/embedding.h"

namespace hemgen::theory {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double row_norm(const MatrixXd &e, Eigen::Index i) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < e.cols(); ++k)
    s += e(i, k) * e(i, k);
  return std::sqrt(s);
}

double row_dot(const MatrixXd &e, Eigen::Index i, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < e.cols(); ++k)
    s += e(i, k) * e(j, k);
  return s;
}

MatrixXd normalized_rows(const MatrixXd &e) {
  MatrixXd out = e;
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    const double n = row_norm(e, i);
    if (n == 0.0)
      throw Error(Errc::kZeroRow, "row " + std::to_string(i) + " has zero norm",
                  static_cast<std::size_t>(i));
    out.row(i) /= n;
  }
  return out;
}

double log_term(int V, double eps) {
  return std::log(static_cast<double>(V) * static_cast<double>(V) / eps);
}

void check_bound_args(int V, int d_f, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw Error(Errc::kBadEpsilon, "epsilon must lie in (0, 1)");
  if (V < 2 || d_f < 1)
    throw Error(Errc::kBadInputs, "coherence bound needs V >= 2 and d_f >= 1");
}

}  // namespace

double coherence(const MatrixXd &e) {
  if (e.rows() < 2)
    throw Error(Errc::kTooFewRows, "coherence needs at least two rows");
  std::vector<double> norms(static_cast<std::size_t>(e.rows()));
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    norms[i] = row_norm(e, i);
    if (norms[i] == 0.0)
      throw Error(Errc::kZeroRow, "row " + std::to_string(i) + " has zero norm",
                  static_cast<std::size_t>(i));
  }
  double mu = 0.0;
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = i + 1; j < e.rows(); ++j)
      mu = std::max(mu, std::abs(row_dot(e, i, j)) / (norms[i] * norms[j]));
  return mu;
}

double coherence_bound(int V, int d_f, double eps) {
  check_bound_args(V, d_f, eps);
  const double l = log_term(V, eps);
  return std::sqrt(8.0 * l / d_f) + 4.0 * l / d_f;
}

double coherence_bound_union(int V, int d_f, double eps) {
  check_bound_args(V, d_f, eps);
  return std::sqrt(4.0 * log_term(V, eps) / d_f);
}

int column_period(const MatrixXd &e) {
  const auto cols = static_cast<int>(e.cols());
  for (int p = 1; p < cols; ++p) {
    bool tiled = true;
    for (int j = p; j < cols && tiled; ++j)
      tiled = e.col(j) == e.col(j % p);
    if (tiled)
      return p;
  }
  return cols;
}

CoherenceReport coherence_report(const MatrixXd &e_f, double eps) {
  CoherenceReport r;
  r.V = static_cast<int>(e_f.rows());
  r.d_f = static_cast<int>(e_f.cols());
  r.epsilon = eps;
  r.mu = coherence(e_f);
  r.effective_dim = column_period(e_f);
  r.bound = coherence_bound(r.V, r.d_f, eps);
  r.bound_effective = coherence_bound(r.V, r.effective_dim, eps);
  r.bound_union = coherence_bound_union(r.V, r.effective_dim, eps);
  r.pass = r.mu <= r.bound_effective;
  r.between_variants = r.pass && r.mu > r.bound_union;
  r.mu_leading = coherence(e_f.leftCols(r.effective_dim));
  r.tiling_exact = r.effective_dim < r.d_f && r.d_f % r.effective_dim == 0;
  return r;
}

SymmetricEigen jacobi_eigen(const MatrixXd &a_in) {
  if (a_in.rows() != a_in.cols())
    throw Error(Errc::kShapeMismatch, "eigensolver needs a square matrix");
  const Eigen::Index n = a_in.rows();
  if (n > kMaxJacobi)
    throw Error(Errc::kBatchTooLarge,
                "eigensolver limited to " + std::to_string(kMaxJacobi) + " rows");
  MatrixXd a = 0.5 * (a_in + a_in.transpose());
  MatrixXd v = MatrixXd::Identity(n, n);
  const double scale = a.norm();
  auto off = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = 0; q < n; ++q)
        if (p != q)
          s += a(p, q) * a(p, q);
    return std::sqrt(s);
  };
  int sweeps = 0;
  constexpr int kMaxSweeps = 100;
  while (sweeps < kMaxSweeps && off() > 1e-15 * scale) {
    ++sweeps;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0)
          continue;
        // Rotation zeroing a(p, q), with |t| <= 1 for stability.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Diagonal in the t form: a 2 x 2 block [[1, g], [g, 1]] yields
        // exactly 1 - g and 1 + g.
        const double apq = a(p, q);
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (k == p || k == q)
            continue;
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweeps;
  return out;
}

ConditioningReport gershgorin_check(const MatrixXd &e_f, std::span<const int> batch) {
  const auto n = static_cast<int>(batch.size());
  if (n > kMaxJacobi)
    throw Error(Errc::kBatchTooLarge,
                "batch limited to " + std::to_string(kMaxJacobi) + " rows");
  if (n < 2)
    throw Error(Errc::kDegenerateBatch, "batch needs at least two rows");
  std::vector<int> sorted(batch.begin(), batch.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(Errc::kDegenerateBatch, "batch repeats a row");
  if (sorted.front() < 0 || sorted.back() >= e_f.rows())
    throw Error(Errc::kDegenerateBatch, "batch row out of range");

  MatrixXd rows(n, e_f.cols());
  for (int i = 0; i < n; ++i)
    rows.row(i) = e_f.row(batch[i]);
  const MatrixXd x = normalized_rows(rows);
  MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g(i, j) = i == j ? 1.0 : row_dot(x, i, j);

  ConditioningReport r;
  r.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      r.mu = std::max(r.mu, std::abs(g(i, j)));
  const double spread = (n - 1) * r.mu;
  r.lower = 1.0 - spread;
  r.upper = 1.0 + spread;
  r.eigenvalues = jacobi_eigen(g).values;
  r.lambda_min = r.eigenvalues[0];
  r.lambda_max = r.eigenvalues[n - 1];
  r.condition = r.lambda_min > 0.0 ? r.lambda_max / r.lambda_min
                                   : std::numeric_limits<double>::infinity();
  r.within_interval = r.lambda_min >= r.lower && r.lambda_max <= r.upper;
  r.condition_bound_defined = spread < 1.0;
  if (r.condition_bound_defined) {
    r.condition_bound = (1.0 + spread) / (1.0 - spread);
    r.condition_within_bound = r.condition <= r.condition_bound;
  }
  return r;
}

void BoundInputs::validate() const {
  const double all[] = { n, V, d_t, D, B_t, B_theta, L_f, L_l, delta, epsilon, d_f };
  for (const double v: all)
    if (!std::isfinite(v))
      throw Error(Errc::kBadInputs, "bound inputs must be finite");
  if (!(n > 0 && V > 0 && D > 0 && L_f > 0 && L_l > 0 && d_f > 0))
    throw Error(Errc::kBadInputs, "n, V, D, L_f, L_l and d_f must be positive");
  if (d_t < 0 || B_t < 0 || B_theta < 0)
    throw Error(Errc::kBadInputs, "d_t, B_t and B_theta must be non-negative");
  if (!(delta > 0 && delta < 1) || !(epsilon > 0 && epsilon < 1))
    throw Error(Errc::kBadInputs, "delta and epsilon must lie in (0, 1)");
}

double rademacher_bound(const BoundInputs &in) {
  in.validate();
  return in.L_f * in.L_l / std::sqrt(in.n) *
         (std::sqrt(in.V * in.d_t + in.D) + in.B_t * std::sqrt(in.V) + in.B_theta);
}

double confidence_term(const BoundInputs &in) {
  in.validate();
  return std::sqrt(std::log(2.0 / in.delta) / (2.0 * in.n));
}

double generalization_bound(const BoundInputs &in) {
  return 2.0 * rademacher_bound(in) + confidence_term(in);
}

ResidualReport residual_decomposition(const MatrixXd &e_t, const MatrixXd &e_f) {
  if (e_t.rows() != e_f.rows() || e_f.rows() == 0 || e_f.cols() == 0)
    throw Error(Errc::kDimensionMismatch,
                "E_t and E_f need the same non-zero row count and E_f a column");
  const Eigen::Index V = e_f.rows();
  const Eigen::Index d_t = e_t.cols();
  const Eigen::Index dim = d_t + e_f.cols();

  // Orthonormal basis of span{[0 | E_f[j]]}; vectors left with under 1e-10
  // of their original norm after two passes are dependent.
  std::vector<VectorXd> basis;
  for (Eigen::Index j = 0; j < V; ++j) {
    VectorXd u = VectorXd::Zero(dim);
    u.tail(e_f.cols()) = e_f.row(j).transpose();
    const double original = u.norm();
    if (original == 0.0)
      continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto &q: basis)
        u -= q.dot(u) * q;
    const double left = u.norm();
    if (left > 1e-10 * original)
      basis.push_back(u / left);
  }

  ResidualReport r;
  r.span_rank = static_cast<int>(basis.size());
  r.residual_sq.reserve(static_cast<std::size_t>(V));
  for (Eigen::Index i = 0; i < V; ++i) {
    VectorXd x(dim);
    x.head(d_t) = e_t.row(i).transpose();
    x.tail(e_f.cols()) = e_f.row(i).transpose();
    for (int pass = 0; pass < 2; ++pass)
      for (const auto &q: basis)
        x -= q.dot(x) * q;
    r.residual_sq.push_back(x.squaredNorm());
    r.b_t = std::max(r.b_t, e_t.row(i).norm());
  }

  // Gram of the unit-normalized rows; singular exactly when the rows are
  // dependent, which V > d_f forces.
  r.vacuous = r.span_rank < V;
  if (r.vacuous) {
    r.lambda_min = 0.0;
  } else {
    const MatrixXd x = normalized_rows(e_f);
    const MatrixXd g = x * x.transpose();
    r.lambda_min = std::max(0.0, Eigen::SelfAdjointEigenSolver<MatrixXd>(g, Eigen::EigenvaluesOnly)
                                     .eigenvalues()[0]);
  }
  r.bound = r.b_t * r.b_t + 1.0 - r.lambda_min;
  // Slack of a few ulps: with orthonormal E_f the bound equals max |E_t[i]|^2.
  const double slack = 1e-12 * std::max(1.0, r.bound);
  r.holds = std::all_of(r.residual_sq.begin(), r.residual_sq.end(),
                        [&](double v) { return v <= r.bound + slack; });
  return r;
}

std::string verify_theory_json(const TheoryOptions &options) {
  using nlohmann::json;
  const int d_f = options.d - options.d_t;
  const MatrixXd e_f = seq::sha_fixed_embedding(options.V, options.d, options.d_t);
  Rng init(derive_seed(options.seed, "theory.init"));
  MatrixXd e_t(options.V, options.d_t);
  for (Eigen::Index i = 0; i < e_t.rows(); ++i)
    for (Eigen::Index k = 0; k < e_t.cols(); ++k)
      e_t(i, k) = init.uniform(-1.0, 1.0);

  json doc;
  doc["V"] = options.V;
  doc["d"] = options.d;
  doc["d_t"] = options.d_t;
  doc["d_f"] = d_f;
  doc["seed"] = options.seed;
  bool all = true;

  const auto coh = coherence_report(e_f, options.epsilon);
  doc["coherence"] = {
    { "mu", coh.mu },
    { "epsilon", coh.epsilon },
    { "effective_dim", coh.effective_dim },
    { "bound", coh.bound },
    { "bound_effective", coh.bound_effective },
    { "bound_union_form", coh.bound_union },
    { "between_bound_forms", coh.between_variants },
    { "pass", coh.pass },
  };
  all = all && coh.pass;

  json tiling = { { "period", coh.effective_dim }, { "mu_full", coh.mu },
                  { "mu_leading", coh.mu_leading } };
  if (coh.tiling_exact) {
    const bool ok = std::abs(coh.mu - coh.mu_leading) <= 1e-12;
    tiling["status"] = ok ? "pass" : "fail";
    tiling["pass"] = ok;
    all = all && ok;
  } else {
    // Proportional inner products need d_f to be a whole number of periods.
    tiling["status"] = "not_applicable";
  }
  doc["tiling"] = tiling;

  const int batch = std::min({ 32, options.V, kMaxJacobi });
  Rng draw(derive_seed(options.seed, "theory.batches"));
  std::vector<int> ids(static_cast<std::size_t>(options.V));
  std::iota(ids.begin(), ids.end(), 0);
  int interval_violations = 0, condition_checked = 0, condition_violations = 0;
  double worst_lower_margin = std::numeric_limits<double>::infinity();
  double worst_upper_margin = std::numeric_limits<double>::infinity();
  for (int b = 0; b < options.batches; ++b) {
    draw.shuffle(std::span<int>(ids));
    const auto rep = gershgorin_check(e_f, std::span<const int>(ids.data(), batch));
    interval_violations += rep.within_interval ? 0 : 1;
    worst_lower_margin = std::min(worst_lower_margin, rep.lambda_min - rep.lower);
    worst_upper_margin = std::min(worst_upper_margin, rep.upper - rep.lambda_max);
    if (rep.condition_bound_defined) {
      ++condition_checked;
      condition_violations += rep.condition_within_bound ? 0 : 1;
    }
  }
  const bool cond_ok = interval_violations == 0 && condition_violations == 0;
  doc["conditioning"] = {
    { "batches", options.batches },
    { "batch_size", batch },
    { "interval_violations", interval_violations },
    { "min_lower_margin", worst_lower_margin },
    { "min_upper_margin", worst_upper_margin },
    { "condition_bound_checked", condition_checked },
    { "condition_bound_violations", condition_violations },
    { "pass", cond_ok },
  };
  all = all && cond_ok;

  BoundInputs in = options.bounds;
  in.V = options.V;
  in.d_t = options.d_t;
  in.d_f = d_f;
  in.epsilon = options.epsilon;
  const double rad = rademacher_bound(in);
  const double conf = confidence_term(in);
  const double gen = generalization_bound(in);
  const bool bounds_ok = std::isfinite(rad) && std::isfinite(gen);
  doc["bounds"] = {
    { "n", in.n }, { "V", in.V }, { "d_t", in.d_t }, { "D", in.D },
    { "B_t", in.B_t }, { "B_theta", in.B_theta }, { "L_f", in.L_f },
    { "L_l", in.L_l }, { "delta", in.delta },
    { "rademacher", rad }, { "confidence_term", conf },
    { "generalization_gap", gen }, { "pass", bounds_ok },
  };
  all = all && bounds_ok;

  const auto res = residual_decomposition(e_t, e_f);
  doc["residual"] = {
    { "max_residual_sq", *std::max_element(res.residual_sq.begin(), res.residual_sq.end()) },
    { "B_t", res.b_t },
    { "lambda_min", res.lambda_min },
    { "bound", res.bound },
    { "span_rank", res.span_rank },
    { "vacuous", res.vacuous },
    { "pass", res.holds },
  };
  all = all && res.holds;

  doc["pass"] = all;
  return doc.dump(2);
}

}  // namespace hemgen::theory
