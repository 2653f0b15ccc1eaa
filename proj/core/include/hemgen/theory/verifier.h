//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_THEORY_VERIFIER_H_
#define HEMGEN_THEORY_VERIFIER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hemgen::theory {

// max over i != j of |<E[i], E[j]>| / (|E[i]| |E[j]|), accumulated in
// index order. Throws kTooFewRows, kZeroRow(row).
double coherence(const Eigen::MatrixXd &e);

// sqrt(8 L / d_f) + 4 L / d_f with L = ln(V^2 / eps). Throws kBadEpsilon
// unless 0 < eps < 1, kBadInputs unless V >= 2 and d_f >= 1.
double coherence_bound(int V, int d_f, double eps);

// sqrt(4 L / d_f): the value the union-bound argument alone yields.
double coherence_bound_union(int V, int d_f, double eps);

// Smallest p < cols with column j equal to column j mod p for every j, or
// cols when the columns do not repeat.
int column_period(const Eigen::MatrixXd &e);

struct CoherenceReport {
  int V = 0;
  int d_f = 0;
  double mu = 0.0;
  double epsilon = 0.0;
  // Column period of a tiled table; d_f when untiled.
  int effective_dim = 0;
  double bound = 0.0;            // at d_f
  double bound_effective = 0.0;  // at effective_dim
  double bound_union = 0.0;      // union-bound form at effective_dim
  bool pass = false;             // mu <= bound_effective
  // Passes the stated form but not the union-bound form.
  bool between_variants = false;
  // Coherence of the first effective_dim columns; equals mu when d_f is a
  // multiple of the period.
  double mu_leading = 0.0;
  bool tiling_exact = false;  // d_f % effective_dim == 0 and tiled
};

CoherenceReport coherence_report(const Eigen::MatrixXd &e_f, double eps);

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column k pairs with values[k]
  int sweeps = 0;
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls
// below 1e-15 times the matrix norm. Throws kShapeMismatch for
// non-square input, kBatchTooLarge above kMaxJacobi.
inline constexpr int kMaxJacobi = 64;
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd &a);

struct ConditioningReport {
  int n = 0;
  double mu = 0.0;  // of the normalized batch rows
  double lower = 0.0;  // 1 - (n - 1) mu
  double upper = 0.0;  // 1 + (n - 1) mu
  Eigen::VectorXd eigenvalues;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double condition = 0.0;  // lambda_max / lambda_min; inf when singular
  // (1 + (n-1) mu) / (1 - (n-1) mu), defined when (n - 1) mu < 1.
  bool condition_bound_defined = false;
  double condition_bound = 0.0;
  bool within_interval = false;
  bool condition_within_bound = false;
};

// Rows are normalized before the n x n Gram matrix is formed. Throws
// kBatchTooLarge (n > 64), kDegenerateBatch (n < 2, repeated or out of
// range index), kZeroRow.
ConditioningReport gershgorin_check(const Eigen::MatrixXd &e_f, std::span<const int> batch);

struct BoundInputs {
  double n = 303;
  double V = 41;
  double d_t = 10;
  double D = 1e5;
  double B_t = 1.0;
  double B_theta = 10.0;
  double L_f = 1.0;
  double L_l = 1.0;
  double delta = 0.05;
  double epsilon = 0.01;
  double d_f = 118;

  // Throws kBadInputs: n, V, D, L_f, L_l, d_f positive; d_t, B_t, B_theta
  // non-negative; delta and epsilon in (0, 1); all finite.
  void validate() const;
};

// (L_f L_l / sqrt(n)) (sqrt(V d_t + D) + B_t sqrt(V) + B_theta).
double rademacher_bound(const BoundInputs &in);

// 2 rademacher_bound + sqrt(ln(2 / delta) / (2 n)).
double generalization_bound(const BoundInputs &in);
double confidence_term(const BoundInputs &in);

struct ResidualReport {
  std::vector<double> residual_sq;  // |R[i]|^2
  double b_t = 0.0;                 // max |E_t[i]|
  double lambda_min = 0.0;          // of the V x V Gram of normalized E_f rows
  double bound = 0.0;               // b_t^2 + 1 - lambda_min
  int span_rank = 0;
  bool vacuous = false;             // lambda_min == 0 (V > d_f or dependent rows)
  bool holds = false;               // every residual within bound
};

// R[i] = E[i] - P E[i] with E[i] = [E_t[i] | E_f[i]] and P the orthogonal
// projection onto span{[0 | E_f[j]]}, built by modified Gram-Schmidt with
// one re-orthogonalization pass. Throws kDimensionMismatch.
ResidualReport residual_decomposition(const Eigen::MatrixXd &e_t, const Eigen::MatrixXd &e_f);

struct TheoryOptions {
  int V = 100;
  int d = 128;
  int d_t = 10;
  double epsilon = 0.01;
  int batches = 1000;
  std::uint64_t seed = 0;
  BoundInputs bounds;
};

// JSON document with every check and a pass flag each.
std::string verify_theory_json(const TheoryOptions &options);

}  // namespace hemgen::theory

#endif  // HEMGEN_THEORY_VERIFIER_H_
