//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <json.hpp>

#include "hemgen/error.h"
#include "hemgen/rng.h"
#include "hemgen/seq/embedding.h"
#include "hemgen/theory/verifier.h"

namespace hemgen::theory {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Big = boost::multiprecision::cpp_dec_float_50;

MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      // Box-Muller.
      const double u = 1.0 - rng.uniform();
      const double v = rng.uniform();
      m(i, j) = std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
    }
  return m;
}

template <class F>
Errc code_of(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kIo;
}

// Pairwise loop in the same accumulation order as the definition.
double brute_coherence(const MatrixXd &e) {
  double mu = 0.0;
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    for (Eigen::Index j = 0; j < e.rows(); ++j) {
      if (i == j)
        continue;
      double dot = 0.0, ni = 0.0, nj = 0.0;
      for (Eigen::Index k = 0; k < e.cols(); ++k) {
        dot += e(i, k) * e(j, k);
        ni += e(i, k) * e(i, k);
        nj += e(j, k) * e(j, k);
      }
      const double c = i < j ? std::abs(dot) / (std::sqrt(ni) * std::sqrt(nj))
                             : std::abs(dot) / (std::sqrt(nj) * std::sqrt(ni));
      mu = std::max(mu, c);
    }
  }
  return mu;
}

TEST(Coherence, Examples) {
  EXPECT_EQ(coherence(MatrixXd::Identity(5, 7)), 0.0);
  MatrixXd dup = gaussian(4, 9, 1);
  dup.row(3) = dup.row(1);
  EXPECT_NEAR(coherence(dup), 1.0, 1e-15);
  dup.row(3) = -2.5 * dup.row(1);
  EXPECT_NEAR(coherence(dup), 1.0, 1e-15);
}

TEST(Coherence, BruteForce) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const MatrixXd e = gaussian(2 + static_cast<int>(s % 9), 3 + static_cast<int>(s % 17), s);
    EXPECT_EQ(coherence(e), brute_coherence(e));
  }
  const MatrixXd sha = seq::sha_fixed_embedding(41, 128, 10);
  EXPECT_EQ(coherence(sha), brute_coherence(sha));
  const MatrixXd x = sha.rowwise().normalized();
  MatrixXd g = (x * x.transpose()).cwiseAbs();
  g.diagonal().setZero();
  EXPECT_NEAR(coherence(sha), g.maxCoeff(), 1e-14);
}

TEST(Coherence, ScalingAndPermutationInvariant) {
  const MatrixXd e = gaussian(12, 20, 7);
  const double mu = coherence(e);
  Rng rng(3);
  MatrixXd scaled = e;
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    scaled.row(i) *= rng.uniform(-50.0, 50.0) + (i % 2 ? 60.0 : -60.0);
  EXPECT_NEAR(coherence(scaled), mu, 1e-14);
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<int>(perm));
  MatrixXd permuted(12, 20);
  for (int i = 0; i < 12; ++i)
    permuted.row(i) = e.row(perm[i]);
  EXPECT_EQ(coherence(permuted), mu);
}

TEST(Coherence, Errors) {
  EXPECT_EQ(code_of([] { coherence(MatrixXd::Ones(1, 4)); }), Errc::kTooFewRows);
  MatrixXd z = gaussian(5, 4, 2);
  z.row(3).setZero();
  try {
    coherence(z);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kZeroRow);
    EXPECT_EQ(e.index(), 3u);
  }
}

TEST(Coherence, TiledShaRows) {
  // d_f = 128: four whole periods, inner products scale by exactly 4.
  const MatrixXd whole = seq::sha_fixed_embedding(100, 138, 10);
  const auto r = coherence_report(whole, 0.01);
  EXPECT_EQ(r.effective_dim, 32);
  EXPECT_TRUE(r.tiling_exact);
  EXPECT_NEAR(r.mu, coherence(whole.leftCols(32)), 1e-12);
  EXPECT_NEAR(r.mu, r.mu_leading, 1e-12);
  EXPECT_LE(r.mu, 1.0);
  EXPECT_GE(r.mu, 0.0);

  // d_f = 118 ends in a partial period.
  const auto partial = coherence_report(seq::sha_fixed_embedding(100, 128, 10), 0.01);
  EXPECT_EQ(partial.effective_dim, 32);
  EXPECT_FALSE(partial.tiling_exact);
  EXPECT_EQ(partial.bound_effective, coherence_bound(100, 32, 0.01));
  EXPECT_EQ(partial.bound, coherence_bound(100, 118, 0.01));

  EXPECT_EQ(column_period(gaussian(4, 10, 5)), 10);
  const auto r32 = coherence_report(seq::sha_fixed_embedding(100, 42, 10), 0.01);
  EXPECT_EQ(r32.effective_dim, 32);
  EXPECT_FALSE(r32.tiling_exact);
  EXPECT_TRUE(r32.pass);
}

Big big_bound(int V, int d, double eps) {
  const Big l = log(Big(V) * Big(V) / Big(eps));
  return sqrt(Big(8) * l / Big(d)) + Big(4) * l / Big(d);
}

TEST(CoherenceBound, HighPrecisionOracle) {
  for (const int V: { 2, 41, 100, 5000 })
    for (const int d: { 1, 32, 118, 128, 4096 })
      for (const double eps: { 1e-6, 0.01, 0.5, 0.999 }) {
        const double want = static_cast<double>(big_bound(V, d, eps));
        EXPECT_LE(std::abs(coherence_bound(V, d, eps) - want), 1e-14 * want);
      }
  const double spot = static_cast<double>(big_bound(100, 128, 0.01));
  EXPECT_NEAR(coherence_bound(100, 128, 0.01), spot, 1e-14 * spot);
  const Big l = log(Big(100) * Big(100) / Big(0.01));
  EXPECT_NEAR(coherence_bound_union(100, 128, 0.01), static_cast<double>(sqrt(Big(4) * l / Big(128))),
              1e-15);
}

TEST(CoherenceBound, Monotone) {
  double prev = coherence_bound(100, 1, 0.01);
  for (int d = 2; d <= 4096; d *= 2) {
    const double b = coherence_bound(100, d, 0.01);
    EXPECT_LT(b, prev);
    prev = b;
  }
  // Second term negligible at large d_f: doubling scales by ~1/sqrt(2).
  const double ratio = coherence_bound(100, 2'000'000, 0.01) / coherence_bound(100, 1'000'000, 0.01);
  EXPECT_NEAR(ratio, 1.0 / std::sqrt(2.0), 2e-3);
  EXPECT_GT(coherence_bound(100, 128, 0.01), coherence_bound_union(100, 128, 0.01));
}

TEST(CoherenceBound, Errors) {
  for (const double eps: { 0.0, 1.0, -0.1, 2.0, std::nan("") })
    EXPECT_EQ(code_of([&] { coherence_bound(10, 10, eps); }), Errc::kBadEpsilon);
  EXPECT_EQ(code_of([] { coherence_bound(1, 10, 0.1); }), Errc::kBadInputs);
  EXPECT_EQ(code_of([] { coherence_bound(10, 0, 0.1); }), Errc::kBadInputs);
}

TEST(CoherenceReport, BetweenBoundForms) {
  // Two rows at cosine 0.11: above sqrt(4L/d) = 0.091, below the stated 0.137.
  MatrixXd e = MatrixXd::Zero(2, 1000);
  e(0, 0) = 1.0;
  e(1, 0) = 0.11;
  e(1, 1) = std::sqrt(1.0 - 0.11 * 0.11);
  const auto r = coherence_report(e, 0.5);
  EXPECT_NEAR(r.mu, 0.11, 1e-15);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.between_variants);
  e(1, 0) = 0.05;
  e(1, 1) = std::sqrt(1.0 - 0.05 * 0.05);
  EXPECT_FALSE(coherence_report(e, 0.5).between_variants);
  e(1, 0) = 0.5;
  e(1, 1) = std::sqrt(0.75);
  const auto fail = coherence_report(e, 0.5);
  EXPECT_FALSE(fail.pass);
  EXPECT_FALSE(fail.between_variants);
}

// Dominant eigenpair of a PSD matrix by power iteration; returns the
// Rayleigh quotient once the residual is below tol.
double power_iteration(const MatrixXd &a, std::uint64_t seed, double tol = 1e-11) {
  Rng rng(seed);
  VectorXd v(a.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = rng.uniform(-1.0, 1.0);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 2'000'000; ++it) {
    const VectorXd w = a * v;
    lambda = v.dot(w);
    if ((w - lambda * v).norm() < tol * std::max(1.0, std::abs(lambda)))
      break;
    v = w.normalized();
  }
  return lambda;
}

TEST(Jacobi, MatchesPowerIteration) {
  for (std::uint64_t s = 0; s < 12; ++s) {
    const int n = 2 + static_cast<int>(s * 5 % 40);
    const MatrixXd x = gaussian(n, n + 3, 100 + s).rowwise().normalized();
    const MatrixXd g = x * x.transpose();
    const auto eig = jacobi_eigen(g);
    const double top = power_iteration(g, s);
    // Shifted: the dominant eigenvalue of shift*I - G is shift - lambda_min.
    const double shift = top * 1.05;
    const double bottom = shift - power_iteration(shift * MatrixXd::Identity(n, n) - g, s + 7);
    EXPECT_NEAR(eig.values[n - 1], top, 1e-8) << "n=" << n;
    EXPECT_NEAR(eig.values[0], bottom, 1e-8) << "n=" << n;

    const VectorXd ref = Eigen::SelfAdjointEigenSolver<MatrixXd>(g).eigenvalues();
    EXPECT_LT((eig.values - ref).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((g * eig.vectors - eig.vectors * eig.values.asDiagonal()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((eig.vectors.transpose() * eig.vectors - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(),
              1e-12);
    EXPECT_TRUE(std::is_sorted(eig.values.begin(), eig.values.end()));
  }
}

TEST(Jacobi, Errors) {
  EXPECT_EQ(code_of([] { jacobi_eigen(MatrixXd::Zero(3, 4)); }), Errc::kShapeMismatch);
  EXPECT_EQ(code_of([] { jacobi_eigen(MatrixXd::Identity(65, 65)); }), Errc::kBatchTooLarge);
  const auto diag = jacobi_eigen(VectorXd::LinSpaced(5, 3.0, -1.0).asDiagonal().toDenseMatrix());
  EXPECT_EQ(diag.sweeps, 0);
  EXPECT_EQ(diag.values[0], -1.0);
  EXPECT_EQ(diag.values[4], 3.0);
}

TEST(Gershgorin, OrthonormalBatch) {
  const MatrixXd e = 3.0 * MatrixXd::Identity(8, 12);
  const std::vector<int> batch { 0, 2, 5, 7 };
  const auto r = gershgorin_check(e, batch);
  EXPECT_EQ(r.n, 4);
  EXPECT_EQ(r.mu, 0.0);
  EXPECT_EQ(r.lower, 1.0);
  EXPECT_EQ(r.upper, 1.0);
  for (const double v: r.eigenvalues)
    EXPECT_EQ(v, 1.0);
  EXPECT_EQ(r.condition, 1.0);
  EXPECT_TRUE(r.condition_bound_defined);
  EXPECT_EQ(r.condition_bound, 1.0);
  EXPECT_TRUE(r.within_interval);
  EXPECT_TRUE(r.condition_within_bound);
}

TEST(Gershgorin, RandomBatchesProperty) {
  const MatrixXd sha = seq::sha_fixed_embedding(200, 128, 10);
  const MatrixXd rnd = seq::random_fixed_embedding(200, 118, 128, 11);
  const MatrixXd wide = gaussian(64, 4096, 12);
  Rng rng(derive_seed(0, "test.gershgorin"));
  int checked = 0, bounded = 0;
  for (int b = 0; b < 1200; ++b) {
    const MatrixXd &e = b % 3 == 0 ? sha : b % 3 == 1 ? rnd : wide;
    std::vector<int> ids(static_cast<std::size_t>(e.rows()));
    std::iota(ids.begin(), ids.end(), 0);
    rng.shuffle(std::span<int>(ids));
    const int n = b % 3 == 2 ? 2 + static_cast<int>(rng.below(8)) : 2 + static_cast<int>(rng.below(63));
    const auto r = gershgorin_check(e, std::span<const int>(ids.data(), n));
    ASSERT_GE(r.lambda_min, r.lower) << "batch " << b;
    ASSERT_LE(r.lambda_max, r.upper) << "batch " << b;
    EXPECT_TRUE(r.within_interval);
    EXPECT_GE(r.mu, 0.0);
    EXPECT_LE(r.mu, 1.0);
    if (r.condition_bound_defined) {
      ++bounded;
      EXPECT_LE(r.condition, r.condition_bound);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 1200);
  EXPECT_GT(bounded, 100);
}

TEST(Gershgorin, Errors) {
  const MatrixXd e = gaussian(80, 10, 4);
  std::vector<int> big(65);
  std::iota(big.begin(), big.end(), 0);
  EXPECT_EQ(code_of([&] { gershgorin_check(e, big); }), Errc::kBatchTooLarge);
  EXPECT_EQ(code_of([&] { gershgorin_check(e, std::vector<int> { 3 }); }), Errc::kDegenerateBatch);
  EXPECT_EQ(code_of([&] { gershgorin_check(e, std::vector<int> { 3, 4, 3 }); }), Errc::kDegenerateBatch);
  EXPECT_EQ(code_of([&] { gershgorin_check(e, std::vector<int> { 3, 80 }); }), Errc::kDegenerateBatch);
  EXPECT_EQ(code_of([&] { gershgorin_check(e, std::vector<int> { -1, 2 }); }), Errc::kDegenerateBatch);
  MatrixXd z = e;
  z.row(5).setZero();
  EXPECT_EQ(code_of([&] { gershgorin_check(z, std::vector<int> { 4, 5 }); }), Errc::kZeroRow);
}

Big big_rademacher(const BoundInputs &in) {
  return Big(in.L_f) * Big(in.L_l) / sqrt(Big(in.n)) *
         (sqrt(Big(in.V) * Big(in.d_t) + Big(in.D)) + Big(in.B_t) * sqrt(Big(in.V)) + Big(in.B_theta));
}

TEST(Bounds, SpotValueHighPrecision) {
  BoundInputs in;
  in.n = 303;
  in.V = 41;
  in.d_t = 10;
  in.D = 1e5;
  in.B_t = 1;
  in.B_theta = 10;
  const Big want = big_rademacher(in);
  EXPECT_NEAR(rademacher_bound(in), static_cast<double>(want), 1e-13);
  const Big gen = Big(2) * want + sqrt(log(Big(2) / Big(in.delta)) / (Big(2) * Big(in.n)));
  EXPECT_NEAR(generalization_bound(in), static_cast<double>(gen), 1e-13);
  EXPECT_EQ(generalization_bound(in), 2.0 * rademacher_bound(in) + confidence_term(in));
}

TEST(Bounds, Scaling) {
  BoundInputs in;
  const double base = rademacher_bound(in);
  BoundInputs q = in;
  q.n *= 4;
  EXPECT_NEAR(rademacher_bound(q), base / 2.0, 1e-14 * base);
  BoundInputs z = in;
  z.d_t = 0;
  z.B_t = 0;
  z.B_theta = 0;
  EXPECT_NEAR(rademacher_bound(z), std::sqrt(z.D) / std::sqrt(z.n), 1e-14);
  BoundInputs near_one = in;
  near_one.delta = 1.0 - 1e-15;
  EXPECT_NEAR(confidence_term(near_one), std::sqrt(std::log(2.0) / (2.0 * in.n)), 1e-14);
  double prev = generalization_bound(in);
  for (double n = in.n * 2; n < 1e7; n *= 2) {
    BoundInputs m = in;
    m.n = n;
    const double g = generalization_bound(m);
    EXPECT_LT(g, prev);
    prev = g;
  }
}

TEST(Bounds, Errors) {
  const auto bad = [](auto mutate) {
    BoundInputs in;
    mutate(in);
    EXPECT_EQ(code_of([&] { rademacher_bound(in); }), Errc::kBadInputs);
    EXPECT_EQ(code_of([&] { generalization_bound(in); }), Errc::kBadInputs);
  };
  bad([](BoundInputs &in) { in.n = 0; });
  bad([](BoundInputs &in) { in.V = -1; });
  bad([](BoundInputs &in) { in.D = 0; });
  bad([](BoundInputs &in) { in.delta = 1.0; });
  bad([](BoundInputs &in) { in.delta = 0.0; });
  bad([](BoundInputs &in) { in.epsilon = 1.5; });
  bad([](BoundInputs &in) { in.B_t = -0.5; });
  bad([](BoundInputs &in) { in.L_f = 0; });
  bad([](BoundInputs &in) { in.D = std::nan(""); });
  bad([](BoundInputs &in) { in.n = INFINITY; });
}

// |x - P x|^2 with P projecting onto span{[0 | E_f[j]]}, solved through
// the normal equations, or the pseudo-inverse when E_f E_f^T is singular.
std::vector<double> least_squares_residuals(const MatrixXd &e_t, const MatrixXd &e_f) {
  const MatrixXd a = e_f.transpose();  // d_f x V, columns span the block
  std::vector<double> out;
  for (Eigen::Index i = 0; i < e_f.rows(); ++i) {
    const VectorXd b = e_f.row(i).transpose();
    VectorXd c;
    if (e_f.rows() <= e_f.cols())
      c = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    else
      c = a.completeOrthogonalDecomposition().solve(b);
    const VectorXd fixed_part = b - a * c;
    out.push_back(e_t.row(i).squaredNorm() + fixed_part.squaredNorm());
  }
  return out;
}

TEST(Residual, LeastSquaresOracle) {
  for (const auto [V, d_t, d_f]: { std::tuple { 10, 4, 30 }, { 30, 3, 30 }, { 41, 10, 118 }, { 50, 5, 20 } }) {
    const MatrixXd e_t = gaussian(V, d_t, V + 1);
    const MatrixXd e_f = gaussian(V, d_f, V + 2);
    const auto r = residual_decomposition(e_t, e_f);
    const auto want = least_squares_residuals(e_t, e_f);
    ASSERT_EQ(r.residual_sq.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_NEAR(r.residual_sq[i], want[i], 1e-10) << "V=" << V << " row " << i;
      EXPECT_NEAR(r.residual_sq[i], e_t.row(static_cast<Eigen::Index>(i)).squaredNorm(), 1e-10);
    }
    EXPECT_EQ(r.span_rank, std::min(V, d_f));
    EXPECT_EQ(r.vacuous, V > d_f);
    EXPECT_TRUE(r.holds);
    if (V > d_f)
      EXPECT_EQ(r.lambda_min, 0.0);
    else
      EXPECT_GT(r.lambda_min, 0.0);
  }
}

TEST(Residual, Examples) {
  const MatrixXd orth = MatrixXd::Identity(6, 9);
  const auto zero = residual_decomposition(MatrixXd::Zero(6, 3), orth);
  for (const double v: zero.residual_sq)
    EXPECT_NEAR(v, 0.0, 1e-28);
  EXPECT_NEAR(zero.lambda_min, 1.0, 1e-14);
  EXPECT_NEAR(zero.bound, 0.0, 1e-14);
  EXPECT_TRUE(zero.holds);

  const MatrixXd e_t = gaussian(6, 3, 9);
  const auto pyth = residual_decomposition(e_t, orth);
  for (Eigen::Index i = 0; i < 6; ++i)
    EXPECT_NEAR(std::sqrt(pyth.residual_sq[i]), e_t.row(i).norm(), 1e-14);
  EXPECT_NEAR(pyth.b_t, e_t.rowwise().norm().maxCoeff(), 1e-15);
  EXPECT_TRUE(pyth.holds);

  const auto sha = residual_decomposition(gaussian(100, 10, 3), seq::sha_fixed_embedding(100, 128, 10));
  EXPECT_TRUE(sha.vacuous);
  EXPECT_EQ(sha.span_rank, 32);
  EXPECT_TRUE(sha.holds);
}

TEST(Residual, Errors) {
  EXPECT_EQ(code_of([] { residual_decomposition(MatrixXd::Zero(3, 2), MatrixXd::Ones(4, 2)); }),
            Errc::kDimensionMismatch);
  EXPECT_EQ(code_of([] { residual_decomposition(MatrixXd::Zero(0, 2), MatrixXd::Ones(0, 2)); }),
            Errc::kDimensionMismatch);
}

TEST(VerifyTheory, Document) {
  TheoryOptions opts;
  opts.batches = 200;
  const auto doc = nlohmann::json::parse(verify_theory_json(opts));
  EXPECT_TRUE(doc["pass"].get<bool>());
  EXPECT_EQ(doc["d_f"].get<int>(), 118);
  EXPECT_EQ(doc["tiling"]["status"].get<std::string>(), "not_applicable");
  EXPECT_EQ(doc["coherence"]["effective_dim"].get<int>(), 32);
  EXPECT_EQ(doc["conditioning"]["interval_violations"].get<int>(), 0);
  EXPECT_TRUE(doc["residual"]["vacuous"].get<bool>());
  EXPECT_EQ(verify_theory_json(opts), verify_theory_json(opts));

  opts.d = 138;
  const auto whole = nlohmann::json::parse(verify_theory_json(opts));
  EXPECT_EQ(whole["tiling"]["status"].get<std::string>(), "pass");
  EXPECT_TRUE(whole["pass"].get<bool>());
}

}  // namespace
}  // namespace hemgen::theory
