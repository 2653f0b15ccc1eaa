//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hemgen/chem/smiles.h"
#include "hemgen/error.h"
#include "hemgen/optim.h"
#include "hemgen/seq/embedding.h"
#include "hemgen/seq/vocabulary.h"
#include "hemgen/sha256.h"
#include "test_util.h"

namespace hemgen::seq {
namespace {

std::vector<unsigned char> openssl_sha256(const std::string &s) {
  std::vector<unsigned char> out(SHA256_DIGEST_LENGTH);
  SHA256(reinterpret_cast<const unsigned char *>(s.data()), s.size(), out.data());
  return out;
}

TEST(Sha256, MatchesOpenSsl) {
  std::mt19937_64 gen(3);
  std::vector<std::string> inputs = { "", "abc", "token(0)", std::string(55, 'a'),
                                      std::string(56, 'a'), std::string(64, 'b'),
                                      std::string(1000, 'z') };
  for (int k = 0; k < 200; ++k) {
    std::string s(gen() % 300, '\0');
    for (auto &c: s)
      c = static_cast<char>(gen());
    inputs.push_back(s);
  }
  for (const auto &s: inputs) {
    const auto ours = sha256(s);
    const auto ref = openssl_sha256(s);
    EXPECT_TRUE(std::equal(ours.begin(), ours.end(), ref.begin())) << s.size();
  }
  EXPECT_EQ(to_hex(sha256("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Sha256, IncrementalEqualsOneShot) {
  const std::string s(777, 'q');
  Sha256 h;
  for (std::size_t i = 0; i < s.size(); i += 13)
    h.update(std::string_view(s).substr(i, 13));
  EXPECT_EQ(h.finish(), sha256(s));
}

TEST(Vocabulary, Reserved) {
  const std::vector<std::string> corpus = { "CCO" };
  const auto v = Vocabulary::from_smiles(corpus);
  EXPECT_EQ(v.size(), 5);
  EXPECT_EQ(v.token(Vocabulary::kPad), "<pad>");
  EXPECT_EQ(v.token(Vocabulary::kBos), "<bos>");
  EXPECT_EQ(v.token(Vocabulary::kEos), "<eos>");
  EXPECT_EQ(v.id("C"), 3);
  EXPECT_EQ(v.id("O"), 4);
}

TEST(Vocabulary, OrderIndependent) {
  std::vector<std::string> a = testing::fixture_smiles();
  std::vector<std::string> b = a;
  std::reverse(b.begin(), b.end());
  EXPECT_EQ(Vocabulary::from_smiles(a), Vocabulary::from_smiles(b));
  EXPECT_EQ(Vocabulary::from_smiles(a).size(), Vocabulary::from_smiles(a).size());
}

TEST(Vocabulary, DenseAndComplete) {
  const auto corpus = testing::fixture_smiles();
  const auto v = Vocabulary::from_smiles(corpus);
  for (int i = 0; i < v.size(); ++i)
    EXPECT_EQ(v.id(v.token(i)), i);
  for (const auto &s: corpus) {
    const TokenSeq t = v.encode(s);
    EXPECT_EQ(v.decode(t.ids), s);
    for (int id: t.ids)
      EXPECT_GE(id, Vocabulary::kReserved);
  }
}

TEST(Vocabulary, Errors) {
  EXPECT_THROW(Vocabulary::build({}), Error);
  const auto v = Vocabulary::from_smiles(std::vector<std::string> { "CC" });
  try {
    v.id("N");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kUnknownToken);
  }
  EXPECT_THROW(v.token(99), Error);
}

TEST(ShaEmbedding, ReferenceRow) {
  const auto e = sha_fixed_embedding(41, 128, 10);
  ASSERT_EQ(e.rows(), 41);
  ASSERT_EQ(e.cols(), 118);
  for (int i: { 0, 1, 40 }) {
    const auto ref = openssl_sha256("token(" + std::to_string(i) + ")");
    for (int j = 0; j < 118; ++j)
      EXPECT_EQ(e(i, j), (static_cast<double>(ref[j % 32]) - 128.0) / 128.0);
  }
}

TEST(ShaEmbedding, BoundsAndTiling) {
  for (auto [V, d, d_t]: { std::tuple { 5, 40, 8 }, { 41, 128, 10 }, { 100, 64, 0 } }) {
    const auto e = sha_fixed_embedding(V, d, d_t);
    EXPECT_LE(e.maxCoeff(), 1.0);
    EXPECT_GE(e.minCoeff(), -1.0);
  }
  const auto e = sha_fixed_embedding(30, 64, 0);
  EXPECT_TRUE((e.leftCols(32).array() == e.rightCols(32).array()).all());
  // A bound of +-1 is reachable only through bytes 0 (-> -1); 255 maps to
  // 127/128 < 1.
  const auto big = sha_fixed_embedding(2000, 32, 0);
  EXPECT_LT(big.maxCoeff(), 1.0);
  for (int i = 0; i < big.rows(); ++i) {
    const auto ref = openssl_sha256("token(" + std::to_string(i) + ")");
    const bool has_zero = std::count(ref.begin(), ref.end(), 0) > 0;
    EXPECT_EQ((big.row(i).array() == -1.0).any(), has_zero);
  }
}

TEST(ShaEmbedding, Deterministic) {
  const auto a = sha_fixed_embedding(41, 128, 10);
  const auto b = sha_fixed_embedding(41, 128, 10);
  EXPECT_EQ(matrix_checksum(a), matrix_checksum(b));
  EXPECT_TRUE((a.array() == b.array()).all());
}

TEST(ShaEmbedding, Options) {
  const auto unit = sha_fixed_embedding(10, 50, 0, true);
  for (int i = 0; i < 10; ++i)
    EXPECT_NEAR(unit.row(i).norm(), 1.0, 1e-14);
  const auto vocab = Vocabulary::from_smiles(std::vector<std::string> { "CCO" });
  const auto text = sha_text_embedding(vocab, 32);
  const auto ref = openssl_sha256("C");
  for (int j = 0; j < 32; ++j)
    EXPECT_EQ(text(3, j), (ref[j] - 128.0) / 128.0);
}

TEST(ShaEmbedding, BadDimensions) {
  EXPECT_THROW(sha_fixed_embedding(5, 10, 10), Error);
  EXPECT_THROW(sha_fixed_embedding(5, 10, 11), Error);
  EXPECT_THROW(sha_fixed_embedding(0, 10, 2), Error);
  EXPECT_THROW(random_fixed_embedding(5, 0, 3, 1), Error);
  EXPECT_THROW(random_fixed_embedding(5, 3, 0, 1), Error);
}

TEST(RandomEmbedding, SupportAndSeed) {
  const int fan_in = 24;
  const double bound = std::sqrt(6.0 / fan_in);
  const auto a = random_fixed_embedding(50, 24, fan_in, 9);
  EXPECT_LE(a.cwiseAbs().maxCoeff(), bound);
  EXPECT_TRUE((a.array() == random_fixed_embedding(50, 24, fan_in, 9).array()).all());
  EXPECT_FALSE((a.array() == random_fixed_embedding(50, 24, fan_in, 10).array()).all());
}

TEST(RandomEmbedding, MomentOracle) {
  // Uniform on [-b, b]: mean 0, variance b^2 / 3.
  const int fan_in = 100;
  const double b = std::sqrt(6.0 / fan_in);
  const auto e = random_fixed_embedding(1000, 100, fan_in, 1234);
  const double n = static_cast<double>(e.size());
  const double mean = e.mean();
  const double sigma = b / std::sqrt(3.0);
  EXPECT_LE(std::abs(mean), 3.0 * sigma / std::sqrt(n));
  const double var = (e.array() - mean).square().sum() / (n - 1);
  EXPECT_NEAR(var, sigma * sigma, 0.02 * sigma * sigma);
}

HybridEmbedding make_hybrid(int V, int d_t, int d_f) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Random(V, d_t);
  Eigen::MatrixXd f = d_f > 0 ? sha_fixed_embedding(V, d_t + d_f, d_t)
                              : Eigen::MatrixXd(V, 0);
  return HybridEmbedding(EmbeddingMode::kShaFixed, t, f);
}

TEST(HybridEmbedding, Lookup) {
  const auto emb = make_hybrid(6, 3, 5);
  const std::vector<int> ids = { 4, 4, 1 };
  const auto rows = emb.lookup(ids);
  ASSERT_EQ(rows.rows(), 3);
  ASSERT_EQ(rows.cols(), 8);
  EXPECT_TRUE((rows.row(0).array() == rows.row(1).array()).all());
  EXPECT_TRUE((rows.row(2).head(3).array() == emb.trainable().row(1).array()).all());
  EXPECT_TRUE((rows.row(2).tail(5).array() == emb.fixed().row(1).array()).all());
  const std::vector<int> bad = { 6 };
  try {
    emb.lookup(bad);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), Errc::kIndexOutOfVocabulary);
  }
}

TEST(HybridEmbedding, ModeReduction) {
  // d_f = 0 reduces to the fully trainable table; d_t = 0 to the fixed one.
  const auto only_t = make_hybrid(6, 4, 0);
  const std::vector<int> ids = { 0, 3, 5 };
  const auto rows = only_t.lookup(ids);
  for (int j = 0; j < 3; ++j)
    EXPECT_TRUE((rows.row(j).array() == only_t.trainable().row(ids[j]).array()).all());
  HybridEmbedding only_f(EmbeddingMode::kShaFixed, Eigen::MatrixXd(6, 0),
                         sha_fixed_embedding(6, 7, 0));
  const auto frows = only_f.lookup(ids);
  for (int j = 0; j < 3; ++j)
    EXPECT_TRUE((frows.row(j).array() == only_f.fixed().row(ids[j]).array()).all());
}

TEST(HybridEmbedding, GradientMasking) {
  auto emb = make_hybrid(6, 3, 5);
  const auto t0 = emb.trainable();
  const auto sum0 = emb.fixed_checksum();
  auto sgd = [](Eigen::MatrixXd &p, const Eigen::MatrixXd &g) { p -= 0.1 * g; };

  emb.apply_gradient(Eigen::MatrixXd::Zero(6, 8), sgd);
  EXPECT_TRUE((emb.trainable().array() == t0.array()).all());

  emb.apply_gradient(Eigen::MatrixXd::Ones(6, 8), sgd);
  EXPECT_EQ(emb.fixed_checksum(), sum0);
  EXPECT_TRUE((emb.trainable().array() != t0.array()).all());

  EXPECT_THROW(emb.apply_gradient(Eigen::MatrixXd::Ones(6, 7), sgd), Error);
}

TEST(HybridEmbedding, FixedBlockSurvivesAdam) {
  auto emb = make_hybrid(8, 4, 12);
  const auto sum0 = emb.fixed_checksum();
  AdamState state;
  AdamConfig cfg;
  cfg.lr = 0.01;
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 100; ++k) {
    Eigen::MatrixXd g(8, 16);
    for (Eigen::Index i = 0; i < g.size(); ++i)
      g.data()[i] = nd(gen);
    apply_embedding_gradient(emb, g, [&](Eigen::MatrixXd &p, const Eigen::MatrixXd &gt) {
      Eigen::MatrixXd *ptr = &p;
      adam_step(std::span(&ptr, 1), std::span(&gt, 1), state, cfg);
    });
    EXPECT_EQ(emb.fixed_checksum(), sum0);
  }
  EXPECT_EQ(state.step, 100);
}

}  // namespace
}  // namespace hemgen::seq
