#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gdvalign/embedding.h"
#include "gdvalign/errors.h"
#include "gdvalign/generators.h"
#include "gdvalign/graphlets.h"

namespace gdvalign {
namespace {

FeatureMatrix features(std::initializer_list<std::initializer_list<double>> rows) {
  FeatureMatrix f;
  f.rows.resize(Eigen::Index(rows.size()), Eigen::Index(rows.begin()->size()));
  Eigen::Index i = 0;
  for (auto row : rows) {
    Eigen::Index j = 0;
    for (double v : row) f.rows(i, j++) = v;
    ++i;
  }
  return f;
}

GdvMatrix random_gdvs(std::size_t n, std::uint64_t seed, std::uint64_t max = 50) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> d(0, max);
  GdvMatrix out(n);
  for (auto &row : out)
    for (auto &c : row) c = d(rng);
  return out;
}

TEST(Pca, RankTwoAffineDataNeedsTwoComponents) {
  // Rows = base + a*d1 + b*d2 with integer coefficients.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coef(0, 9);
  Gdv base{}, d1{}, d2{};
  for (std::size_t k = 0; k < kNumOrbits; ++k) {
    base[k] = 100 + k;
    d1[k] = k % 3;
    d2[k] = (k * 7) % 5;
  }
  auto make = [&](std::size_t n) {
    GdvMatrix m(n);
    for (auto &row : m) {
      int a = coef(rng), b = coef(rng);
      for (std::size_t k = 0; k < kNumOrbits; ++k) row[k] = base[k] + a * d1[k] + b * d2[k];
    }
    return m;
  };
  PcaResult r = pca_reduce(make(30), make(25));
  EXPECT_EQ(r.components, 2);
  EXPECT_NEAR(r.explained_variance, 1.0, 1e-9);
  EXPECT_EQ(r.first.rows.rows(), 30);
  EXPECT_EQ(r.second.rows.rows(), 25);
  EXPECT_EQ(r.first.dim(), 2);
}

TEST(Pca, IsotropicDataNeedsFourteenComponents) {
  // +/- unit steps along every axis give equal variance in all 15 directions.
  GdvMatrix a, b;
  for (std::size_t k = 0; k < kNumOrbits; ++k) {
    Gdv up{}, down{};
    up.fill(10);
    down.fill(10);
    up[k] = 11;
    down[k] = 9;
    a.push_back(up);
    b.push_back(down);
  }
  PcaResult r = pca_reduce(a, b);
  EXPECT_EQ(r.components, 14);
  EXPECT_NEAR(r.explained_variance, 14.0 / 15.0, 1e-9);
  for (double ev : r.eigenvalues) EXPECT_NEAR(ev, r.eigenvalues.front(), 1e-9);
}

TEST(Pca, FullRankPreservesPairwiseDistances) {
  GdvMatrix a = random_gdvs(20, 1), b = random_gdvs(20, 2);
  PcaResult r = pca_reduce(a, b, PcaOptions{1.0, 15, false});
  ASSERT_EQ(r.components, 15);
  auto raw = [&](std::size_t i) -> const Gdv & { return i < 20 ? a[i] : b[i - 20]; };
  auto proj = [&](std::size_t i) -> Eigen::VectorXd {
    return i < 20 ? Eigen::VectorXd(r.first.rows.row(Eigen::Index(i)))
                  : Eigen::VectorXd(r.second.rows.row(Eigen::Index(i - 20)));
  };
  for (std::size_t i = 0; i < 40; i += 3)
    for (std::size_t j = i + 1; j < 40; j += 5) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < kNumOrbits; ++k) {
        double diff = double(raw(i)[k]) - double(raw(j)[k]);
        d2 += diff * diff;
      }
      EXPECT_NEAR((proj(i) - proj(j)).norm(), std::sqrt(d2), 1e-8);
    }
}

TEST(Pca, KeepsAtLeastMinComponents) {
  // Nearly one-dimensional data still yields two components.
  GdvMatrix a;
  for (std::uint64_t i = 0; i < 30; ++i) {
    Gdv row{};
    row[0] = i * 100;
    row[1] = i % 2;
    a.push_back(row);
  }
  PcaResult r = pca_reduce(a, a);
  EXPECT_EQ(r.components, 2);
}

TEST(Pca, ExplainedVarianceMatchesReconstructionError) {
  Graph g = generate_geo(1000, 6000, 4);
  NoisePair p = rewire(g, 10, 8);
  GdvMatrix a = count_orbits(p.original), b = count_orbits(p.noisy);
  PcaResult r = pca_reduce(a, b);
  EXPECT_GE(r.components, 2);
  EXPECT_GE(r.explained_variance, 0.90);

  // Independent check: reconstruction residual from a direct Eigen SVD.
  Eigen::MatrixXd x(2000, 15);
  for (Eigen::Index i = 0; i < 2000; ++i)
    for (Eigen::Index k = 0; k < 15; ++k)
      x(i, k) = double(i < 1000 ? a[std::size_t(i)][std::size_t(k)]
                                : b[std::size_t(i - 1000)][std::size_t(k)]);
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  Eigen::MatrixXd v = svd.matrixV().leftCols(r.components);
  double residual = (x - x * v * v.transpose()).squaredNorm();
  double total = x.squaredNorm();
  EXPECT_LE(residual / total, 0.10 + 1e-9);
  EXPECT_NEAR(1.0 - residual / total, r.explained_variance, 1e-9);
}

TEST(Pca, DegenerateAndInvalidInputs) {
  GdvMatrix same(5, Gdv{});
  for (auto &row : same) row[0] = 3;
  EXPECT_THROW(pca_reduce(same, same), DegenerateInputError);
  EXPECT_THROW(pca_reduce(random_gdvs(1, 1), random_gdvs(1, 2)), ParameterError);
  EXPECT_THROW(pca_reduce(random_gdvs(5, 1), random_gdvs(5, 2), PcaOptions{1.5, 2, false}),
               ParameterError);
  EXPECT_THROW(pca_reduce(random_gdvs(5, 1), random_gdvs(5, 2), PcaOptions{0.9, 0, false}),
               ParameterError);
}

TEST(Cosine, HandValues) {
  FeatureMatrix f1 = features({{1, 2}, {1, 0}, {3, -1}});
  FeatureMatrix f2 = features({{1, 2}, {0, 1}, {-3, 1}});
  SimilarityMatrix s = cosine_similarity_matrix(f1, f2);
  EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s(1, 1), 0.5);
  EXPECT_NEAR(s(2, 2), 0.0, 1e-15);
}

TEST(Cosine, ZeroVectorIsNeutral) {
  FeatureMatrix f1 = features({{0, 0}, {1, 1}});
  FeatureMatrix f2 = features({{4, -2}, {0, 0}});
  SimilarityMatrix s = cosine_similarity_matrix(f1, f2);
  EXPECT_DOUBLE_EQ(s(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(s(1, 1), 0.5);
}

TEST(Cosine, DimensionMismatch) {
  EXPECT_THROW(cosine_similarity_matrix(features({{1, 2}}), features({{1, 2, 3}})),
               ParameterError);
}

TEST(Cosine, ScaleInvariantSymmetricAndBounded) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> d(0.0, 5.0);
  FeatureMatrix f;
  f.rows.resize(12, 4);
  for (Eigen::Index i = 0; i < 12; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) f.rows(i, j) = d(rng);
  SimilarityMatrix s = cosine_similarity_matrix(f, f);
  FeatureMatrix scaled = f;
  scaled.rows.row(3) *= 17.5;
  scaled.rows.row(7) *= 0.001;
  SimilarityMatrix t = cosine_similarity_matrix(scaled, f);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_NEAR(s(i, i), 1.0, 1e-12);
    for (std::size_t j = 0; j < 12; ++j) {
      EXPECT_DOUBLE_EQ(s(i, j), s(j, i));
      EXPECT_NEAR(t(i, j), s(i, j), 1e-12);
      EXPECT_GE(s(i, j), 0.0);
      EXPECT_LE(s(i, j), 1.0);
    }
  }
}

TEST(SimilarityFile, ReadsWithFixedLabelsAndDefaultsMissingToZero) {
  std::vector<std::string> rows{"a"}, cols{"x", "y"};
  SimilarityMatrix s = read_similarity("a x 1.0\na y 0.25\n", &rows, &cols);
  ASSERT_EQ(s.rows(), 1u);
  ASSERT_EQ(s.cols(), 2u);
  EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.25);
  SimilarityMatrix partial = read_similarity("a y 0.5\n", &rows, &cols);
  EXPECT_DOUBLE_EQ(partial(0, 0), 0.0);
}

TEST(SimilarityFile, WriteReadRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<std::string> labels;
  for (int i = 0; i < 10; ++i) labels.push_back("n" + std::to_string(i));
  SimilarityMatrix s(labels, labels);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) s(i, j) = d(rng);
  std::ostringstream out;
  write_similarity(s, out);
  std::istringstream in(out.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string f;
    int count = 0;
    while (fields >> f) ++count;
    EXPECT_EQ(count, 3);
    ++lines;
  }
  EXPECT_EQ(lines, 100u);
  EXPECT_EQ(read_similarity(out.str(), &labels, &labels), s);
  EXPECT_EQ(read_similarity(out.str()), s);
}

TEST(SimilarityFile, RejectsBadValuesWithLineNumber) {
  try {
    read_similarity("a x 0.5\na y 1.5\n");
    FAIL() << "expected FormatError";
  } catch (const FormatError &e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(read_similarity("a x -0.1\n"), FormatError);
  EXPECT_THROW(read_similarity("a x nope\n"), FormatError);
  EXPECT_THROW(read_similarity("a x\n"), FormatError);
  std::vector<std::string> rows{"a"}, cols{"x"};
  EXPECT_THROW(read_similarity("b x 0.5\n", &rows, &cols), FormatError);
}

TEST(GraphletSimilarity, IdenticalNetworksScoreOneOnDiagonal) {
  Graph g = generate_sf(200, 800, 2);
  LabeledGdv a{g.labels(), count_orbits(g)};
  PcaResult pca;
  SimilarityMatrix s = graphlet_similarity(a, a, {}, &pca);
  EXPECT_GE(pca.components, 2);
  for (std::size_t u = 0; u < g.num_nodes(); ++u) {
    // A node sitting exactly on the joint mean has a zero projection.
    EXPECT_TRUE(std::abs(s(u, u) - 1.0) < 1e-9 || std::abs(s(u, u) - 0.5) < 1e-12);
  }
  EXPECT_EQ(s.row_labels(), g.labels());
}

}  // namespace
}  // namespace gdvalign
