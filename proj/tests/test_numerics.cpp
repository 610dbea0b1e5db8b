#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "esakit/errors.hpp"
#include "esakit/numerics.hpp"

using namespace esakit;

namespace {

// Two-pass population standard deviation in long double; independent of the
// library's implementation.
double two_pass_std(const std::vector<double>& xs) {
  long double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  long double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return static_cast<double>(std::sqrt(ss / xs.size()));
}

ProbColumn random_distribution(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  double total = 0;
  for (auto& x : w) total += (x = e(rng));
  for (auto& x : w) x /= total;
  return ProbColumn(w);
}

}  // namespace

TEST(CompensatedSum, RecoversSmallTermsLostByNaiveSummation) {
  std::vector<double> xs{1e16, 1.0, -1e16};
  EXPECT_EQ(compensated_sum(xs), 1.0);
}

TEST(ColumnSoftmax, SymmetricColumnIsUniform) {
  const auto logits = LogitMatrix::from_rows({{0.0}, {0.0}});
  const auto c = column_softmax(logits, 0);
  EXPECT_DOUBLE_EQ(c[0], 0.5);
  EXPECT_DOUBLE_EQ(c[1], 0.5);
}

TEST(ColumnSoftmax, LogThreeGivesQuarterAndThreeQuarters) {
  const auto logits = LogitMatrix::from_rows({{0.0}, {std::log(3.0)}});
  const auto c = column_softmax(logits, 0);
  const long double e = std::exp(std::log(3.0L));
  EXPECT_NEAR(c[0], static_cast<double>(1 / (1 + e)), 1e-15);
  EXPECT_NEAR(c[1], static_cast<double>(e / (1 + e)), 1e-15);
  EXPECT_NEAR(c[0], 0.25, 1e-15);
}

TEST(ColumnSoftmax, ShiftInvariance) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 3);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::vector<double>> rows(6, std::vector<double>(3));
    for (auto& r : rows)
      for (auto& x : r) x = n(rng);
    const double c = n(rng) * 100;
    auto shifted = rows;
    for (auto& r : shifted)
      for (auto& x : r) x += c;
    const auto a = LogitMatrix::from_rows(rows);
    const auto b = LogitMatrix::from_rows(shifted);
    for (std::size_t j = 0; j < 3; ++j) {
      const auto pa = column_softmax(a, j);
      const auto pb = column_softmax(b, j);
      for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(pa[i], pb[i], 1e-12);
    }
  }
}

TEST(ColumnSoftmax, NormalizedAndStrictlyPositive) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0, 20);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::vector<double>> rows(9, std::vector<double>(1));
    for (auto& r : rows) r[0] = n(rng);
    const auto c = column_softmax(LogitMatrix::from_rows(rows), 0);
    long double total = 0;
    for (double x : c) {
      EXPECT_GT(x, 0.0);
      total += x;
    }
    EXPECT_NEAR(static_cast<double>(total), 1.0, 1e-12);
  }
}

TEST(ColumnSoftmax, ColumnOutOfRangeIsRangeError) {
  const auto logits = LogitMatrix::from_rows({{0.0, 1.0}});
  EXPECT_THROW(column_softmax(logits, 2), RangeError);
}

TEST(LogitMatrix, RejectsNonFiniteEntries) {
  EXPECT_THROW(LogitMatrix::from_rows({{0.0, INFINITY}}), DomainError);
  EXPECT_THROW(LogitMatrix::from_rows({{NAN}}), DomainError);
}

TEST(ProbColumn, RejectsInvalidMass) {
  EXPECT_THROW(ProbColumn({0.5, 0.6}), DomainError);
  EXPECT_THROW(ProbColumn({-0.1, 1.1}), DomainError);
  EXPECT_NO_THROW(ProbColumn({0.25, 0.75}));
}

TEST(PopulationStd, Examples) {
  EXPECT_EQ(population_std(std::vector<double>{5, 5, 5}), 0.0);
  EXPECT_NEAR(population_std(std::vector<double>{0, 2}), two_pass_std({0, 2}), 1e-15);
  EXPECT_NEAR(population_std(std::vector<double>{0, 2}), 1.0, 1e-15);
  EXPECT_NEAR(population_std(std::vector<double>{-1, 0, 1}), two_pass_std({-1, 0, 1}), 1e-15);
  EXPECT_NEAR(population_std(std::vector<double>{-1, 0, 1}), std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(PopulationStd, EmptyInputIsDomainError) {
  EXPECT_THROW(population_std(std::vector<double>{}), DomainError);
}

TEST(PopulationStd, TranslationInvariantAndHomogeneous) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(12);
    for (auto& v : x) v = n(rng);
    const double c = n(rng) * 5;
    const double a = n(rng) * 3;
    auto shifted = x;
    auto scaled = x;
    for (auto& v : shifted) v += c;
    for (auto& v : scaled) v *= a;
    const double s = population_std(x);
    EXPECT_NEAR(population_std(shifted), s, 1e-12);
    EXPECT_NEAR(population_std(scaled), std::abs(a) * s, 1e-12);
  }
}

TEST(KlDivergence, SelfDivergenceIsZero) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_distribution(rng, 7);
    const auto d = kl_divergence(p, p);
    ASSERT_FALSE(d.is_infinite());
    EXPECT_NEAR(d.value(), 0.0, 1e-15);
  }
}

TEST(KlDivergence, PointMassAgainstUniformIsLogTwo) {
  const auto d = kl_divergence(ProbColumn({1.0, 0.0}), ProbColumn({0.5, 0.5}));
  ASSERT_FALSE(d.is_infinite());
  EXPECT_NEAR(d.value(), std::numbers::ln2, 1e-15);
}

TEST(KlDivergence, MissingSupportIsInfinitySentinel) {
  const auto d = kl_divergence(ProbColumn({0.5, 0.5}), ProbColumn({1.0, 0.0}));
  EXPECT_TRUE(d.is_infinite());
  EXPECT_TRUE(std::isinf(d.value()));
}

TEST(KlDivergence, LengthMismatchIsShapeError) {
  EXPECT_THROW(kl_divergence(ProbColumn({1.0}), ProbColumn({0.5, 0.5})), ShapeError);
}

TEST(KlDivergence, GibbsInequality) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 500; ++t) {
    const auto p = random_distribution(rng, 5);
    const auto q = random_distribution(rng, 5);
    const auto d = kl_divergence(p, q);
    ASSERT_FALSE(d.is_infinite());
    EXPECT_GE(d.value(), 0.0);
    EXPECT_GT(d.value(), 0.0);  // random p != q
  }
}
