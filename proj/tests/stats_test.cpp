#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <random>

#include "cognatree/stats.hpp"

using namespace cognatree;

TEST(Summary, OddAndEvenCounts) {
  const std::vector<double> odd{3.0, 1.0, 2.0};
  auto s = summarize(odd);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.median, 2.0);
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 3.0);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(2.0 / 3.0));
  EXPECT_EQ(s.count, 3u);

  const std::vector<double> even{4.0, 1.0, 3.0, 2.0};
  s = summarize(even, StdConvention::sample);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(5.0 / 3.0));
}

TEST(Summary, SingleValueAndEmpty) {
  const std::vector<double> one{0.25};
  const auto s = summarize(one, StdConvention::sample);
  EXPECT_EQ(s.std, 0.0);
  EXPECT_EQ(s.median, 0.25);
  EXPECT_THROW(summarize(std::vector<double>{}), DataError);
}

TEST(Summary, PermutationInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(1 + i * 3);
    for (auto& x : v) x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 12) - 6);
    const auto a = summarize(v);
    std::shuffle(v.begin(), v.end(), rng);
    const auto b = summarize(v);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.median, b.median);
    EXPECT_EQ(a.std, b.std);
  }
}

TEST(Summary, ExactSumCancellation) {
  const std::vector<double> v{1e100, 1.0, -1e100, 1e-3};
  EXPECT_DOUBLE_EQ(exact_sum(v), 1.001);
  const std::vector<double> tenths(10, 0.1);
  EXPECT_EQ(exact_sum(tenths), 1.0);
}

TEST(TDistribution, MatchesBoostMath) {
  for (double df : {3.0, 4.0, 7.0, 10.0, 25.0, 42.0, 100.0, 250.0, 500.0}) {
    const boost::math::students_t dist(df);
    for (double t : {0.0, 0.1, 0.5, 1.0, 1.96, 2.5, 3.0, 4.5, 8.0}) {
      const double expected = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
      EXPECT_NEAR(student_t_two_sided(t, df), expected, 1e-6) << "df=" << df << " t=" << t;
      EXPECT_NEAR(student_t_two_sided(-t, df), expected, 1e-6);
    }
  }
}

TEST(Pearson, KnownPValues) {
  // Reference values from a standard statistics package.
  EXPECT_NEAR(pearson_p_value(0.45, 44), 0.002178, 5e-6);
  EXPECT_NEAR(pearson_p_value(0.43, 44), 0.003577, 5e-6);
  EXPECT_NEAR(pearson_p_value(0.0, 10), 1.0, 1e-12);
  EXPECT_EQ(pearson_p_value(1.0, 10), 0.0);
  EXPECT_THROW(pearson_p_value(0.5, 2), DataError);
}

TEST(Pearson, PerfectAndErrors) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{2, 4, 6, 8};
  const std::vector<double> z{8, 6, 4, 2};
  EXPECT_DOUBLE_EQ(pearson(x, y).r, 1.0);
  EXPECT_DOUBLE_EQ(pearson(x, z).r, -1.0);
  const std::vector<double> flat{1, 1, 1, 1};
  EXPECT_THROW(pearson(x, flat), DataError);
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), DataError);
  EXPECT_THROW(pearson(std::vector<double>{1, 2}, std::vector<double>{2, 1}), DataError);
}

TEST(Pearson, AffineInvarianceAndSymmetry) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x(10 + i), y(10 + i);
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = n(rng);
      y[k] = 0.5 * x[k] + n(rng);
    }
    const double r = pearson_r(x, y);
    EXPECT_NEAR(pearson_r(y, x), r, 1e-12);
    const double a = 0.1 + std::fabs(n(rng)) * 10.0;
    const double b = n(rng) * 100.0;
    std::vector<double> xt(x.size()), xn(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      xt[k] = a * x[k] + b;
      xn[k] = -a * x[k] + b;
    }
    EXPECT_NEAR(pearson_r(xt, y), r, 1e-10);
    EXPECT_NEAR(pearson_r(xn, y), -r, 1e-10);
    const auto p = pearson(x, y);
    EXPECT_GE(p.p, 0.0);
    EXPECT_LE(p.p, 1.0);
  }
}

TEST(IncompleteBeta, Symmetry) {
  for (double x : {0.1, 0.3, 0.5, 0.9})
    EXPECT_NEAR(regularized_incomplete_beta(2.5, 4.0, x), 1.0 - regularized_incomplete_beta(4.0, 2.5, 1.0 - x),
                1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(1.0, 1.0, 0.3), 0.3, 1e-14);
  EXPECT_THROW(regularized_incomplete_beta(0.0, 1.0, 0.3), DataError);
  EXPECT_THROW(regularized_incomplete_beta(1.0, 1.0, 1.3), DataError);
}
