#include <gtest/gtest.h>

#include <random>

#include "cognatree/sparse_table.hpp"
#include "cognatree/tree_distance.hpp"
#include "test_util.hpp"

using namespace cognatree;

TEST(SparseTable, MatchesLinearScan) {
  std::mt19937_64 rng(2);
  std::vector<int> v(300);
  for (auto& x : v) x = static_cast<int>(rng() % 50);
  SparseTable<int> table(v);
  for (std::size_t lo = 0; lo < v.size(); lo += 7) {
    for (std::size_t hi = lo; hi < v.size(); hi += 5) {
      const auto it = std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo),
                                       v.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
      EXPECT_EQ(table.arg_min(lo, hi), static_cast<std::size_t>(it - v.begin()));
    }
  }
}

TEST(RfDistance, IdenticalTreesAreZero) {
  const auto t = parse_newick(testutil::balanced16());
  const auto d = rf_distance(t, t);
  EXPECT_EQ(d.numerator, 0u);
  EXPECT_EQ(d.denominator, 26u);
  EXPECT_EQ(d.value, 0.0);
}

TEST(RfDistance, CalibrationPair) {
  const auto t = parse_newick(testutil::balanced16());
  const auto u = parse_newick(testutil::balanced16_swapped());
  const auto oracle = testutil::naive_rf(t, u);
  ASSERT_EQ(oracle, (std::pair<std::uint64_t, std::uint64_t>{4, 26}));
  const auto d = rf_distance(t, u);
  EXPECT_EQ(d.numerator, 4u);
  EXPECT_EQ(d.denominator, 26u);
  EXPECT_NEAR(d.value, 0.15, 0.005);
}

TEST(RfDistance, DisjointFiveLeafCaterpillars) {
  const auto a = parse_newick("((A,B),C,(D,E));");
  const auto b = parse_newick("((A,D),B,(C,E));");
  ASSERT_EQ(testutil::naive_rf(a, b), (std::pair<std::uint64_t, std::uint64_t>{4, 4}));
  const auto d = rf_distance(a, b);
  EXPECT_EQ(d.numerator, 4u);
  EXPECT_EQ(d.denominator, 4u);
  EXPECT_EQ(d.value, 1.0);
}

TEST(RfDistance, Errors) {
  const auto four = parse_newick("((A,B),(C,D));");
  EXPECT_THROW(rf_distance(four, parse_newick("((A,B),(C,E));")), DataError);
  EXPECT_THROW(rf_distance(parse_newick("(A,B,C);"), parse_newick("(A,B,C);")), DataError);
  const auto poly = parse_newick("((A,B),C,D,E);");
  const auto bin = parse_newick("((A,B),C,(D,E));");
  EXPECT_THROW(rf_distance(poly, bin), DataError);
  EXPECT_THROW(rf_distance(bin, poly), DataError);
}

TEST(RfDistance, SymmetricBoundedAndZeroIffEqualSplits) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto names = testutil::labels(4 + i % 20);
    const auto a = testutil::random_binary_tree(names, rng);
    const auto b = testutil::random_binary_tree(names, rng);
    const auto ab = rf_distance(a, b);
    const auto ba = rf_distance(b, a);
    EXPECT_EQ(ab.numerator, ba.numerator);
    EXPECT_LE(ab.value, 1.0);
    EXPECT_EQ(ab.numerator == 0, splits(a).splits == splits(b).splits);
  }
}

TEST(QuartetTopology, Cases) {
  EXPECT_EQ(quartet_topology(parse_newick("((A,B),(C,D));"), {"A", "B", "C", "D"}), QuartetTopology::ab_cd);
  EXPECT_EQ(quartet_topology(parse_newick("((A,B),(C,D));"), {"A", "C", "B", "D"}), QuartetTopology::ac_bd);
  EXPECT_EQ(quartet_topology(parse_newick("((A,B),(C,D));"), {"A", "C", "D", "B"}), QuartetTopology::ad_bc);
  EXPECT_EQ(quartet_topology(parse_newick("(A,B,C,D,E);"), {"A", "B", "C", "D"}), QuartetTopology::unresolved);
  EXPECT_EQ(quartet_topology(parse_newick("((A,B),C,D,E);"), {"A", "C", "D", "E"}), QuartetTopology::unresolved);
  EXPECT_EQ(quartet_topology(parse_newick("((A,B),C,D,E);"), {"A", "B", "D", "E"}), QuartetTopology::ab_cd);
  EXPECT_THROW(quartet_topology(parse_newick("((A,B),(C,D));"), {"A", "B", "C", "Z"}), DataError);
}

TEST(QuartetTopology, MatchesSubtreeExtraction) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 60; ++i) {
    const auto names = testutil::labels(5 + i % 10);
    const auto t = i % 2 ? testutil::random_binary_tree(names, rng) : testutil::random_polytomous_tree(names, rng);
    for (int k = 0; k < 20; ++k) {
      auto pool = names;
      std::shuffle(pool.begin(), pool.end(), rng);
      const std::array<std::string, 4> q{pool[0], pool[1], pool[2], pool[3]};
      const auto topo = quartet_topology(t, q);
      const int code = topo == QuartetTopology::unresolved ? 0 : static_cast<int>(topo) + 1;
      EXPECT_EQ(code, testutil::naive_quartet(t, q));
    }
  }
}

TEST(GqDistance, CalibrationPair) {
  const auto t = parse_newick(testutil::balanced16());
  const auto u = parse_newick(testutil::balanced16_swapped());
  const auto oracle = testutil::naive_gq(u, t);
  ASSERT_EQ(oracle.conflicting, 49u);
  ASSERT_EQ(oracle.resolved_both, 1820u);
  const auto d = gq_distance(u, t);
  EXPECT_EQ(d.numerator, 49u);
  EXPECT_EQ(d.denominator, 1820u);
  EXPECT_NEAR(d.value, 0.03, 0.005);
}

TEST(GqDistance, FiveLeafCaterpillars) {
  const auto a = parse_newick("((A,B),C,(D,E));");
  const auto b = parse_newick("((A,C),B,(D,E));");
  const auto oracle = testutil::naive_gq(a, b);
  ASSERT_EQ(oracle.conflicting, 2u);
  ASSERT_EQ(oracle.resolved_both, 5u);
  const auto d = gq_distance(a, b);
  EXPECT_EQ(d.numerator, 2u);
  EXPECT_EQ(d.denominator, 5u);
  EXPECT_DOUBLE_EQ(d.value, 0.4);
}

TEST(GqDistance, RefinementOfPolytomyIsZero) {
  const auto reference = parse_newick("((A,B),C,D,E);");
  const auto refined = parse_newick("((A,B),(C,(D,E)));");
  const auto d = gq_distance(refined, reference);
  EXPECT_EQ(d.numerator, 0u);
  // Reference resolves exactly the quartets containing both A and B: C(3,2) = 3.
  EXPECT_EQ(d.denominator, 3u);
}

TEST(GqDistance, Errors) {
  const auto bin = parse_newick("((A,B),C,(D,E));");
  EXPECT_THROW(gq_distance(bin, parse_newick("(A,B,C,D,E);")), DataError);  // star reference
  EXPECT_THROW(gq_distance(parse_newick("((A,B),(C,D));"), parse_newick("((A,B),(C,D));")), DataError);
  EXPECT_THROW(gq_distance(bin, parse_newick("((A,B),C,(D,F));")), DataError);
  EXPECT_THROW(gq_distance(parse_newick("((A,B),C,D,E);"), bin), DataError);  // inferred not binary
}

TEST(GqDistance, SelfDistanceIsZero) {
  std::mt19937_64 rng(9);
  for (std::size_t n = 5; n < 40; ++n) {
    const auto t = testutil::random_binary_tree(testutil::labels(n), rng);
    const auto d = gq_distance(t, t);
    EXPECT_EQ(d.numerator, 0u);
    EXPECT_EQ(d.denominator, n * (n - 1) * (n - 2) * (n - 3) / 24);
  }
}

TEST(GqDistance, IndependentOfThreadCount) {
  std::mt19937_64 rng(13);
  const auto names = testutil::labels(60);
  const auto a = testutil::random_binary_tree(names, rng);
  const auto b = testutil::random_polytomous_tree(names, rng, 0.05);
  const auto one = quartet_counts(a, b, 1);
  for (unsigned threads : {2u, 3u, 7u}) {
    const auto many = quartet_counts(a, b, threads);
    EXPECT_EQ(one.conflicting, many.conflicting);
    EXPECT_EQ(one.resolved_both, many.resolved_both);
  }
}

// With a binary inferred tree, "resolved in both" and "resolved in the
// reference" coincide.
TEST(GqDistance, NormalizationsCoincideForBinaryInferredTree) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 50; ++i) {
    const auto names = testutil::labels(5 + i % 25);
    const auto a = testutil::random_binary_tree(names, rng);
    const auto b = testutil::random_polytomous_tree(names, rng);
    const auto c = quartet_counts(a, b);
    EXPECT_EQ(c.resolved_both, c.resolved_reference);
  }
}

TEST(Distances, LabelPermutationInvariance) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 30; ++i) {
    const auto names = testutil::labels(6 + i % 12);
    const auto a = testutil::random_binary_tree(names, rng);
    const auto b = testutil::random_binary_tree(names, rng);
    auto shuffled = names;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::map<std::string, std::string> m;
    for (std::size_t k = 0; k < names.size(); ++k) m[names[k]] = "x" + shuffled[k];
    const auto ra = a.relabeled(m);
    const auto rb = b.relabeled(m);
    EXPECT_EQ(rf_distance(a, b).numerator, rf_distance(ra, rb).numerator);
    EXPECT_EQ(gq_distance(a, b).numerator, gq_distance(ra, rb).numerator);
  }
}

TEST(Distances, AcceleratedMatchesNaiveOracles) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const auto names = testutil::labels(5 + i % 8);
    const auto a = testutil::random_binary_tree(names, rng);
    const auto b = i % 2 ? testutil::random_binary_tree(names, rng) : testutil::random_polytomous_tree(names, rng);
    const auto g = testutil::naive_gq(a, b);
    if (g.resolved_both > 0) {
      const auto d = gq_distance(a, b);
      EXPECT_EQ(d.numerator, g.conflicting);
      EXPECT_EQ(d.denominator, g.resolved_both);
    }
    if (b.is_binary()) {
      EXPECT_EQ(rf_distance(a, b).numerator, testutil::naive_rf(a, b).first);
    }
  }
}

TEST(DistanceResult, ExactRationalComparison) {
  const auto a = make_distance(Metric::gq, 1, 3);
  const auto b = make_distance(Metric::gq, 2, 6);
  const auto c = make_distance(Metric::gq, 1, 4);
  EXPECT_TRUE(same_value(a, b));
  EXPECT_TRUE(less_value(c, a));
  EXPECT_FALSE(less_value(a, b));
  EXPECT_THROW(make_distance(Metric::gq, 0, 0), DataError);
}
