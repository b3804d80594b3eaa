#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "dsgd/rng.hpp"

using dsgd::RngStream;

TEST(RngStream, SameSeedSameSequence) {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(RngStream, DifferentSeedsDiffer) {
  RngStream a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a() == b();
  EXPECT_EQ(equal, 0);
}

TEST(RngStream, SplitDoesNotAdvanceParent) {
  RngStream a(7), b(7);
  (void)a.split(3);
  EXPECT_EQ(a.position(), 0u);
  EXPECT_EQ(a(), b());
}

TEST(RngStream, SplitIsPureFunctionOfKeyAndTag) {
  const RngStream root(9);
  RngStream x = root.split(5), y = root.split(5);
  EXPECT_EQ(x.id(), y.id());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(x(), y());
  EXPECT_EQ(root.split(1, 2).id(), root.split(1).split(2).id());
}

TEST(RngStream, ChildrenHaveDistinctIds) {
  const RngStream root(11);
  std::set<std::uint64_t> ids{root.id()};
  for (std::uint64_t a = 0; a < 50; ++a) {
    for (std::uint64_t b = 0; b < 50; ++b) ids.insert(root.split(a, b).id());
    ids.insert(root.split(a).id());
  }
  EXPECT_EQ(ids.size(), 1u + 50u * 50u + 50u);
}

TEST(RngStream, UniformMomentsMatchU01) {
  RngStream r(3);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
  }
  // Mean 1/2 with standard error sqrt(1/12/n); second moment 1/3.
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum2 / n, 1.0 / 3.0, 5.0 * std::sqrt(4.0 / 45.0 / n));
}

TEST(RngStream, UniformIndexIsUniform) {
  RngStream r(5);
  const std::size_t k = 7;
  const int n = 70000;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) {
    const auto idx = r.uniform_index(k);
    ASSERT_LT(idx, k);
    ++counts[idx];
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(n) / k;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 6 degrees of freedom; 99.99th percentile is about 27.9.
  EXPECT_LT(chi2, 27.9);
}

TEST(RngStream, WorksWithStandardDistributions) {
  RngStream r(8);
  std::normal_distribution<double> g(0.0, 1.0);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += g(r);
  EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
}

TEST(RngStream, SiblingStreamsAreUncorrelated) {
  const RngStream root(13);
  RngStream a = root.split(0), b = root.split(1);
  const int n = 50000;
  double sab = 0.0;
  for (int i = 0; i < n; ++i) sab += (a.uniform() - 0.5) * (b.uniform() - 0.5);
  // Covariance of independent U(0,1): 0 with standard error (1/12)/sqrt(n).
  EXPECT_NEAR(sab / n, 0.0, 5.0 * (1.0 / 12.0) / std::sqrt(n));
}
