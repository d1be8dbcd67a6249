#include <gtest/gtest.h>

#include <random>

#include "ldso/lyapunov.hpp"

namespace {

using ldso::Bits;
using V = std::vector<Bits>;

TEST(LyapunovValue, Examples) {
  EXPECT_EQ(ldso::lyapunov_value(V{0, 0, 0}), 0.0);
  EXPECT_EQ(ldso::lyapunov_value(V{3, 4}), 12.5);
  EXPECT_EQ(ldso::lyapunov_value(V{5}), 12.5);
}

TEST(LyapunovValue, ExactForLargeBacklogs) {
  // 2^31 squared overflows 64-bit halves if accumulated naively in int.
  const Bits big = Bits{1} << 31;
  EXPECT_EQ(ldso::lyapunov_value(V{big, big}), static_cast<double>(big) * static_cast<double>(big));
}

TEST(Drift, Examples) {
  EXPECT_EQ(ldso::drift(V{7, 2}, V{7, 2}), 0.0);
  EXPECT_EQ(ldso::drift(V{0}, V{4}), 8.0);
  EXPECT_EQ(ldso::drift(V{4}, V{0}), -8.0);
  EXPECT_THROW(ldso::drift(V{1}, V{1, 2}), ldso::PreconditionError);
}

TEST(DriftBound, Examples) {
  EXPECT_EQ(ldso::drift_bound(V{10}, V{10}), 100.0);
  EXPECT_EQ(ldso::drift_bound(V{0, 0}, V{0, 0}), 0.0);
  EXPECT_EQ(ldso::drift_bound(V{3, 4}, V{0, 0}), 12.5);
}

TEST(DecisionCost, Examples) {
  EXPECT_EQ(ldso::decision_cost(0, 0.5, 99, 99, 10, 3), 30.0);
  EXPECT_EQ(ldso::decision_cost(2, 0.5, 4, 6, 10, 3), 40.0);
  EXPECT_EQ(ldso::decision_cost(0, 0.5, 4, 6, 10, 0), 0.0);
}

TEST(DriftPlusPenalty, Examples) {
  EXPECT_EQ(ldso::drift_plus_penalty(5, 0, 123), 5.0);
  EXPECT_EQ(ldso::drift_plus_penalty(8, 10, 0.5), 13.0);
  EXPECT_EQ(ldso::drift_plus_penalty(-3, 10, 0), -3.0);
}

TEST(Bounds, UpperBoundsFormulas) {
  EXPECT_EQ(ldso::drift_upper_bound(100, V{10, 20}, V{5, 0}, V{3, 30}), 100 + 10 * 2 + 20 * -30);
  EXPECT_EQ(ldso::penalty_upper_bound(100, 2, 3.5, V{10, 20}, V{5, 1}), 100 + 7 + 50 + 20);
}

TEST(Bounds, DriftNeverExceedsBoundForLawAbidingSteps) {
  // For any step obeying the queue law with mu <= mu_max and A <= A_max the
  // one-slot drift stays under B + sum Q (A - mu).
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<Bits> q(0, 10000), cap(1, 3000);
  for (int n = 0; n < 20000; ++n) {
    const std::size_t m = 1 + n % 5;
    V before(m), after(m), a(m), mu(m), mu_max(m), a_max(m);
    for (std::size_t i = 0; i < m; ++i) {
      mu_max[i] = cap(rng);
      a_max[i] = cap(rng);
      before[i] = q(rng);
      a[i] = std::uniform_int_distribution<Bits>(0, a_max[i])(rng);
      mu[i] = std::uniform_int_distribution<Bits>(0, mu_max[i])(rng);
      after[i] = std::max<Bits>(before[i] - mu[i], 0) + a[i];
    }
    const double b = ldso::drift_bound(mu_max, a_max);
    ASSERT_TRUE(ldso::within_bound(ldso::drift(before, after),
                                   ldso::drift_upper_bound(b, before, a, mu)));
  }
}

TEST(WithinBound, RelativeSlack) {
  EXPECT_TRUE(ldso::within_bound(1.0, 1.0));
  EXPECT_TRUE(ldso::within_bound(1e12 + 1e2, 1e12));
  EXPECT_FALSE(ldso::within_bound(1e12 + 1e4, 1e12));
  EXPECT_FALSE(ldso::within_bound(2.0, 1.0));
}

}  // namespace
