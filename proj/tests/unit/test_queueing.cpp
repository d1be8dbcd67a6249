#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "ldso/queueing.hpp"
#include "oracles.hpp"

namespace {

using ldso::Bits;

TEST(QueueUpdate, HandExamples) {
  EXPECT_EQ(ldso::queue_update(100, 30, 20, 1000), 90);
  EXPECT_EQ(ldso::queue_update(10, 30, 20, 1000), 20);
  EXPECT_EQ(ldso::queue_update(0, 0, 0, 1000), 0);
}

TEST(QueueUpdate, RejectsBadInputs) {
  EXPECT_THROW(ldso::queue_update(-1, 0, 0, 10), ldso::PreconditionError);
  EXPECT_THROW(ldso::queue_update(0, -1, 0, 10), ldso::PreconditionError);
  EXPECT_THROW(ldso::queue_update(0, 0, -1, 10), ldso::PreconditionError);
  EXPECT_THROW(ldso::queue_update(0, 11, 0, 10), ldso::PreconditionError);
}

TEST(QueueUpdate, MatchesOracleOnRandomTriples) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<Bits> d(0, 1 << 20);
  for (int n = 0; n < 20000; ++n) {
    const Bits q = d(rng), mu = d(rng), a = d(rng);
    ASSERT_EQ(ldso::queue_update(q, mu, a, 1 << 20), oracle::queue_update(q, mu, a));
  }
}

TEST(ServiceAmount, BoundedByCapacityAndContent) {
  EXPECT_EQ(ldso::service_amount(600, 100, 50), 150);
  EXPECT_EQ(ldso::service_amount(600, 1000, 50), 600);
  EXPECT_EQ(ldso::service_amount(600, 0, 0), 0);
}

TEST(ProportionalService, HandExample) {
  const std::vector<Bits> q = {40, 60};
  EXPECT_EQ(ldso::proportional_service(q, 50), (std::vector<Bits>{20, 30}));
  const auto next = ldso::per_service_update(q, std::vector<Bits>{20, 30}, std::vector<Bits>{5, 0});
  EXPECT_EQ(next, (std::vector<Bits>{25, 30}));
}

TEST(ProportionalService, EmptyBacklogServesNothing) {
  const std::vector<Bits> q = {0, 0, 0};
  EXPECT_EQ(ldso::proportional_service(q, 100), (std::vector<Bits>{0, 0, 0}));
}

TEST(ProportionalService, LargestRemainderTiesGoLow) {
  // Three equal backlogs, one bit to hand out: index 0 gets it.
  const std::vector<Bits> q = {1, 1, 1};
  EXPECT_EQ(ldso::proportional_service(q, 1), (std::vector<Bits>{1, 0, 0}));
}

TEST(ProportionalService, ExactSplitOnRandomInputs) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Bits> d(0, 5000);
  for (int n = 0; n < 2000; ++n) {
    std::vector<Bits> q(5);
    for (auto& v : q) v = d(rng);
    const Bits total = std::accumulate(q.begin(), q.end(), Bits{0});
    const Bits mu = d(rng) * 2;
    const auto s = ldso::proportional_service(q, mu);
    EXPECT_EQ(std::accumulate(s.begin(), s.end(), Bits{0}), std::min(mu, total));
    for (std::size_t k = 0; k < q.size(); ++k) {
      EXPECT_GE(s[k], 0);
      EXPECT_LE(s[k], q[k]);
      // Within one bit of the exact proportional share.
      if (total > 0) {
        const double exact = static_cast<double>(q[k]) * static_cast<double>(std::min(mu, total)) /
                             static_cast<double>(total);
        EXPECT_LT(std::abs(static_cast<double>(s[k]) - exact), 1.0);
      }
    }
  }
}

TEST(PerServiceUpdate, RejectsOverService) {
  const std::vector<Bits> q = {5};
  EXPECT_THROW(ldso::per_service_update(q, std::vector<Bits>{7}, std::vector<Bits>{1}),
               ldso::PreconditionError);
}

TEST(QueueState, AggregateMatchesPerServiceLaw) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<Bits> arr(0, 300);
  ldso::QueueState qs(2, 3);
  for (int t = 0; t < 500; ++t) {
    for (std::size_t i = 0; i < 2; ++i) {
      std::vector<Bits> a(3);
      for (auto& v : a) v = arr(rng);
      const Bits a_total = std::accumulate(a.begin(), a.end(), Bits{0});
      const Bits before = qs.total(i);
      const Bits mu = ldso::service_amount(400, before, a_total);
      qs.advance(i, mu, a);
      ASSERT_EQ(qs.total(i), oracle::queue_update(before, mu, a_total));
      const auto row = qs.row(i);
      ASSERT_EQ(std::accumulate(row.begin(), row.end(), Bits{0}), qs.total(i));
    }
  }
}

}  // namespace
