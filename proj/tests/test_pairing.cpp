#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "nscop/pairing.hpp"
#include "test_util.hpp"

using namespace nscop;
using nscop::test::error_kind_of;

namespace {

TickSeries series(std::vector<double> t) {
  std::vector<double> lp(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) lp[i] = 0.01 * static_cast<double>(i);
  return TickSeries(std::move(t), std::move(lp));
}

TickSeries random_series(std::mt19937_64& rng, double rate, std::size_t n) {
  std::exponential_distribution<double> gap(rate);
  std::vector<double> t;
  double now = 0.0;
  while (t.size() < n) {
    now += gap(rng);
    t.push_back(now);
  }
  return series(std::move(t));
}

// Overlap by explicit case analysis on the ordering of the four times.
double overlap_by_cases(double t1p, double t2p, double t1c, double t2c) {
  if (t1p <= t2p && t2c <= t1c) return t2c - t2p;
  if (t2p < t1p && t2c < t1c) return t2c - t1p;
  if (t1p < t2p && t1c < t2c) return t1c - t2p;
  return t1c - t1p;
}

}  // namespace

TEST(PairA0, HandTrace) {
  auto a = series({1, 2, 5, 9});
  auto b = series({3, 4, 6, 7});
  auto p = pair_a0(a, b);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p.t1, (std::vector<double>{2, 5, 9}));
  EXPECT_EQ(p.t2, (std::vector<double>{3, 4, 7}));

  auto d = diagnostics(p);
  EXPECT_EQ(d.overlaps, (std::vector<double>{1, 2}));
  EXPECT_EQ(d.configs, (std::vector<int>{1, 2}));
  EXPECT_DOUBLE_EQ(d.m1, 3.5);
  EXPECT_DOUBLE_EQ(d.m2, 2.0);
  EXPECT_DOUBLE_EQ(d.mI, 1.5);
  EXPECT_DOUBLE_EQ(d.correction_factor(), std::sqrt(7.0) / 1.5);
  EXPECT_DOUBLE_EQ(d.loss1, 0.25);
  EXPECT_DOUBLE_EQ(d.loss2, 0.25);
}

TEST(PairA0, PricesTravelWithTimes) {
  auto a = series({1, 2, 5, 9});
  auto b = series({3, 4, 6, 7});
  auto p = pair_a0(a, b);
  EXPECT_DOUBLE_EQ(p.x[0], 0.01);
  EXPECT_DOUBLE_EQ(p.y[2], 0.03);
}

TEST(PairA0, MatchesRefreshTimeOnRandomStreams) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    auto a = random_series(rng, 0.5 + rep % 3, 50);
    auto b = random_series(rng, 1.0, 50);
    auto p = pair_a0(a, b);
    auto q = pair_refresh_time(a, b);
    ASSERT_EQ(p.t1, q.t1);
    ASSERT_EQ(p.t2, q.t2);
    ASSERT_EQ(p.x, q.x);
    ASSERT_EQ(p.y, q.y);
  }
}

TEST(PairA0, InvariantsHold) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    auto a = random_series(rng, 2.0, 80);
    auto b = random_series(rng, 0.7, 40);
    auto p = pair_a0(a, b);
    ASSERT_GE(p.size(), 2u);
    for (std::size_t i = 1; i < p.size(); ++i) {
      ASSERT_LT(p.t1[i - 1], p.t1[i]);
      ASSERT_LT(p.t2[i - 1], p.t2[i]);
      // each pair's later tick is the refresh instant; the earlier one is
      // the other asset's latest tick before it
      ASSERT_GT(overlap(p.t1[i - 1], p.t2[i - 1], p.t1[i], p.t2[i]), 0.0);
    }
    auto d = diagnostics(p);
    ASSERT_GE(d.correction_factor(), 1.0);
  }
}

TEST(PairA0, ExactTieIsOnePair) {
  auto a = series({1, 3, 4});
  auto b = series({2, 3, 5});
  auto p = pair_a0(a, b);
  ASSERT_GE(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p.t1[1], 3.0);
  EXPECT_DOUBLE_EQ(p.t2[1], 3.0);
}

TEST(PairA0, DisjointSupportsFail) {
  auto a = series({0, 1, 2});
  auto b = series({3, 4, 5});
  EXPECT_EQ(error_kind_of([&] { pair_a0(a, b); }), ErrorKind::NoOverlap);
  EXPECT_EQ(error_kind_of([&] { pair_refresh_time(a, b); }), ErrorKind::NoOverlap);
  EXPECT_EQ(error_kind_of([&] { pair_previous_tick(a, b, 1.0); }), ErrorKind::NoOverlap);
}

TEST(PreviousTick, HandTrace) {
  auto a = series({1, 2, 5, 9});
  auto b = series({3, 4, 6, 7});
  auto p = pair_previous_tick(a, b, 2.0);
  EXPECT_EQ(p.t1, (std::vector<double>{2, 5, 5}));
  EXPECT_EQ(p.t2, (std::vector<double>{4, 6, 7}));
  EXPECT_DOUBLE_EQ(p.delta, 2.0);
}

TEST(PreviousTick, MatchesNaiveGrid) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    auto a = random_series(rng, 1.0, 60);
    auto b = random_series(rng, 0.3, 20);
    const double delta = 0.25 + 0.5 * (rep % 4);
    auto p = pair_previous_tick(a, b, delta);

    std::vector<double> e1, e2;
    const double end = std::max(a.back_time(), b.back_time());
    for (int j = 1; j * delta <= end; ++j) {
      const double tau = j * delta;
      auto ia = std::upper_bound(a.times().begin(), a.times().end(), tau);
      auto ib = std::upper_bound(b.times().begin(), b.times().end(), tau);
      if (ia == a.times().begin() || ib == b.times().begin()) continue;
      const double s1 = *(ia - 1), s2 = *(ib - 1);
      if (!e1.empty() && e1.back() == s1 && e2.back() == s2) continue;
      e1.push_back(s1);
      e2.push_back(s2);
    }
    ASSERT_EQ(p.t1, e1);
    ASSERT_EQ(p.t2, e2);
  }
}

TEST(PreviousTick, RejectsBadDelta) {
  auto a = series({0, 1, 2});
  EXPECT_EQ(error_kind_of([&] { pair_previous_tick(a, a, 0.0); }), ErrorKind::InvalidParameter);
  EXPECT_EQ(error_kind_of([&] { pair_previous_tick(a, a, -1.0); }), ErrorKind::InvalidParameter);
}

TEST(Overlap, AgreesWithCaseAnalysis) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int seen[5] = {};
  for (int rep = 0; rep < 20000; ++rep) {
    // draw two intervals that intersect
    double t1p = u(rng), t2p = u(rng);
    double t1c = std::max(t1p, t2p) + u(rng) + 1e-9;
    double t2c = std::max(t1p, t2p) + u(rng) + 1e-9;
    ASSERT_NEAR(overlap(t1p, t2p, t1c, t2c), overlap_by_cases(t1p, t2p, t1c, t2c), 1e-15);
    const int c = configuration(t1p, t2p, t1c, t2c);
    ASSERT_GE(c, 1);
    ASSERT_LE(c, 4);
    ++seen[c];
  }
  for (int c = 1; c <= 4; ++c) EXPECT_GT(seen[c], 1000);
}

TEST(Configuration, Labels) {
  EXPECT_EQ(configuration(0, 1, 4, 3), 1);
  EXPECT_EQ(configuration(1, 0, 4, 3), 2);
  EXPECT_EQ(configuration(0, 1, 3, 4), 3);
  EXPECT_EQ(configuration(1, 0, 3, 4), 4);
  EXPECT_EQ(configuration(0, 0, 3, 3), 1);
}

TEST(Scheme, ParseRoundTrip) {
  for (auto s : {PairingScheme::A0, PairingScheme::PreviousTick, PairingScheme::RefreshTime}) {
    EXPECT_EQ(parse_scheme(to_string(s)), s);
  }
  EXPECT_EQ(error_kind_of([] { parse_scheme("nearest"); }), ErrorKind::InvalidParameter);
}

TEST(PairedReturns, Differences) {
  auto p = pair_a0(series({1, 2, 5, 9}), series({3, 4, 6, 7}));
  auto r = paired_returns(p);
  ASSERT_EQ(r.r1.size(), 2u);
  EXPECT_NEAR(r.r1[0], 0.01, 1e-15);
  EXPECT_NEAR(r.r2[1], 0.02, 1e-15);
}
