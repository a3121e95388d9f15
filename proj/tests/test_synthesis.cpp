#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "nscop/estimators.hpp"
#include "nscop/synthesis.hpp"
#include "test_util.hpp"

using namespace nscop;
using nscop::test::error_kind_of;

TEST(Simulate, CountModeSplitsOneStream) {
  SimSpec s;
  s.model = CopulaModel::clayton(2.0);
  s.n1 = 300;
  s.n2 = 500;
  s.seed = 8;
  auto r = simulate(s);
  EXPECT_EQ(r.a.size(), 300u);
  EXPECT_EQ(r.b.size(), 500u);
  EXPECT_DOUBLE_EQ(r.true_tau, 0.5);
  std::vector<double> both;
  both.insert(both.end(), r.a.times().begin(), r.a.times().end());
  both.insert(both.end(), r.b.times().begin(), r.b.times().end());
  std::sort(both.begin(), both.end());
  EXPECT_EQ(std::adjacent_find(both.begin(), both.end()), both.end());
  // combined rate λ1+λ2 = 2 over 800 events
  EXPECT_NEAR(both.back() / 800.0, 0.5, 0.1);
}

TEST(Simulate, DeterministicInSeed) {
  SimSpec s;
  s.model = CopulaModel::student_t(0.3, 5);
  s.n1 = s.n2 = 100;
  s.seed = 42;
  auto a = simulate(s);
  auto b = simulate(s);
  ASSERT_TRUE(std::equal(a.a.times().begin(), a.a.times().end(), b.a.times().begin()));
  ASSERT_TRUE(std::equal(a.b.log_prices().begin(), a.b.log_prices().end(), b.b.log_prices().begin()));
  s.seed = 43;
  auto c = simulate(s);
  EXPECT_NE(a.a.times()[0], c.a.times()[0]);
}

TEST(Simulate, SynchronousReturnsCarryTheCopula) {
  SimSpec s;
  s.model = CopulaModel::gumbel(2.5);
  s.margins = {MarginSpec::student_t(5), MarginSpec::normal(0.0, 2.0)};
  s.n1 = s.n2 = 1500;
  s.synchronous = true;
  s.seed = 77;
  auto r = simulate(s);
  ASSERT_EQ(r.a.size(), 3000u);
  ASSERT_TRUE(std::equal(r.a.times().begin(), r.a.times().end(), r.b.times().begin()));
  std::vector<double> z1, z2;
  for (std::size_t i = 1; i < r.a.size(); ++i) {
    const double s_dt = std::sqrt(r.a.times()[i] - r.a.times()[i - 1]);
    z1.push_back((r.a.log_prices()[i] - r.a.log_prices()[i - 1]) / s_dt);
    z2.push_back((r.b.log_prices()[i] - r.b.log_prices()[i - 1]) / s_dt);
  }
  EXPECT_NEAR(kendall_tau(z1, z2).tau_hat, r.true_tau, 0.04);
}

TEST(Simulate, HorizonMode) {
  SimSpec s;
  s.model = CopulaModel::gaussian(0.2);
  s.lambda1 = 2.0;
  s.lambda2 = 0.5;
  s.horizon = 2000.0;
  s.seed = 9;
  auto r = simulate(s);
  EXPECT_LE(r.a.back_time(), 2000.0);
  EXPECT_LE(r.b.back_time(), 2000.0);
  EXPECT_NEAR(static_cast<double>(r.a.size()), 4000.0, 4 * std::sqrt(4000.0));
  EXPECT_NEAR(static_cast<double>(r.b.size()), 1000.0, 4 * std::sqrt(1000.0));

  s.horizon = 0.01;
  EXPECT_EQ(error_kind_of([&] { simulate(s); }), ErrorKind::InsufficientData);
}

TEST(Simulate, ValidatesSpec) {
  SimSpec s;
  s.lambda1 = 0.0;
  EXPECT_EQ(error_kind_of([&] { simulate(s); }), ErrorKind::InvalidParameter);
  s.lambda1 = 1.0;
  s.n1 = 1;
  EXPECT_EQ(error_kind_of([&] { simulate(s); }), ErrorKind::InvalidParameter);
  s.n1 = 10;
  s.horizon = -1.0;
  EXPECT_EQ(error_kind_of([&] { simulate(s); }), ErrorKind::InvalidParameter);
}
