#pragma once

#include <cstdint>
#include <utility>

#include "nscop/market_data.hpp"

namespace nscop {

/// Intensities (ticks per second) of two independent Poisson arrival streams.
struct PoissonPair {
  double lambda1 = 1.0;
  double lambda2 = 1.0;

  PoissonPair() = default;
  PoissonPair(double l1, double l2);  // throws InvalidParameter unless both finite and > 0
};

/// Closed-form expectations for A0-paired Poisson streams.
///
/// `gamma` is the population counterpart of the correction factor built
/// from the three expectations exactly as the closed-form theory states it.
/// It is reported alongside, never substituted for, the empirical factor
/// computed from pairs: for equal rates it evaluates to 0.75 whereas the
/// empirical factor is at least one by construction.
struct TheoryReport {
  double lambda1 = 0.0, lambda2 = 0.0;
  double expected_overlap = 0.0;  // E(I)
  double eta1 = 0.0, eta2 = 0.0;
  double expected_dt1 = 0.0;      // η1 / λ1
  double expected_dt2 = 0.0;      // η2 / λ2
  double gamma = 0.0;
  std::uint64_t truncation_n = 0;
  double truncation_error_bound = 0.0;
};

/// F of Beta(1,k) at x: 1 - (1-x)^k.
double beta1k_cdf(double k, double x);

/// (p_n, q_n) = (x2·(1-x2)^n, x1·(1-x1)^n) with x_i = λ_i/(λ1+λ2), the
/// increments F_{Beta(1,n+1)} - F_{Beta(1,n)} at x2 and x1.
std::pair<double, double> pq_terms(const PoissonPair& pp, std::int64_t n);

/// Sums the series for E(I), η1 and η2 up to the first N whose closed-form
/// geometric tail bound (on every reported time quantity) is below `tol`.
TheoryReport theory_report(const PoissonPair& pp, double tol = 1e-12);

/// Same sums with a caller-fixed truncation N (tail bound still reported).
TheoryReport theory_report_truncated(const PoissonPair& pp, std::uint64_t n_terms);

/// Homogeneous-Poisson MLE per series: (#interarrivals)/(observed span).
PoissonPair estimate_rates(const TickSeries& a, const TickSeries& b);
double estimate_rate(const TickSeries& s);

}  // namespace nscop
