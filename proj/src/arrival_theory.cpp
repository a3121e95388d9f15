#include "nscop/arrival_theory.hpp"

#include <algorithm>
#include <cmath>

#include "nscop/errors.hpp"

namespace nscop {

namespace {

// Neumaier compensated accumulator
struct Sum {
  double s = 0.0, c = 0.0;
  void add(double v) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

// Σ_{n>N} r^n and Σ_{n>N} n r^n
double geometric_tail(double r, double N) { return std::pow(r, N + 1.0) / (1.0 - r); }
double weighted_tail(double r, double N) {
  return std::pow(r, N + 1.0) * ((N + 1.0) * (1.0 - r) + r) / ((1.0 - r) * (1.0 - r));
}

struct Weights {
  double x1, x2;           // λ_i/(λ1+λ2)
  double overlap_scale;    // ½(1/λ1 + 1/λ2)
};

Weights weights(const PoissonPair& pp) {
  const double total = pp.lambda1 + pp.lambda2;
  return {pp.lambda1 / total, pp.lambda2 / total, 0.5 * (1.0 / pp.lambda1 + 1.0 / pp.lambda2)};
}

// Largest tail over the three reported time quantities after N terms.
//   E(I) terms: scale·n·(x2 r2^n + x1 r1^n), r2 = 1-x2 = x1, r1 = 1-x1 = x2
//   η1 terms:   (1-x1)·x1^k + k·x1·(1-x1)^k
//   η2 terms:   (1-x2)·x2^k + k·x2·(1-x2)^k
double tail_bound(const PoissonPair& pp, const Weights& w, double N) {
  const double overlap = w.overlap_scale * (w.x2 * weighted_tail(w.x1, N) + w.x1 * weighted_tail(w.x2, N));
  const double eta1 = w.x2 * geometric_tail(w.x1, N) + w.x1 * weighted_tail(w.x2, N);
  const double eta2 = w.x1 * geometric_tail(w.x2, N) + w.x2 * weighted_tail(w.x1, N);
  return std::max({overlap, eta1 / pp.lambda1, eta2 / pp.lambda2});
}

}  // namespace

PoissonPair::PoissonPair(double l1, double l2) : lambda1(l1), lambda2(l2) {
  if (!(l1 > 0.0) || !(l2 > 0.0) || !std::isfinite(l1) || !std::isfinite(l2)) {
    fail(ErrorKind::InvalidParameter, "Poisson intensities must be finite and positive");
  }
}

double beta1k_cdf(double k, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return -std::expm1(k * std::log1p(-x));
}

std::pair<double, double> pq_terms(const PoissonPair& pp, std::int64_t n) {
  if (n < 1) fail(ErrorKind::InvalidParameter, "pq_terms needs n >= 1");
  const auto w = weights(pp);
  const double dn = static_cast<double>(n);
  return {w.x2 * std::pow(1.0 - w.x2, dn), w.x1 * std::pow(1.0 - w.x1, dn)};
}

TheoryReport theory_report_truncated(const PoissonPair& pp, std::uint64_t n_terms) {
  const auto w = weights(pp);
  Sum n_pq, eta1, eta2;
  // running powers x1^k and x2^k
  double x1k = 1.0;
  double x2k = 1.0;
  for (std::uint64_t k = 1; k <= n_terms; ++k) {
    x1k *= w.x1;
    x2k *= w.x2;
    if (x1k == 0.0 && x2k == 0.0) break;
    const double dk = static_cast<double>(k);
    const double p = w.x2 * x1k;  // x2(1-x2)^k
    const double q = w.x1 * x2k;  // x1(1-x1)^k
    n_pq.add(dk * (p + q));
    eta1.add(p + dk * q);  // {F_{k+1}-F_k}(1-x1) + k{F_{k+1}-F_k}(x1)
    eta2.add(q + dk * p);
  }

  TheoryReport r;
  r.lambda1 = pp.lambda1;
  r.lambda2 = pp.lambda2;
  r.expected_overlap = w.overlap_scale * n_pq.value();
  r.eta1 = eta1.value();
  r.eta2 = eta2.value();
  r.expected_dt1 = r.eta1 / pp.lambda1;
  r.expected_dt2 = r.eta2 / pp.lambda2;
  r.gamma = std::sqrt(r.expected_dt1 * r.expected_dt2) / r.expected_overlap;
  r.truncation_n = n_terms;
  r.truncation_error_bound = tail_bound(pp, w, static_cast<double>(n_terms));
  return r;
}

TheoryReport theory_report(const PoissonPair& pp, double tol) {
  if (!(tol > 0.0)) fail(ErrorKind::InvalidParameter, "tolerance must be positive");
  const auto w = weights(pp);
  constexpr std::uint64_t kMaxTerms = 1ULL << 32;
  // bound is decreasing in N: double, then bisect
  std::uint64_t hi = 1;
  while (tail_bound(pp, w, static_cast<double>(hi)) >= tol && hi < kMaxTerms) hi *= 2;
  std::uint64_t lo = hi / 2;
  while (lo + 1 < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (tail_bound(pp, w, static_cast<double>(mid)) < tol) hi = mid; else lo = mid;
  }
  return theory_report_truncated(pp, std::max<std::uint64_t>(hi, 1));
}

double estimate_rate(const TickSeries& s) {
  if (s.size() < 2) fail(ErrorKind::InsufficientData, "rate estimation needs two ticks");
  const double span = s.back_time() - s.front_time();
  if (!(span > 0.0)) fail(ErrorKind::InsufficientData, "zero observed span");
  return static_cast<double>(s.size() - 1) / span;
}

PoissonPair estimate_rates(const TickSeries& a, const TickSeries& b) {
  return PoissonPair(estimate_rate(a), estimate_rate(b));
}

}  // namespace nscop
