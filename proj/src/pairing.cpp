#include "nscop/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nscop/errors.hpp"

namespace nscop {

std::string to_string(PairingScheme scheme) {
  switch (scheme) {
    case PairingScheme::A0: return "a0";
    case PairingScheme::PreviousTick: return "prev-tick";
    case PairingScheme::RefreshTime: return "refresh";
  }
  return "unknown";
}

PairingScheme parse_scheme(const std::string& name) {
  if (name == "a0") return PairingScheme::A0;
  if (name == "prev-tick") return PairingScheme::PreviousTick;
  if (name == "refresh") return PairingScheme::RefreshTime;
  fail(ErrorKind::InvalidParameter, "unknown pairing scheme '" + name + "'");
}

int configuration(double t1_prev, double t2_prev, double t1_cur, double t2_cur) noexcept {
  const bool asset1_starts_first = t1_prev <= t2_prev;
  const bool asset1_ends_last = t1_cur >= t2_cur;
  if (asset1_starts_first && asset1_ends_last) return 1;
  if (!asset1_starts_first && asset1_ends_last) return 2;
  if (asset1_starts_first) return 3;
  return 4;
}

double PairDiagnostics::correction_factor() const { return std::sqrt(m1 * m2) / mI; }

namespace {

void require_overlap(const TickSeries& a, const TickSeries& b) {
  const double start = std::max(a.front_time(), b.front_time());
  const double end = std::min(a.back_time(), b.back_time());
  if (!(start < end)) {
    fail(ErrorKind::NoOverlap, "tick series '" + a.asset_id() + "' and '" + b.asset_id() +
                                   "' have disjoint time supports");
  }
}

PairedSeries start_series(const TickSeries& a, const TickSeries& b, PairingScheme scheme) {
  PairedSeries p;
  p.scheme = scheme;
  p.raw1 = a.size();
  p.raw2 = b.size();
  return p;
}

void push_pair(PairedSeries& p, const TickSeries& a, const TickSeries& b, std::size_t i, std::size_t j) {
  p.t1.push_back(a.times()[i]);
  p.x.push_back(a.log_prices()[i]);
  p.t2.push_back(b.times()[j]);
  p.y.push_back(b.log_prices()[j]);
}

// Index of the last tick at or before t, or -1.
std::ptrdiff_t last_at_or_before(std::span<const double> times, double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<std::ptrdiff_t>(it - times.begin()) - 1;
}

}  // namespace

PairedSeries pair_a0(const TickSeries& a, const TickSeries& b) {
  require_overlap(a, b);
  auto ta = a.times();
  auto tb = b.times();
  const std::size_t n1 = ta.size();
  const std::size_t n2 = tb.size();
  PairedSeries p = start_series(a, b, PairingScheme::A0);
  p.t1.reserve(std::min(n1, n2));

  std::size_t k1 = 0;
  std::size_t k2 = 0;
  while (k1 < n1 && k2 < n2) {
    if (tb[k2] > ta[k1]) {
      // latest asset-1 tick not after the asset-2 tick
      std::size_t m = k1;
      while (m + 1 < n1 && ta[m + 1] <= tb[k2]) ++m;
      push_pair(p, a, b, m, k2);
      k1 = m;
    } else if (tb[k2] < ta[k1]) {
      std::size_t m = k2;
      while (m + 1 < n2 && tb[m + 1] <= ta[k1]) ++m;
      push_pair(p, a, b, k1, m);
      k2 = m;
    } else {
      push_pair(p, a, b, k1, k2);
    }
    ++k1;
    ++k2;
  }
  return p;
}

PairedSeries pair_refresh_time(const TickSeries& a, const TickSeries& b) {
  require_overlap(a, b);
  auto ta = a.times();
  auto tb = b.times();
  PairedSeries p = start_series(a, b, PairingScheme::RefreshTime);

  double last = -std::numeric_limits<double>::infinity();
  for (;;) {
    auto ia = std::upper_bound(ta.begin(), ta.end(), last);
    auto ib = std::upper_bound(tb.begin(), tb.end(), last);
    if (ia == ta.end() || ib == tb.end()) break;
    const double tau = std::max(*ia, *ib);
    push_pair(p, a, b, static_cast<std::size_t>(last_at_or_before(ta, tau)),
              static_cast<std::size_t>(last_at_or_before(tb, tau)));
    last = tau;
  }
  return p;
}

PairedSeries pair_previous_tick(const TickSeries& a, const TickSeries& b, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    fail(ErrorKind::InvalidParameter, "previous-tick delta must be positive");
  }
  require_overlap(a, b);
  auto ta = a.times();
  auto tb = b.times();
  PairedSeries p = start_series(a, b, PairingScheme::PreviousTick);
  p.delta = delta;

  const double end = std::max(a.back_time(), b.back_time());
  const double last_j = std::floor(end / delta);
  if (last_j < 1.0) {
    push_pair(p, a, b, ta.size() - 1, tb.size() - 1);
    return p;
  }

  std::ptrdiff_t prev_i = -1;
  std::ptrdiff_t prev_j = -1;
  double j = 1.0;
  while (j <= last_j) {
    const double tau = j * delta;
    const std::ptrdiff_t i = last_at_or_before(ta, tau);
    const std::ptrdiff_t k = last_at_or_before(tb, tau);
    if (i >= 0 && k >= 0 && (i != prev_i || k != prev_j)) {
      push_pair(p, a, b, static_cast<std::size_t>(i), static_cast<std::size_t>(k));
      prev_i = i;
      prev_j = k;
    }
    // jump to the first grid point that can see a new tick
    double next_tick = std::numeric_limits<double>::infinity();
    if (static_cast<std::size_t>(i + 1) < ta.size()) next_tick = ta[static_cast<std::size_t>(i + 1)];
    if (static_cast<std::size_t>(k + 1) < tb.size()) next_tick = std::min(next_tick, tb[static_cast<std::size_t>(k + 1)]);
    if (!std::isfinite(next_tick)) break;
    j = std::max(j + 1.0, std::ceil(next_tick / delta));
  }
  return p;
}

PairedSeries pair(const TickSeries& a, const TickSeries& b, PairingScheme scheme, double delta) {
  switch (scheme) {
    case PairingScheme::A0: return pair_a0(a, b);
    case PairingScheme::RefreshTime: return pair_refresh_time(a, b);
    case PairingScheme::PreviousTick: return pair_previous_tick(a, b, delta);
  }
  fail(ErrorKind::InvalidParameter, "unknown pairing scheme");
}

PairDiagnostics diagnostics(const PairedSeries& p) {
  const std::size_t n = p.size();
  if (n < 2) fail(ErrorKind::InsufficientData, "diagnostics need at least two pairs");
  PairDiagnostics d;
  d.overlaps.reserve(n - 1);
  d.configs.reserve(n - 1);
  double s1 = 0.0, s2 = 0.0, sI = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double I = overlap(p.t1[i - 1], p.t2[i - 1], p.t1[i], p.t2[i]);
    if (!(I > 0.0)) {
      fail(ErrorKind::DegeneratePairing, "non-positive overlap at pair " + std::to_string(i));
    }
    d.overlaps.push_back(I);
    d.configs.push_back(configuration(p.t1[i - 1], p.t2[i - 1], p.t1[i], p.t2[i]));
    s1 += p.t1[i] - p.t1[i - 1];
    s2 += p.t2[i] - p.t2[i - 1];
    sI += I;
  }
  const double m = static_cast<double>(n - 1);
  d.m1 = s1 / m;
  d.m2 = s2 / m;
  d.mI = sI / m;

  // per-asset times are nondecreasing, so distinct ticks are distinct times
  auto loss = [](const std::vector<double>& t, std::size_t raw) {
    if (raw == 0) return 0.0;
    std::size_t used = 1;
    for (std::size_t i = 1; i < t.size(); ++i) used += t[i] != t[i - 1] ? 1 : 0;
    return 1.0 - static_cast<double>(used) / static_cast<double>(raw);
  };
  d.loss1 = loss(p.t1, p.raw1);
  d.loss2 = loss(p.t2, p.raw2);
  return d;
}

PairedReturns paired_returns(const PairedSeries& p) {
  if (p.size() < 2) fail(ErrorKind::InsufficientData, "need at least two pairs for returns");
  PairedReturns r;
  r.r1.reserve(p.size() - 1);
  r.r2.reserve(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) {
    r.r1.push_back(p.x[i] - p.x[i - 1]);
    r.r2.push_back(p.y[i] - p.y[i - 1]);
  }
  return r;
}

}  // namespace nscop
