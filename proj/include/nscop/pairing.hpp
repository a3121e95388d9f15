#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nscop/market_data.hpp"

namespace nscop {

enum class PairingScheme { A0, PreviousTick, RefreshTime };

std::string to_string(PairingScheme scheme);
PairingScheme parse_scheme(const std::string& name);  // "a0" | "prev-tick" | "refresh"

/// Synchronised pairs of ticks. Each (t1[i], x[i]) is a real tick of asset 1
/// and each (t2[i], y[i]) a real tick of asset 2; no interpolation.
/// For A0 and refresh-time the per-asset times are strictly increasing.
/// Previous-tick output may repeat one asset's tick (zero return) but never
/// both at once.
struct PairedSeries {
  std::vector<double> t1, x;
  std::vector<double> t2, y;
  PairingScheme scheme = PairingScheme::A0;
  double delta = 0.0;  // grid spacing, previous-tick only

  /// Raw tick counts of the inputs (0 when unknown, e.g. read back from CSV).
  std::size_t raw1 = 0, raw2 = 0;

  std::size_t size() const noexcept { return t1.size(); }
};

/// Configuration of two consecutive pairs (the ordering of the four
/// timestamps): 1 = asset-2 interval inside asset-1 interval, 2 = asset-2
/// interval starts and ends first, 3 = asset-1 interval starts and ends first,
/// 4 = asset-1 interval inside asset-2 interval. Boundary ties resolve
/// toward 1.
int configuration(double t1_prev, double t2_prev, double t1_cur, double t2_cur) noexcept;

/// Overlap of the two interarrivals behind a pair of returns.
inline double overlap(double t1_prev, double t2_prev, double t1_cur, double t2_cur) noexcept {
  const double lo = t1_prev > t2_prev ? t1_prev : t2_prev;
  const double hi = t1_cur < t2_cur ? t1_cur : t2_cur;
  return hi - lo;
}

struct PairDiagnostics {
  std::vector<double> overlaps;  // I_i, length n - 1
  std::vector<int> configs;      // 1..4, length n - 1
  double m1 = 0.0, m2 = 0.0, mI = 0.0;
  double loss1 = 0.0, loss2 = 0.0;

  /// √(m1·m2)/mI, the empirical correction factor.
  double correction_factor() const;
};

/// The pairing method: walks both tick streams, pairing each refresh tick with
/// the other asset's latest earlier tick while keeping both transaction times.
PairedSeries pair_a0(const TickSeries& a, const TickSeries& b);

/// Refresh-time sampling: refresh instants τ_j = max of both assets' first
/// ticks after τ_{j-1}; each pair is the last tick of each asset at or before
/// τ_j. Produces the same pairs as pair_a0 by a different route.
PairedSeries pair_refresh_time(const TickSeries& a, const TickSeries& b);

/// Previous-tick sampling on the grid τ_j = j·δ, j ≥ 1, τ_j ≤ the last tick of
/// either asset (or that last tick alone when δ exceeds it). Grid points
/// before either asset has traded are skipped; consecutive identical pairs
/// are collapsed.
PairedSeries pair_previous_tick(const TickSeries& a, const TickSeries& b, double delta);

/// Dispatches on scheme; `delta` is only read for previous-tick.
PairedSeries pair(const TickSeries& a, const TickSeries& b, PairingScheme scheme, double delta = 0.0);

PairDiagnostics diagnostics(const PairedSeries& p);

/// Paired log-returns (x[i]-x[i-1], y[i]-y[i-1]).
struct PairedReturns {
  std::vector<double> r1, r2;
};
PairedReturns paired_returns(const PairedSeries& p);

}  // namespace nscop
