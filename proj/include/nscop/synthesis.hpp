#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "nscop/copulas.hpp"
#include "nscop/market_data.hpp"

namespace nscop {

/// Nonsynchronous two-asset generator. A single Poisson stream of rate
/// λ1+λ2 carries synchronous return pairs drawn from the copula and margins,
/// each scaled by √(interarrival); the event set is then split at random
/// between the two assets.
struct SimSpec {
  CopulaModel model;
  MarginPair margins{MarginSpec::normal(), MarginSpec::normal()};
  double lambda1 = 1.0, lambda2 = 1.0;

  /// Count mode (default): exactly n1 + n2 events, n2 of them chosen
  /// uniformly for asset 2. Horizon mode: all events in (0, horizon], with
  /// n2 ~ Binomial(N, λ2/(λ1+λ2)).
  std::size_t n1 = 1000, n2 = 1000;
  std::optional<double> horizon;

  /// No deletion: both assets observe every event.
  bool synchronous = false;

  double log_price0 = std::log(100.0);
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimResult {
  TickSeries a, b;
  CopulaModel truth;
  double true_tau = 0.0;
};

SimResult simulate(const SimSpec& spec);

}  // namespace nscop
