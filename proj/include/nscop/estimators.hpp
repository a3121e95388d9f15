#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nscop/copulas.hpp"
#include "nscop/pairing.hpp"

namespace nscop {

double pearson(std::span<const double> x, std::span<const double> y);

struct ConfidenceInterval {
  double lo = 0.0, hi = 0.0, level = 0.95;
};

struct CorrectedCorrelation {
  double rho_hat = 0.0;    // paired-return Pearson correlation
  double w = 1.0;          // √(m1·m2)/mI
  double theta_hat = 0.0;  // w·rho_hat, clamped to [-1,1]
  bool clamped = false;
  std::size_t n = 0;       // number of pairs
  std::optional<ConfidenceInterval> ci;
  PairDiagnostics diag;
};

/// Corrected correlation with a variance-stabilised interval:
/// f(θ) = atanh(θ/w) inverted around f(θ̂) ± z/√(n-1).
/// Pass level = nullopt to skip the interval.
CorrectedCorrelation corrected_correlation(const PairedSeries& p, std::optional<double> level = 0.95);

/// Maps rho_hat and w into theta/CI; shared by corrected_correlation and tests.
CorrectedCorrelation correct_correlation(double rho_hat, double w, std::size_t n_returns,
                                         std::optional<double> level);

enum class TauBasis { AllPairs, SameConfig };
std::string to_string(TauBasis basis);

struct TauEstimate {
  double tau_hat = 0.0;
  TauBasis basis = TauBasis::AllPairs;
  std::vector<int> labels;  // SameConfig only
  std::size_t n_used = 0;   // observations entering the estimate
  std::uint64_t concordant = 0, discordant = 0;
  std::uint64_t ties = 0;   // pairs tied in either coordinate, excluded
};

/// O(n log n) Kendall tau (Knight). Tied pairs are dropped from both the
/// numerator and the denominator.
TauEstimate kendall_tau(std::span<const double> x, std::span<const double> y);

/// O(n²) definition, kept as a reference implementation.
TauEstimate kendall_tau_brute(std::span<const double> x, std::span<const double> y);

/// Kendall tau of paired returns. SameConfig only compares returns whose
/// configuration labels are equal and in `labels`.
TauEstimate kendall_tau(const PairedSeries& p, TauBasis basis, std::vector<int> labels = {1, 4});

struct McValue {
  double mean = 0.0, se = 0.0;
};

struct LemmaReport {
  int config = 4;
  std::size_t n_mc = 0;
  McValue sign_a;        // E sign(A), the synchronous tau
  McValue sign_ab;       // E sign(A+B), the observed tau
  McValue sign_a_given_disagree;  // E(sign A | sign A ≠ sign B)
  McValue disagree_shift;   // the two above, differenced
  McValue shrinkage;     // |E sign A| − |E sign(A+B)| via paired draws
  bool underestimates = false;  // shrinkage > 0
  bool same_sign = false;
  McValue split_lhs;      // E sign(A+B)
  McValue split_rhs;      // E(sign A | sign A ≠ sign B, |A|>|B|)·P(|A|>|B|)
  McValue split_diff;
};

/// Monte Carlo of two same-configuration pairs: overlaps u1, u2 and the
/// non-overlapping pieces ε, η are unit exponentials; overlap increments come
/// from the copula and margins, the rest from the margin alone, all scaled by
/// √length. config 4 puts the extra pieces on asset 2, config 1 on asset 1.
LemmaReport lemma_checks(int config, const CopulaModel& model, const MarginPair& margins,
                         std::size_t n_mc, std::uint64_t seed);

}  // namespace nscop
