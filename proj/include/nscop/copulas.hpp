#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nscop/random.hpp"

namespace nscop {

struct PairedSeries;

enum class Family { Gaussian, StudentT, Clayton, Gumbel };

std::string to_string(Family family);
Family parse_family(const std::string& name);  // gaussian | t | clayton | gumbel

/// A bivariate copula. `param` is ρ ∈ (−1,1) for the elliptical families,
/// θ > 0 for Clayton and θ ≥ 1 for Gumbel. `df` is used by StudentT only.
struct CopulaModel {
  Family family = Family::Gaussian;
  double param = 0.0;
  int df = 0;

  static CopulaModel gaussian(double rho);
  static CopulaModel student_t(double rho, int df);
  static CopulaModel clayton(double theta);
  static CopulaModel gumbel(double theta);

  /// Checked constructor for any family; throws InvalidParameter.
  static CopulaModel make(Family family, double param, int df = 8);

  bool is_elliptical() const noexcept {
    return family == Family::Gaussian || family == Family::StudentT;
  }
  std::string describe() const;
};

double tau_of(const CopulaModel& m);

/// Inverse of tau_of within a family. Elliptical: tau ∈ (−1,1);
/// Clayton: (0,1); Gumbel: [0,1).
CopulaModel param_of_tau(Family family, double tau, int df = 8);

double copula_cdf(const CopulaModel& m, double u, double v);
double copula_density(const CopulaModel& m, double u, double v);
double copula_log_density(const CopulaModel& m, double u, double v);

struct UV {
  double u = 0.0;
  double v = 0.0;
};

/// Draws from the copula itself: elliptical via correlated normal / t
/// construction, Clayton via a Gamma frailty, Gumbel via a positive-stable
/// frailty.
std::vector<UV> sample_copula(const CopulaModel& m, std::size_t n, Rng& rng);

/// Univariate margin used to turn copula draws into returns.
struct MarginSpec {
  enum class Kind { Normal, StudentT };
  Kind kind = Kind::Normal;
  double mu = 0.0;
  double sigma = 1.0;  // standard deviation, Normal only
  double df = 5.0;     // StudentT only

  static MarginSpec normal(double mu = 0.0, double sigma = 1.0);
  static MarginSpec student_t(double df);
  /// "normal", "normal:mu,sigma", "t:df"
  static MarginSpec parse(const std::string& text);

  double quantile(double p) const;
  double cdf(double x) const;
  std::string describe() const;
};

using MarginPair = std::pair<MarginSpec, MarginSpec>;

struct Draw {
  double x = 0.0;
  double y = 0.0;
};

/// n draws of (F1⁻¹(U), F2⁻¹(V)); deterministic in `seed`.
std::vector<Draw> sample(const CopulaModel& m, const MarginPair& margins, std::size_t n,
                         std::uint64_t seed);

/// Right-continuous empirical CDF scaled by n/(n+1): #{x_i ≤ x}/(n+1).
/// ±∞ evaluate to exactly 0 and 1.
class EmpiricalMargin {
 public:
  explicit EmpiricalMargin(std::vector<double> sample);
  double operator()(double x) const;
  std::size_t size() const noexcept { return sorted_.size(); }
  std::span<const double> sorted_sample() const noexcept { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// (r1, r2) ↦ C(F̂1(r1), F̃2(r2); θ̂) over paired-return space.
class PluginCopula {
 public:
  PluginCopula(EmpiricalMargin m1, EmpiricalMargin m2, CopulaModel model)
      : margin1_(std::move(m1)), margin2_(std::move(m2)), model_(model) {}

  double evaluate(double r1, double r2) const;
  const CopulaModel& model() const noexcept { return model_; }
  const EmpiricalMargin& margin1() const noexcept { return margin1_; }
  const EmpiricalMargin& margin2() const noexcept { return margin2_; }

 private:
  EmpiricalMargin margin1_, margin2_;
  CopulaModel model_;
};

PluginCopula plugin_copula(const PairedSeries& paired, double theta_hat, Family family, int df = 8);

/// Rank/(n+1) pseudo-observations; ties get their average rank.
std::vector<UV> pseudo_observations(std::span<const double> x, std::span<const double> y);

struct FitOptions {
  /// Fixed Student-t degrees of freedom; when empty df is profiled over df_grid.
  std::optional<int> t_df;
  std::vector<int> df_grid = default_df_grid();

  static std::vector<int> default_df_grid();
};

struct FitResult {
  CopulaModel model;
  double loglik = 0.0;
  double aic = 0.0;
  int n_params = 1;
  bool at_boundary = false;  // optimum sits on the search boundary
};

/// Maximum pseudo-likelihood per family, ranked by ascending AIC.
std::vector<FitResult> fit_aic(std::span<const UV> pseudo, std::span<const Family> families,
                               const FitOptions& options = {});

}  // namespace nscop
