#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nscop/arrival_theory.hpp"
#include "nscop/copulas.hpp"
#include "nscop/pairing.hpp"

namespace nscop {

/// Monte Carlo map from true tau to the expected uncorrected (A0-paired,
/// all-pairs) Kendall tau, fitted as a + b·τ + c·τ² by least squares on every
/// replicate.
struct CorrectionCurve {
  Family family = Family::Clayton;
  int df = 8;
  std::vector<double> grid_taus;
  std::vector<std::vector<double>> replicates;  // [grid point][replicate]
  std::array<double, 3> coeffs{0.0, 1.0, 0.0};
  double resid_scale = 0.0;
  std::vector<double> band_lo, band_hi;  // per-grid 2.5% and 97.5% quantiles

  // provenance
  double lambda1 = 1.0, lambda2 = 1.0;
  std::size_t n_ticks = 0;
  std::string margins;
  bool synchronous = false;
  std::uint64_t seed = 0;

  double mean_at(double tau) const noexcept {
    return coeffs[0] + tau * (coeffs[1] + tau * coeffs[2]);
  }
  double slope_at(double tau) const noexcept { return coeffs[1] + 2.0 * coeffs[2] * tau; }

  /// Range [lo, hi] ⊂ [-1, 1] on which the fitted mean increases; the
  /// inversions below work there.
  std::array<double, 2> monotone_region() const noexcept;

  /// Per-grid quantile bands at `level` recomputed from the replicates.
  void bands(double level, std::vector<double>& lo, std::vector<double>& hi) const;
};

struct CurveSpec {
  Family family = Family::Clayton;
  int df = 8;
  PoissonPair arrival;
  MarginPair margins{MarginSpec::normal(), MarginSpec::normal()};
  std::vector<double> grid;
  std::size_t n_rep = 1000;
  std::size_t n_ticks = 330;  // ticks per asset
  bool synchronous = false;
  std::uint64_t seed = 0;

  static std::vector<double> default_grid(Family family, std::size_t k = 12);
};

CorrectionCurve build_curve(const CurveSpec& spec);

/// Least-squares quadratic (a, b, c) of y on x.
std::array<double, 3> fit_quadratic(std::span<const double> x, std::span<const double> y);

std::string curve_to_json(const CorrectionCurve& curve);
CorrectionCurve curve_from_json(const std::string& text);
void save_curve(const std::filesystem::path& path, const CorrectionCurve& curve);
CorrectionCurve load_curve(const std::filesystem::path& path);

struct Correction {
  double tau = 0.0;
  bool extrapolated = false;
};

/// Root of a + bτ + cτ² = tau_hat inside the grid span; out-of-range inputs
/// return the nearer grid edge with the flag set.
Correction correct_tau(const CorrectionCurve& curve, double tau_hat);

enum class IntervalMethod { QuadPrediction, QuantileInversion, MisspecifiedElliptical };
std::string to_string(IntervalMethod m);
IntervalMethod parse_interval_method(const std::string& name);  // quad | quantile | elliptical

struct IntervalEstimate {
  double point = 0.0, lo = 0.0, hi = 0.0, level = 0.95;
  IntervalMethod method = IntervalMethod::QuadPrediction;
  bool extrapolated = false;
};

/// {τ : |a+bτ+cτ² − tau_hat| ≤ z·resid_scale} over the monotone region.
IntervalEstimate interval_quad(const CorrectionCurve& curve, double tau_hat, double level);

/// {τ in the grid span : band_lo(τ) ≤ tau_hat ≤ band_hi(τ)}, bands linearly
/// interpolated between grid points.
IntervalEstimate interval_quantile(const CorrectionCurve& curve, double tau_hat, double level);

/// Treats the data as Gaussian-copula: corrected-correlation interval mapped
/// endpoint-wise through τ = (2/π)·asin θ.
IntervalEstimate interval_misspecified(const PairedSeries& paired, double level);

}  // namespace nscop
