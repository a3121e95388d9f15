#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nscop/copulas.hpp"

namespace nscop {

struct ExperimentOptions {
  std::uint64_t seed = 20240101;
  std::size_t n_rep = 100;
  // coverage table: calibration curve settings
  std::size_t cal_k = 12;
  std::size_t cal_rep = 1000;
  std::size_t cal_ticks = 330;
  // table 3 ticks per asset
  std::size_t table3_n = 1000;
};

struct Summary {
  double mean = 0.0, sd = 0.0, mse = 0.0;
};
Summary summarize(const std::vector<double>& values, double truth);

/// Gaussian copula, N(0,1) margins, unit intensities, n ticks per asset.
struct Table12Cell {
  double rho = 0.0;
  std::size_t n = 0;
  Summary previous_tick, refresh, corrected;
};
std::vector<Table12Cell> run_table12(const std::vector<std::pair<double, std::size_t>>& cells,
                                     const ExperimentOptions& opt);
std::vector<std::pair<double, std::size_t>> table12_cells();

/// t copula (df 8), ρ = -0.4, three margin pairs.
struct Table3Row {
  std::string label;
  MarginPair margins;
  Summary uncorrected, corrected;
};
std::vector<Table3Row> run_table3(const ExperimentOptions& opt);

struct CoverageRow {
  Family family = Family::Clayton;
  double tau = 0.0;
  std::array<double, 3> coverage{};  // quad, quantile, elliptical
  std::array<double, 3> length{};
  std::array<std::size_t, 3> failures{};  // intervals that could not be formed (counted as misses)
  double mean_uncorrected = 0.0;
};
std::vector<CoverageRow> run_coverage(const std::vector<std::pair<Family, double>>& rows,
                                      const ExperimentOptions& opt);
std::vector<std::pair<Family, double>> coverage_rows();

/// √(n-1)·(atanh(θ̂/w) − atanh(ρ/w)) per replicate, Gaussian copula.
std::vector<double> fisher_pivots(double rho, std::size_t n, std::size_t n_rep, std::uint64_t seed);

/// Sup over a 20×20 grid of |C(F̂1, F̃2; θ̂) − C(F1, F2; ρ)| with F_i the
/// paired-return margins implied by the realised pair intervals. One
/// replicate path per seed, observed through its first n ticks.
std::vector<double> plugin_distances(double rho, const std::vector<std::size_t>& sizes, std::uint64_t seed);

/// Kolmogorov–Smirnov statistic against N(0,1) and its asymptotic p-value.
std::pair<double, double> ks_normal(std::vector<double> sample);

/// CSV text for table1 | table2 | table3 | coverage, with '#' metadata lines.
std::string reproduce(const std::string& table_id, const ExperimentOptions& opt);

}  // namespace nscop
