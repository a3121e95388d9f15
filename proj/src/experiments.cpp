#include "nscop/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "nscop/arrival_theory.hpp"
#include "nscop/bivariate.hpp"
#include "nscop/calibration.hpp"
#include "nscop/errors.hpp"
#include "nscop/estimators.hpp"
#include "nscop/pairing.hpp"
#include "nscop/random.hpp"
#include "nscop/synthesis.hpp"

namespace nscop {

namespace {

// stream ids keep the tables' random numbers apart under one master seed
constexpr std::uint64_t kTable12Stream = 0x1000;
constexpr std::uint64_t kTable3Stream = 0x3000;
constexpr std::uint64_t kCoverageStream = 0x4000;
constexpr std::uint64_t kCurveStream = 0x5000;
constexpr std::uint64_t kPivotStream = 0x6000;

std::string header(const std::string& id, const ExperimentOptions& opt) {
  std::ostringstream os;
  os << "# table=" << id << "\n# version=" << NSCOP_VERSION << "\n# rng=" << kRngName
     << "\n# seed=" << opt.seed << "\n# n_rep=" << opt.n_rep << "\n";
  return os.str();
}

}  // namespace

Summary summarize(const std::vector<double>& v, double truth) {
  Summary s;
  if (v.empty()) return s;
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0, se = 0.0;
  for (double x : v) {
    ss += (x - s.mean) * (x - s.mean);
    se += (x - truth) * (x - truth);
  }
  s.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.mse = se / n;
  return s;
}

std::vector<std::pair<double, std::size_t>> table12_cells() {
  std::vector<std::pair<double, std::size_t>> cells;
  for (std::size_t n : {800, 2000, 5000})
    for (double rho : {-0.4, 0.1, 0.2, 0.8}) cells.emplace_back(rho, n);
  return cells;
}

std::vector<Table12Cell> run_table12(const std::vector<std::pair<double, std::size_t>>& cells,
                                     const ExperimentOptions& opt) {
  std::vector<Table12Cell> out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto [rho, n] = cells[c];
    std::vector<double> prev(opt.n_rep), refresh(opt.n_rep), corr(opt.n_rep);
    parallel_for(opt.n_rep, [&](std::size_t r) {
      SimSpec spec;
      spec.model = CopulaModel::gaussian(rho);
      spec.n1 = spec.n2 = n;
      spec.seed = substream_seed(opt.seed, kTable12Stream + c, r);
      const auto sim = simulate(spec);
      const auto paired = pair_a0(sim.a, sim.b);
      const auto cc = corrected_correlation(paired, std::nullopt);
      refresh[r] = cc.rho_hat;
      corr[r] = cc.theta_hat;
      const auto rates = estimate_rates(sim.a, sim.b);
      const double delta = 1.0 / rates.lambda1 + 1.0 / rates.lambda2;
      const auto pt = paired_returns(pair_previous_tick(sim.a, sim.b, delta));
      prev[r] = pearson(pt.r1, pt.r2);
    });
    out.push_back({rho, n, summarize(prev, rho), summarize(refresh, rho), summarize(corr, rho)});
  }
  return out;
}

std::vector<Table3Row> run_table3(const ExperimentOptions& opt) {
  std::vector<Table3Row> rows = {
      {"(t(5), t(7))", {MarginSpec::student_t(5), MarginSpec::student_t(7)}, {}, {}},
      {"(N(0,2), N(0,4))", {MarginSpec::normal(0, std::sqrt(2.0)), MarginSpec::normal(0, 2.0)}, {}, {}},
      {"(t(4), N(0,3))", {MarginSpec::student_t(4), MarginSpec::normal(0, std::sqrt(3.0))}, {}, {}},
  };
  const double rho = -0.4;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> unc(opt.n_rep), corr(opt.n_rep);
    parallel_for(opt.n_rep, [&](std::size_t r) {
      SimSpec spec;
      spec.model = CopulaModel::student_t(rho, 8);
      spec.margins = rows[i].margins;
      spec.n1 = spec.n2 = opt.table3_n;
      spec.seed = substream_seed(opt.seed, kTable3Stream + i, r);
      const auto sim = simulate(spec);
      const auto cc = corrected_correlation(pair_a0(sim.a, sim.b), std::nullopt);
      unc[r] = cc.rho_hat;
      corr[r] = cc.theta_hat;
    });
    rows[i].uncorrected = summarize(unc, rho);
    rows[i].corrected = summarize(corr, rho);
  }
  return rows;
}

std::vector<std::pair<Family, double>> coverage_rows() {
  std::vector<std::pair<Family, double>> rows;
  for (Family f : {Family::Clayton, Family::Gumbel})
    for (double tau : {0.1, 0.2, 0.3, 0.5}) rows.emplace_back(f, tau);
  return rows;
}

std::vector<CoverageRow> run_coverage(const std::vector<std::pair<Family, double>>& rows,
                                      const ExperimentOptions& opt) {
  std::vector<std::pair<Family, CorrectionCurve>> curves;
  auto curve_for = [&](Family f) -> const CorrectionCurve& {
    for (const auto& [fam, c] : curves)
      if (fam == f) return c;
    CurveSpec spec;
    spec.family = f;
    spec.grid = CurveSpec::default_grid(f, opt.cal_k);
    spec.n_rep = opt.cal_rep;
    spec.n_ticks = opt.cal_ticks;
    spec.seed = substream_seed(opt.seed, kCurveStream, static_cast<std::uint64_t>(f));
    curves.emplace_back(f, build_curve(spec));
    return curves.back().second;
  };

  std::vector<CoverageRow> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto [family, tau] = rows[i];
    const auto& curve = curve_for(family);
    const auto model = param_of_tau(family, tau);
    std::vector<std::array<double, 3>> lo(opt.n_rep), hi(opt.n_rep);
    std::vector<std::array<bool, 3>> ok(opt.n_rep);
    std::vector<double> unc(opt.n_rep);
    parallel_for(opt.n_rep, [&](std::size_t r) {
      SimSpec spec;
      spec.model = model;
      spec.n1 = spec.n2 = opt.cal_ticks;
      spec.seed = substream_seed(opt.seed, kCoverageStream + i, r);
      const auto sim = simulate(spec);
      const auto paired = pair_a0(sim.a, sim.b);
      const double t = kendall_tau(paired, TauBasis::AllPairs).tau_hat;
      unc[r] = t;
      auto attempt = [&](int m, auto&& make) {
        try {
          const IntervalEstimate e = make();
          lo[r][m] = e.lo;
          hi[r][m] = e.hi;
          ok[r][m] = true;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::CalibrationFailure) throw;
          ok[r][m] = false;
        }
      };
      attempt(0, [&] { return interval_quad(curve, t, 0.95); });
      attempt(1, [&] { return interval_quantile(curve, t, 0.95); });
      attempt(2, [&] { return interval_misspecified(paired, 0.95); });
    });
    CoverageRow row;
    row.family = family;
    row.tau = tau;
    row.mean_uncorrected = std::accumulate(unc.begin(), unc.end(), 0.0) / static_cast<double>(opt.n_rep);
    for (int m = 0; m < 3; ++m) {
      std::size_t hits = 0, formed = 0;
      double len = 0.0;
      for (std::size_t r = 0; r < opt.n_rep; ++r) {
        if (!ok[r][m]) {
          ++row.failures[m];
          continue;
        }
        ++formed;
        len += hi[r][m] - lo[r][m];
        if (lo[r][m] <= tau && tau <= hi[r][m]) ++hits;
      }
      row.coverage[m] = static_cast<double>(hits) / static_cast<double>(opt.n_rep);
      row.length[m] = formed ? len / static_cast<double>(formed) : 0.0;
    }
    out.push_back(row);
  }
  return out;
}

std::vector<double> fisher_pivots(double rho, std::size_t n, std::size_t n_rep, std::uint64_t seed) {
  std::vector<double> z(n_rep);
  parallel_for(n_rep, [&](std::size_t r) {
    SimSpec spec;
    spec.model = CopulaModel::gaussian(rho);
    spec.n1 = spec.n2 = n;
    spec.seed = substream_seed(seed, kPivotStream, r);
    const auto sim = simulate(spec);
    const auto cc = corrected_correlation(pair_a0(sim.a, sim.b), std::nullopt);
    const double m = static_cast<double>(cc.n - 1);
    z[r] = std::sqrt(m) * (std::atanh(cc.rho_hat) - std::atanh(rho / cc.w));
  });
  return z;
}

namespace {

// CDF of a scale mixture of normals: mean over i of Φ(x/s_i).
struct MixtureCdf {
  std::vector<double> scales;
  double operator()(double x) const {
    double s = 0.0;
    for (double v : scales) s += norm_cdf(x / v);
    return s / static_cast<double>(scales.size());
  }
  double pdf(double x) const {
    double s = 0.0;
    for (double v : scales) s += std::exp(-0.5 * x * x / (v * v)) / v;
    return s / (static_cast<double>(scales.size()) * std::sqrt(2.0 * std::numbers::pi));
  }
  // safeguarded Newton
  double quantile(double p) const {
    double rms = 0.0;
    for (double v : scales) rms += v * v;
    rms = std::sqrt(rms / static_cast<double>(scales.size()));
    double lo = -60.0 * rms, hi = 60.0 * rms, x = rms * norm_quantile(p);
    for (int it = 0; it < 60; ++it) {
      const double f = (*this)(x) - p;
      if (std::abs(f) < 1e-13) break;
      (f < 0.0 ? lo : hi) = x;
      const double d = pdf(x);
      double next = d > 0.0 ? x - f / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      x = next;
    }
    return x;
  }
};

}  // namespace

std::vector<double> plugin_distances(double rho, const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  const std::size_t n_max = *std::max_element(sizes.begin(), sizes.end());
  SimSpec spec;
  spec.model = CopulaModel::gaussian(rho);
  spec.n1 = spec.n2 = n_max;
  spec.seed = seed;
  const auto sim = simulate(spec);
  const auto truth = CopulaModel::gaussian(rho);
  std::vector<double> out;
  for (std::size_t n : sizes) {
    // first n ticks of asset 1 and every asset-2 tick up to the same instant
    const double cut = sim.a.times()[n - 1];
    auto prefix = [&](const TickSeries& s, double until) {
      std::vector<double> t, lp;
      for (std::size_t i = 0; i < s.size() && s.times()[i] <= until; ++i) {
        t.push_back(s.times()[i]);
        lp.push_back(s.log_prices()[i]);
      }
      return TickSeries(std::move(t), std::move(lp), s.asset_id());
    };
    const auto paired = pair_a0(prefix(sim.a, cut), prefix(sim.b, cut));
    const auto cc = corrected_correlation(paired, std::nullopt);
    const auto plugin = plugin_copula(paired, std::clamp(cc.theta_hat, -0.999, 0.999), Family::Gaussian);
    MixtureCdf f1, f2;
    for (std::size_t i = 1; i < paired.size(); ++i) {
      f1.scales.push_back(std::sqrt(paired.t1[i] - paired.t1[i - 1]));
      f2.scales.push_back(std::sqrt(paired.t2[i] - paired.t2[i - 1]));
    }
    std::vector<double> g1, g2;
    for (int q = 1; q <= 20; ++q) {
      g1.push_back(f1.quantile(q / 21.0));
      g2.push_back(f2.quantile(q / 21.0));
    }
    double sup = 0.0;
    for (int a = 0; a < 20; ++a)
      for (int b = 0; b < 20; ++b) {
        // F_i(g_i[q]) = (q+1)/21 by construction
        const double target = copula_cdf(truth, (a + 1) / 21.0, (b + 1) / 21.0);
        sup = std::max(sup, std::abs(plugin.evaluate(g1[a], g2[b]) - target));
      }
    out.push_back(sup);
  }
  return out;
}

std::pair<double, double> ks_normal(std::vector<double> x) {
  if (x.empty()) fail(ErrorKind::InsufficientData, "KS test needs data");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = norm_cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return {d, std::clamp(p, 0.0, 1.0)};
}

std::string reproduce(const std::string& id, const ExperimentOptions& opt) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  if (id == "table1" || id == "table2") {
    auto cells = table12_cells();
    if (id == "table2")
      std::erase_if(cells, [](const auto& c) { return c.first == 0.1; });
    const auto res = run_table12(cells, opt);
    os << header(id, opt) << "# model=gaussian copula, N(0,1) margins, lambda1=lambda2=1, n ticks per asset\n"
       << "# previous-tick delta=1/lambda1_hat+1/lambda2_hat\n";
    if (id == "table1") {
      os << "rho,n,prev_tick_mean,prev_tick_sd,refresh_mean,refresh_sd,corrected_mean,corrected_sd\n";
      for (const auto& c : res)
        os << std::setprecision(1) << c.rho << "," << c.n << std::setprecision(4) << ","
           << c.previous_tick.mean << "," << c.previous_tick.sd << "," << c.refresh.mean << ","
           << c.refresh.sd << "," << c.corrected.mean << "," << c.corrected.sd << "\n";
    } else {
      os << "rho,n,mse_prev_tick,mse_refresh,mse_corrected\n";
      for (const auto& c : res)
        os << std::setprecision(1) << c.rho << "," << c.n << std::setprecision(4) << ","
           << c.previous_tick.mse << "," << c.refresh.mse << "," << c.corrected.mse << "\n";
    }
    return os.str();
  }
  if (id == "table3") {
    const auto rows = run_table3(opt);
    os << header(id, opt) << "# model=t copula df 8, rho=-0.4, n=" << opt.table3_n << " ticks per asset\n"
       << "margins,uncorrected_mean,uncorrected_sd,corrected_mean,corrected_sd\n" << std::setprecision(4);
    for (const auto& r : rows)
      os << "\"" << r.label << "\"," << r.uncorrected.mean << "," << r.uncorrected.sd << ","
         << r.corrected.mean << "," << r.corrected.sd << "\n";
    return os.str();
  }
  if (id == "coverage") {
    const auto rows = run_coverage(coverage_rows(), opt);
    os << header(id, opt) << "# calibration k=" << opt.cal_k << " n_rep=" << opt.cal_rep
       << " n_ticks=" << opt.cal_ticks << ", level=0.95\n"
       << "copula,tau,cp_quad,il_quad,cp_quantile,il_quantile,cp_elliptical,il_elliptical\n"
       << std::setprecision(3);
    for (const auto& r : rows) {
      os << to_string(r.family) << "," << std::setprecision(1) << r.tau << std::setprecision(3);
      for (int m = 0; m < 3; ++m) os << "," << r.coverage[m] << "," << r.length[m];
      os << "\n";
    }
    return os.str();
  }
  fail(ErrorKind::InvalidParameter, "unknown table '" + id + "' (table1|table2|table3|coverage)");
}

}  // namespace nscop
