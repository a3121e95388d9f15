#include "nscop/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "nscop/bivariate.hpp"
#include "nscop/errors.hpp"
#include "nscop/estimators.hpp"
#include "nscop/random.hpp"
#include "nscop/synthesis.hpp"

namespace nscop {

namespace {

// Type-7 sample quantile of a sorted vector.
double sorted_quantile(const std::vector<double>& s, double p) {
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::InvalidParameter, "level must lie in (0,1)");
}

// Smallest τ in [lo, hi] with mean_at(τ) = y, for a curve increasing on [lo, hi].
double invert_increasing(const CorrectionCurve& c, double y, double lo, double hi) {
  if (y <= c.mean_at(lo)) return lo;
  if (y >= c.mean_at(hi)) return hi;
  const auto [a0, b, cc] = c.coeffs;
  const double a = a0 - y;
  double root;
  if (std::abs(cc) < 1e-14) {
    root = -a / b;
  } else {
    // numerically stable quadratic formula, pick the root inside [lo, hi]
    const double disc = std::max(0.0, b * b - 4.0 * cc * a);
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    const double r1 = q / cc, r2 = q != 0.0 ? a / q : r1;
    root = (r1 >= lo && r1 <= hi) ? r1 : r2;
  }
  return std::clamp(root, lo, hi);
}

}  // namespace

std::array<double, 2> CorrectionCurve::monotone_region() const noexcept {
  const double c = coeffs[2], b = coeffs[1];
  if (std::abs(c) < 1e-14) return {-1.0, 1.0};
  const double vertex = -b / (2.0 * c);
  if (c < 0.0) return {-1.0, std::clamp(vertex, -1.0, 1.0)};
  return {std::clamp(vertex, -1.0, 1.0), 1.0};
}

void CorrectionCurve::bands(double level, std::vector<double>& lo, std::vector<double>& hi) const {
  check_level(level);
  lo.resize(replicates.size());
  hi.resize(replicates.size());
  for (std::size_t k = 0; k < replicates.size(); ++k) {
    auto s = replicates[k];
    std::sort(s.begin(), s.end());
    lo[k] = sorted_quantile(s, (1.0 - level) / 2.0);
    hi[k] = sorted_quantile(s, (1.0 + level) / 2.0);
  }
}

std::vector<double> CurveSpec::default_grid(Family family, std::size_t k) {
  const bool elliptical = family == Family::Gaussian || family == Family::StudentT;
  const double lo = elliptical ? -0.75 : 0.02, hi = 0.75;
  std::vector<double> g(k);
  for (std::size_t i = 0; i < k; ++i)
    g[i] = k == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
  return g;
}

std::array<double, 3> fit_quadratic(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3)
    fail(ErrorKind::InsufficientData, "quadratic fit needs at least 3 points");
  // centre x for conditioning, then solve the 3x3 normal equations
  double xm = 0.0;
  for (double v : x) xm += v;
  xm /= static_cast<double>(x.size());
  double m[3][4] = {};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - xm;
    const double basis[3] = {1.0, d, d * d};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += basis[r] * basis[c];
      m[r][3] += basis[r] * y[i];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-300) fail(ErrorKind::CalibrationFailure, "quadratic fit is singular");
    std::swap(m[col], m[piv]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  const double p0 = m[0][3] / m[0][0], p1 = m[1][3] / m[1][1], p2 = m[2][3] / m[2][2];
  // expand p0 + p1 (x - xm) + p2 (x - xm)^2
  return {p0 - p1 * xm + p2 * xm * xm, p1 - 2.0 * p2 * xm, p2};
}

CorrectionCurve build_curve(const CurveSpec& spec) {
  const std::size_t k = spec.grid.size();
  if (k < 5) fail(ErrorKind::InvalidParameter, "calibration grid needs at least 5 points");
  if (spec.n_rep < 50) fail(ErrorKind::InvalidParameter, "calibration needs at least 50 replicates per grid point");
  if (spec.n_ticks < 10) fail(ErrorKind::InvalidParameter, "calibration needs n_ticks >= 10");
  std::vector<CopulaModel> models;
  for (double tau : spec.grid) models.push_back(param_of_tau(spec.family, tau, spec.df));

  CorrectionCurve curve;
  curve.family = spec.family;
  curve.df = spec.df;
  curve.grid_taus = spec.grid;
  curve.replicates.assign(k, std::vector<double>(spec.n_rep));
  curve.lambda1 = spec.arrival.lambda1;
  curve.lambda2 = spec.arrival.lambda2;
  curve.n_ticks = spec.n_ticks;
  curve.margins = spec.margins.first.describe() + ";" + spec.margins.second.describe();
  curve.synchronous = spec.synchronous;
  curve.seed = spec.seed;

  parallel_for(k * spec.n_rep, [&](std::size_t cell) {
    const std::size_t g = cell / spec.n_rep, r = cell % spec.n_rep;
    SimSpec sim;
    sim.model = models[g];
    sim.margins = spec.margins;
    sim.lambda1 = spec.arrival.lambda1;
    sim.lambda2 = spec.arrival.lambda2;
    sim.n1 = sim.n2 = spec.n_ticks;
    sim.synchronous = spec.synchronous;
    sim.seed = substream_seed(spec.seed, g, r);
    const auto data = simulate(sim);
    curve.replicates[g][r] = kendall_tau(pair_a0(data.a, data.b), TauBasis::AllPairs).tau_hat;
  });

  std::vector<double> xs, ys;
  for (std::size_t g = 0; g < k; ++g)
    for (double v : curve.replicates[g]) {
      xs.push_back(spec.grid[g]);
      ys.push_back(v);
    }
  curve.coeffs = fit_quadratic(xs, ys);
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) ssr += std::pow(ys[i] - curve.mean_at(xs[i]), 2);
  curve.resid_scale = std::sqrt(ssr / static_cast<double>(xs.size() - 3));

  const auto [lo, hi] = std::minmax_element(spec.grid.begin(), spec.grid.end());
  if (!(curve.slope_at(*lo) > 0.0 && curve.slope_at(*hi) > 0.0))
    fail(ErrorKind::CalibrationFailure, "fitted calibration curve is not increasing over the grid");
  curve.bands(0.95, curve.band_lo, curve.band_hi);
  for (std::size_t g = 0; g < k; ++g) {
    const double m = curve.mean_at(spec.grid[g]);
    if (!(curve.band_lo[g] < m && m < curve.band_hi[g]))
      fail(ErrorKind::CalibrationFailure, "quantile bands do not bracket the fitted curve");
  }
  return curve;
}

std::string curve_to_json(const CorrectionCurve& c) {
  nlohmann::json j;
  j["family"] = to_string(c.family);
  j["df"] = c.df;
  j["grid_taus"] = c.grid_taus;
  j["quad_coeffs"] = c.coeffs;
  j["resid_scale"] = c.resid_scale;
  j["band_lo"] = c.band_lo;
  j["band_hi"] = c.band_hi;
  j["replicates"] = c.replicates;
  j["meta"] = {{"lambda1", c.lambda1}, {"lambda2", c.lambda2}, {"n_ticks", c.n_ticks},
               {"margins", c.margins},  {"synchronous", c.synchronous}, {"seed", c.seed},
               {"rng", std::string(kRngName)}, {"version", NSCOP_VERSION}};
  return j.dump(2);
}

CorrectionCurve curve_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    CorrectionCurve c;
    c.family = parse_family(j.at("family").get<std::string>());
    c.df = j.value("df", 8);
    c.grid_taus = j.at("grid_taus").get<std::vector<double>>();
    c.coeffs = j.at("quad_coeffs").get<std::array<double, 3>>();
    c.resid_scale = j.at("resid_scale").get<double>();
    c.band_lo = j.at("band_lo").get<std::vector<double>>();
    c.band_hi = j.at("band_hi").get<std::vector<double>>();
    c.replicates = j.value("replicates", std::vector<std::vector<double>>{});
    if (j.contains("meta")) {
      const auto& m = j["meta"];
      c.lambda1 = m.value("lambda1", 1.0);
      c.lambda2 = m.value("lambda2", 1.0);
      c.n_ticks = m.value("n_ticks", std::size_t{0});
      c.margins = m.value("margins", std::string{});
      c.synchronous = m.value("synchronous", false);
      c.seed = m.value("seed", std::uint64_t{0});
    }
    if (c.grid_taus.size() < 2 || c.band_lo.size() != c.grid_taus.size() ||
        c.band_hi.size() != c.grid_taus.size() || !(c.resid_scale >= 0.0))
      fail(ErrorKind::MalformedInput, "correction curve JSON is inconsistent");
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedInput, std::string("bad correction curve JSON: ") + e.what());
  }
}

void save_curve(const std::filesystem::path& path, const CorrectionCurve& curve) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::MalformedInput, "cannot write " + path.string());
  out << curve_to_json(curve) << '\n';
}

CorrectionCurve load_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MalformedInput, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return curve_from_json(ss.str());
}

Correction correct_tau(const CorrectionCurve& curve, double tau_hat) {
  if (!std::isfinite(tau_hat)) fail(ErrorKind::InvalidParameter, "tau_hat must be finite");
  const auto [glo, ghi] = std::minmax_element(curve.grid_taus.begin(), curve.grid_taus.end());
  Correction r;
  r.extrapolated = tau_hat < curve.mean_at(*glo) || tau_hat > curve.mean_at(*ghi);
  r.tau = invert_increasing(curve, tau_hat, *glo, *ghi);
  return r;
}

std::string to_string(IntervalMethod m) {
  switch (m) {
    case IntervalMethod::QuadPrediction: return "quad";
    case IntervalMethod::QuantileInversion: return "quantile";
    case IntervalMethod::MisspecifiedElliptical: return "elliptical";
  }
  return "unknown";
}

IntervalMethod parse_interval_method(const std::string& name) {
  if (name == "quad") return IntervalMethod::QuadPrediction;
  if (name == "quantile") return IntervalMethod::QuantileInversion;
  if (name == "elliptical") return IntervalMethod::MisspecifiedElliptical;
  fail(ErrorKind::InvalidParameter, "unknown interval method '" + name + "' (quad|quantile|elliptical)");
}

IntervalEstimate interval_quad(const CorrectionCurve& curve, double tau_hat, double level) {
  check_level(level);
  if (!std::isfinite(tau_hat)) fail(ErrorKind::InvalidParameter, "tau_hat must be finite");
  const auto [rlo, rhi] = curve.monotone_region();
  const double half = norm_quantile(0.5 + level / 2.0) * curve.resid_scale;
  if (tau_hat - half > curve.mean_at(rhi) || tau_hat + half < curve.mean_at(rlo))
    fail(ErrorKind::CalibrationFailure, "prediction band does not reach the observed tau");
  IntervalEstimate e;
  e.level = level;
  e.method = IntervalMethod::QuadPrediction;
  e.lo = invert_increasing(curve, tau_hat - half, rlo, rhi);
  e.hi = invert_increasing(curve, tau_hat + half, rlo, rhi);
  e.point = invert_increasing(curve, tau_hat, rlo, rhi);
  const auto [glo, ghi] = std::minmax_element(curve.grid_taus.begin(), curve.grid_taus.end());
  e.extrapolated = e.point < *glo || e.point > *ghi;
  return e;
}

IntervalEstimate interval_quantile(const CorrectionCurve& curve, double tau_hat, double level) {
  check_level(level);
  if (!std::isfinite(tau_hat)) fail(ErrorKind::InvalidParameter, "tau_hat must be finite");
  std::vector<double> blo, bhi;
  if (!curve.replicates.empty() && !curve.replicates.front().empty()) {
    curve.bands(level, blo, bhi);
  } else if (std::abs(level - 0.95) < 1e-12) {
    blo = curve.band_lo;
    bhi = curve.band_hi;
  } else {
    fail(ErrorKind::InvalidParameter, "curve carries 95% bands only; replicates are needed for other levels");
  }
  const auto& g = curve.grid_taus;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  // Each segment: lower and upper band are linear in s ∈ [0,1]; the feasible
  // set {s : lower(s) ≤ tau_hat ≤ upper(s)} is an interval.
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    double s0 = 0.0, s1 = 1.0;
    auto restrict = [&](double f0, double f1, bool want_le) {
      // want f(s) ≤ tau_hat (want_le) or f(s) ≥ tau_hat
      const double d0 = want_le ? tau_hat - f0 : f0 - tau_hat;
      const double d1 = want_le ? tau_hat - f1 : f1 - tau_hat;
      if (d0 >= 0.0 && d1 >= 0.0) return;
      if (d0 < 0.0 && d1 < 0.0) {
        s0 = 1.0;
        s1 = 0.0;
        return;
      }
      const double cross = d0 / (d0 - d1);
      if (d0 < 0.0)
        s0 = std::max(s0, cross);
      else
        s1 = std::min(s1, cross);
    };
    restrict(blo[k], blo[k + 1], true);
    restrict(bhi[k], bhi[k + 1], false);
    if (s0 > s1) continue;
    const double t0 = g[k] + s0 * (g[k + 1] - g[k]);
    const double t1 = g[k] + s1 * (g[k + 1] - g[k]);
    lo = std::min(lo, t0);
    hi = std::max(hi, t1);
  }
  if (!(lo <= hi)) fail(ErrorKind::CalibrationFailure, "observed tau lies outside every quantile band");
  IntervalEstimate e;
  e.level = level;
  e.method = IntervalMethod::QuantileInversion;
  e.lo = lo;
  e.hi = hi;
  e.point = std::clamp(correct_tau(curve, tau_hat).tau, lo, hi);
  e.extrapolated = correct_tau(curve, tau_hat).extrapolated;
  return e;
}

IntervalEstimate interval_misspecified(const PairedSeries& paired, double level) {
  check_level(level);
  const auto cc = corrected_correlation(paired, level);
  auto to_tau = [](double r) { return 2.0 / std::numbers::pi * std::asin(r); };
  IntervalEstimate e;
  e.level = level;
  e.method = IntervalMethod::MisspecifiedElliptical;
  e.point = to_tau(cc.theta_hat);
  e.lo = to_tau(cc.ci->lo);
  e.hi = to_tau(cc.ci->hi);
  return e;
}

}  // namespace nscop
