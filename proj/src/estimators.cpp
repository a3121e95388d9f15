#include "nscop/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/random/exponential_distribution.hpp>

#include "nscop/bivariate.hpp"
#include "nscop/errors.hpp"
#include "nscop/random.hpp"

namespace nscop {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::MalformedInput, "pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) fail(ErrorKind::InsufficientData, "pearson needs at least 2 observations");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) fail(ErrorKind::InsufficientData, "pearson: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrectedCorrelation correct_correlation(double rho_hat, double w, std::size_t n_returns,
                                         std::optional<double> level) {
  CorrectedCorrelation c;
  c.rho_hat = rho_hat;
  c.w = w;
  const double raw = w * rho_hat;
  c.clamped = std::abs(raw) >= 1.0;
  c.theta_hat = std::clamp(raw, -1.0, 1.0);
  if (level) {
    if (!(*level > 0.0 && *level < 1.0)) fail(ErrorKind::InvalidParameter, "level must lie in (0,1)");
    const double z = norm_quantile(0.5 + *level / 2.0);
    const double half = z / std::sqrt(static_cast<double>(n_returns));
    ConfidenceInterval ci;
    ci.level = *level;
    if (std::abs(rho_hat) >= 1.0) {
      ci.lo = ci.hi = c.theta_hat;
    } else {
      // f(θ̂) = atanh(θ̂/w) = atanh(ρ̂); f⁻¹(s) = w·tanh(s) stays inside (−w, w)
      const double centre = std::atanh(rho_hat);
      ci.lo = std::clamp(w * std::tanh(centre - half), -1.0, 1.0);
      ci.hi = std::clamp(w * std::tanh(centre + half), -1.0, 1.0);
    }
    c.ci = ci;
  }
  return c;
}

CorrectedCorrelation corrected_correlation(const PairedSeries& p, std::optional<double> level) {
  if (p.size() < 10) fail(ErrorKind::InsufficientData, "corrected correlation needs at least 10 pairs");
  auto diag = diagnostics(p);
  const auto ret = paired_returns(p);
  auto c = correct_correlation(pearson(ret.r1, ret.r2), diag.correction_factor(), ret.r1.size(), level);
  c.n = p.size();
  c.diag = std::move(diag);
  return c;
}

std::string to_string(TauBasis basis) {
  return basis == TauBasis::AllPairs ? "all-pairs" : "same-config";
}

namespace {

std::uint64_t tied_pairs(std::span<const double> sorted) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const std::uint64_t k = j - i;
    total += k * (k - 1) / 2;
    i = j;
  }
  return total;
}

std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return swaps;
}

struct Counts {
  std::uint64_t concordant = 0, discordant = 0, ties = 0;
};

Counts knight(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[idx[i]];
    ys[i] = y[idx[i]];
  }
  const std::uint64_t n1 = tied_pairs(xs);
  std::uint64_t n3 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && xs[j] == xs[i] && ys[j] == ys[i]) ++j;
    const std::uint64_t k = j - i;
    n3 += k * (k - 1) / 2;
    i = j;
  }
  std::vector<double> buf(n);
  const std::uint64_t swaps = merge_count(ys, buf, 0, n);
  const std::uint64_t n2 = tied_pairs(ys);  // ys is now sorted
  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t untied = n0 - n1 - n2 + n3;
  return {untied - swaps, swaps, n0 - untied};
}

TauEstimate finish(Counts c, std::size_t n_used, TauBasis basis) {
  const std::uint64_t denom = c.concordant + c.discordant;
  if (denom == 0) fail(ErrorKind::InsufficientData, "kendall tau: no untied pairs");
  TauEstimate t;
  t.tau_hat = (static_cast<double>(c.concordant) - static_cast<double>(c.discordant)) / static_cast<double>(denom);
  t.basis = basis;
  t.n_used = n_used;
  t.concordant = c.concordant;
  t.discordant = c.discordant;
  t.ties = c.ties;
  return t;
}

void check_pair_input(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::MalformedInput, "kendall tau: length mismatch");
  if (x.size() < 2) fail(ErrorKind::InsufficientData, "kendall tau needs at least 2 observations");
}

}  // namespace

TauEstimate kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_pair_input(x, y);
  return finish(knight(x, y), x.size(), TauBasis::AllPairs);
}

TauEstimate kendall_tau_brute(std::span<const double> x, std::span<const double> y) {
  check_pair_input(x, y);
  Counts c;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double s = (x[i] - x[j]) * (y[i] - y[j]);
      if (s > 0) ++c.concordant;
      else if (s < 0) ++c.discordant;
      else ++c.ties;
    }
  return finish(c, x.size(), TauBasis::AllPairs);
}

TauEstimate kendall_tau(const PairedSeries& p, TauBasis basis, std::vector<int> labels) {
  const auto ret = paired_returns(p);
  if (basis == TauBasis::AllPairs) return kendall_tau(ret.r1, ret.r2);

  if (labels.empty()) fail(ErrorKind::InvalidParameter, "same-config tau needs at least one label");
  for (int l : labels)
    if (l < 1 || l > 4) fail(ErrorKind::InvalidParameter, "configuration labels are 1..4");
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const auto diag = diagnostics(p);
  Counts total;
  std::size_t used = 0;
  for (int l : labels) {
    std::vector<double> gx, gy;
    for (std::size_t i = 0; i < diag.configs.size(); ++i)
      if (diag.configs[i] == l) {
        gx.push_back(ret.r1[i]);
        gy.push_back(ret.r2[i]);
      }
    used += gx.size();
    if (gx.size() < 2) continue;
    const auto c = knight(gx, gy);
    total.concordant += c.concordant;
    total.discordant += c.discordant;
    total.ties += c.ties;
  }
  if (used < 2) fail(ErrorKind::InsufficientData, "fewer than 2 returns carry the requested configurations");
  auto t = finish(total, used, TauBasis::SameConfig);
  t.labels = std::move(labels);
  return t;
}

namespace {

McValue mean_se(const std::vector<double>& v) {
  McValue r;
  if (v.empty()) return r;
  const double n = static_cast<double>(v.size());
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return r;
}

double sgn(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

}  // namespace

LemmaReport lemma_checks(int config, const CopulaModel& model, const MarginPair& margins,
                         std::size_t n_mc, std::uint64_t seed) {
  if (config != 1 && config != 4) fail(ErrorKind::InvalidParameter, "lemma checks cover configurations 1 and 4");
  if (n_mc < 10000) fail(ErrorKind::InvalidParameter, "lemma checks need n_mc >= 10000");
  Rng rng(seed);
  boost::random::exponential_distribution<double> expo;
  // the margin that carries the non-overlapping pieces
  const MarginSpec& extra = config == 4 ? margins.second : margins.first;

  std::vector<double> sa(n_mc), sab(n_mc), same_mag(n_mc);
  std::vector<double> disagree, rhs_cond;
  std::size_t big_a = 0;
  for (std::size_t k = 0; k < n_mc; ++k) {
    const double u1 = expo(rng), u2 = expo(rng);
    const auto uv = sample_copula(model, 2, rng);
    const double x1 = margins.first.quantile(uv[0].u) * std::sqrt(u1);
    const double y1 = margins.second.quantile(uv[0].v) * std::sqrt(u1);
    const double x2 = margins.first.quantile(uv[1].u) * std::sqrt(u2);
    const double y2 = margins.second.quantile(uv[1].v) * std::sqrt(u2);
    double piece[4];
    for (double& q : piece) q = extra.quantile(uniform_open(rng)) * std::sqrt(expo(rng));
    const double rest = (piece[0] + piece[1]) - (piece[2] + piece[3]);
    const double a = (x1 - x2) * (y1 - y2);
    const double b = config == 4 ? (x1 - x2) * rest : rest * (y1 - y2);
    sa[k] = sgn(a);
    sab[k] = sgn(a + b);
    if (sgn(a) != sgn(b)) disagree.push_back(sgn(a));
    if (std::abs(a) > std::abs(b)) {
      ++big_a;
      if (sgn(a) != sgn(b)) rhs_cond.push_back(sgn(a));
    }
  }
  LemmaReport r;
  r.config = config;
  r.n_mc = n_mc;
  r.sign_a = mean_se(sa);
  r.sign_ab = mean_se(sab);
  r.sign_a_given_disagree = mean_se(disagree);
  r.disagree_shift = {r.sign_a_given_disagree.mean - r.sign_a.mean,
                   std::hypot(r.sign_a_given_disagree.se, r.sign_a.se)};
  const double orient = r.sign_a.mean >= 0.0 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n_mc; ++k) same_mag[k] = orient * (sa[k] - sab[k]);
  r.shrinkage = mean_se(same_mag);
  r.underestimates = std::abs(r.sign_ab.mean) < std::abs(r.sign_a.mean);
  r.same_sign = sgn(r.sign_ab.mean) == sgn(r.sign_a.mean);
  r.split_lhs = r.sign_ab;
  const double p_big = static_cast<double>(big_a) / static_cast<double>(n_mc);
  const auto cond = mean_se(rhs_cond);
  const double p_se = std::sqrt(p_big * (1.0 - p_big) / static_cast<double>(n_mc));
  r.split_rhs = {cond.mean * p_big, std::hypot(cond.se * p_big, cond.mean * p_se)};
  r.split_diff = {r.split_lhs.mean - r.split_rhs.mean, std::hypot(r.split_lhs.se, r.split_rhs.se)};
  return r;
}

}  // namespace nscop
