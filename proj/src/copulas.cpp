#include "nscop/copulas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "nscop/bivariate.hpp"
#include "nscop/errors.hpp"
#include "nscop/pairing.hpp"

namespace nscop {

namespace {

constexpr double kPi = std::numbers::pi;

double t_quantile(double df, double p) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), p);
}

double t_cdf(double df, double x) {
  return boost::math::cdf(boost::math::students_t_distribution<double>(df), x);
}

// log(u^-θ + v^-θ - 1) without overflow for large θ.
double clayton_log_sum(double theta, double u, double v) {
  const double a = -theta * std::log(u);
  const double b = -theta * std::log(v);
  const double m = std::max(a, b);
  const double rest = std::min(a, b) - m;
  return m + std::log1p(std::exp(rest) - std::exp(-m));
}

double gaussian_log_density(double rho, double a, double b) {
  const double r2 = 1.0 - rho * rho;
  return -0.5 * std::log(r2) - (rho * rho * (a * a + b * b) - 2.0 * rho * a * b) / (2.0 * r2);
}

double t_log_density(double rho, int df, double a, double b) {
  const double nu = df;
  const double r2 = 1.0 - rho * rho;
  const double norm = std::lgamma((nu + 2.0) / 2.0) + std::lgamma(nu / 2.0) -
                      2.0 * std::lgamma((nu + 1.0) / 2.0);
  const double q = (a * a - 2.0 * rho * a * b + b * b) / (nu * r2);
  return norm - 0.5 * std::log(r2) - (nu + 2.0) / 2.0 * std::log1p(q) +
         (nu + 1.0) / 2.0 * (std::log1p(a * a / nu) + std::log1p(b * b / nu));
}

double clayton_log_density(double theta, double u, double v) {
  return std::log1p(theta) - (theta + 1.0) * (std::log(u) + std::log(v)) -
         (2.0 + 1.0 / theta) * clayton_log_sum(theta, u, v);
}

double gumbel_log_density(double theta, double u, double v) {
  const double x = -std::log(u);
  const double y = -std::log(v);
  const double lx = std::log(x), ly = std::log(y);
  // log S = log(x^θ + y^θ), evaluated stably
  const double m = std::max(lx, ly);
  const double log_s = theta * m + std::log(std::exp(theta * (lx - m)) + std::exp(theta * (ly - m)));
  const double a = std::exp(log_s / theta);
  return -a + x + y + (theta - 1.0) * (lx + ly) + (1.0 / theta - 2.0) * log_s +
         std::log(a + theta - 1.0);
}

void check_unit(double u, double v) {
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    fail(ErrorKind::InvalidParameter, "copula density requires (u,v) in the open unit square");
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::Gaussian: return "gaussian";
    case Family::StudentT: return "t";
    case Family::Clayton: return "clayton";
    case Family::Gumbel: return "gumbel";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "gaussian" || name == "normal") return Family::Gaussian;
  if (name == "t" || name == "student-t") return Family::StudentT;
  if (name == "clayton") return Family::Clayton;
  if (name == "gumbel") return Family::Gumbel;
  fail(ErrorKind::InvalidParameter, "unknown copula family '" + name + "'");
}

CopulaModel CopulaModel::gaussian(double rho) { return make(Family::Gaussian, rho); }
CopulaModel CopulaModel::student_t(double rho, int df) { return make(Family::StudentT, rho, df); }
CopulaModel CopulaModel::clayton(double theta) { return make(Family::Clayton, theta); }
CopulaModel CopulaModel::gumbel(double theta) { return make(Family::Gumbel, theta); }

CopulaModel CopulaModel::make(Family family, double param, int df) {
  if (!std::isfinite(param)) fail(ErrorKind::InvalidParameter, "copula parameter must be finite");
  switch (family) {
    case Family::Gaussian:
    case Family::StudentT:
      if (!(param > -1.0 && param < 1.0))
        fail(ErrorKind::InvalidParameter, to_string(family) + " correlation must lie in (-1,1)");
      if (family == Family::StudentT && df < 3)
        fail(ErrorKind::InvalidParameter, "t copula needs df >= 3");
      break;
    case Family::Clayton:
      if (!(param > 0.0)) fail(ErrorKind::InvalidParameter, "clayton theta must be > 0");
      break;
    case Family::Gumbel:
      if (!(param >= 1.0)) fail(ErrorKind::InvalidParameter, "gumbel theta must be >= 1");
      break;
  }
  CopulaModel m;
  m.family = family;
  m.param = param;
  m.df = family == Family::StudentT ? df : 0;
  return m;
}

std::string CopulaModel::describe() const {
  std::ostringstream os;
  os << to_string(family) << "(" << param;
  if (family == Family::StudentT) os << ", df=" << df;
  os << ")";
  return os.str();
}

double tau_of(const CopulaModel& m) {
  switch (m.family) {
    case Family::Gaussian:
    case Family::StudentT: return 2.0 / kPi * std::asin(m.param);
    case Family::Clayton: return m.param / (m.param + 2.0);
    case Family::Gumbel: return 1.0 - 1.0 / m.param;
  }
  return 0.0;
}

CopulaModel param_of_tau(Family family, double tau, int df) {
  if (!std::isfinite(tau)) fail(ErrorKind::InvalidParameter, "tau must be finite");
  switch (family) {
    case Family::Gaussian:
    case Family::StudentT:
      if (!(tau > -1.0 && tau < 1.0))
        fail(ErrorKind::InvalidParameter, "elliptical tau must lie in (-1,1)");
      return CopulaModel::make(family, std::sin(kPi * tau / 2.0), df);
    case Family::Clayton:
      if (!(tau > 0.0 && tau < 1.0)) fail(ErrorKind::InvalidParameter, "clayton tau must lie in (0,1)");
      return CopulaModel::clayton(2.0 * tau / (1.0 - tau));
    case Family::Gumbel:
      if (!(tau >= 0.0 && tau < 1.0)) fail(ErrorKind::InvalidParameter, "gumbel tau must lie in [0,1)");
      return CopulaModel::gumbel(1.0 / (1.0 - tau));
  }
  fail(ErrorKind::InvalidParameter, "unknown family");
}

double copula_cdf(const CopulaModel& m, double u, double v) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return std::min(v, 1.0);
  if (v >= 1.0) return u;
  switch (m.family) {
    case Family::Gaussian:
      return bivariate_normal_cdf(norm_quantile(u), norm_quantile(v), m.param);
    case Family::StudentT:
      return bivariate_t_cdf(m.df, t_quantile(m.df, u), t_quantile(m.df, v), m.param);
    case Family::Clayton:
      return std::exp(-clayton_log_sum(m.param, u, v) / m.param);
    case Family::Gumbel: {
      const double x = -std::log(u), y = -std::log(v);
      return std::exp(-std::pow(std::pow(x, m.param) + std::pow(y, m.param), 1.0 / m.param));
    }
  }
  return 0.0;
}

double copula_log_density(const CopulaModel& m, double u, double v) {
  check_unit(u, v);
  switch (m.family) {
    case Family::Gaussian:
      return gaussian_log_density(m.param, norm_quantile(u), norm_quantile(v));
    case Family::StudentT:
      return t_log_density(m.param, m.df, t_quantile(m.df, u), t_quantile(m.df, v));
    case Family::Clayton: return clayton_log_density(m.param, u, v);
    case Family::Gumbel: return gumbel_log_density(m.param, u, v);
  }
  return 0.0;
}

double copula_density(const CopulaModel& m, double u, double v) {
  return std::exp(copula_log_density(m, u, v));
}

std::vector<UV> sample_copula(const CopulaModel& m, std::size_t n, Rng& rng) {
  std::vector<UV> out(n);
  boost::random::normal_distribution<double> normal;
  boost::random::exponential_distribution<double> expo;
  switch (m.family) {
    case Family::Gaussian:
    case Family::StudentT: {
      const double rho = m.param;
      const double s = std::sqrt(1.0 - rho * rho);
      boost::random::chi_squared_distribution<double> chi2(m.df > 0 ? m.df : 1);
      for (auto& d : out) {
        const double z1 = normal(rng);
        const double z2 = rho * z1 + s * normal(rng);
        if (m.family == Family::Gaussian) {
          d = {norm_cdf(z1), norm_cdf(z2)};
        } else {
          const double scale = std::sqrt(chi2(rng) / m.df);
          d = {t_cdf(m.df, z1 / scale), t_cdf(m.df, z2 / scale)};
        }
      }
      break;
    }
    case Family::Clayton: {
      const double theta = m.param;
      boost::random::gamma_distribution<double> frailty(1.0 / theta, 1.0);
      for (auto& d : out) {
        const double g = frailty(rng);
        const double e1 = expo(rng), e2 = expo(rng);
        d = {std::pow(1.0 + e1 / g, -1.0 / theta), std::pow(1.0 + e2 / g, -1.0 / theta)};
      }
      break;
    }
    case Family::Gumbel: {
      const double alpha = 1.0 / m.param;
      for (auto& d : out) {
        double s = 1.0;
        if (alpha < 1.0) {
          // Chambers-Mallows-Stuck, totally skewed stable with Laplace transform exp(-t^α)
          const double w = kPi * uniform_open(rng);
          const double e = expo(rng);
          s = std::sin(alpha * w) / std::pow(std::sin(w), 1.0 / alpha) *
              std::pow(std::sin((1.0 - alpha) * w) / e, (1.0 - alpha) / alpha);
        }
        const double e1 = expo(rng), e2 = expo(rng);
        d = {std::exp(-std::pow(e1 / s, alpha)), std::exp(-std::pow(e2 / s, alpha))};
      }
      break;
    }
  }
  return out;
}

MarginSpec MarginSpec::normal(double mu, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
    fail(ErrorKind::InvalidParameter, "normal margin needs finite mu and sigma > 0");
  MarginSpec m;
  m.kind = Kind::Normal;
  m.mu = mu;
  m.sigma = sigma;
  return m;
}

MarginSpec MarginSpec::student_t(double df) {
  if (!(df > 0.0) || !std::isfinite(df)) fail(ErrorKind::InvalidParameter, "t margin needs df > 0");
  MarginSpec m;
  m.kind = Kind::StudentT;
  m.df = df;
  return m;
}

MarginSpec MarginSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (head == "normal") {
      if (rest.empty()) return normal();
      const auto comma = rest.find(',');
      if (comma == std::string::npos) fail(ErrorKind::InvalidParameter, "expected normal:mu,sigma");
      return normal(std::stod(rest.substr(0, comma)), std::stod(rest.substr(comma + 1)));
    }
    if (head == "t" && !rest.empty()) return student_t(std::stod(rest));
  } catch (const std::logic_error&) {
  }
  fail(ErrorKind::InvalidParameter, "bad margin spec '" + text + "' (normal, normal:mu,sigma or t:df)");
}

double MarginSpec::quantile(double p) const {
  if (kind == Kind::Normal) return mu + sigma * norm_quantile(p);
  return t_quantile(df, p);
}

double MarginSpec::cdf(double x) const {
  if (kind == Kind::Normal) return norm_cdf((x - mu) / sigma);
  return t_cdf(df, x);
}

std::string MarginSpec::describe() const {
  std::ostringstream os;
  if (kind == Kind::Normal)
    os << "normal:" << mu << "," << sigma;
  else
    os << "t:" << df;
  return os.str();
}

std::vector<Draw> sample(const CopulaModel& m, const MarginPair& margins, std::size_t n,
                         std::uint64_t seed) {
  Rng rng(seed);
  const auto uv = sample_copula(m, n, rng);
  std::vector<Draw> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = {margins.first.quantile(uv[i].u), margins.second.quantile(uv[i].v)};
  return out;
}

EmpiricalMargin::EmpiricalMargin(std::vector<double> sample) : sorted_(std::move(sample)) {
  if (sorted_.empty()) fail(ErrorKind::InsufficientData, "empirical margin needs at least one value");
  for (double x : sorted_)
    if (!std::isfinite(x)) fail(ErrorKind::MalformedInput, "empirical margin sample must be finite");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalMargin::operator()(double x) const {
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size() + 1);
}

double PluginCopula::evaluate(double r1, double r2) const {
  return copula_cdf(model_, margin1_(r1), margin2_(r2));
}

PluginCopula plugin_copula(const PairedSeries& paired, double theta_hat, Family family, int df) {
  auto model = CopulaModel::make(family, theta_hat, df);
  auto ret = paired_returns(paired);
  if (ret.r1.empty()) fail(ErrorKind::InsufficientData, "plug-in copula needs at least one paired return");
  return PluginCopula(EmpiricalMargin(std::move(ret.r1)), EmpiricalMargin(std::move(ret.r2)), model);
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

std::vector<UV> pseudo_observations(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::MalformedInput, "pseudo-observations need equal-length samples");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double scale = static_cast<double>(x.size() + 1);
  std::vector<UV> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = {rx[i] / scale, ry[i] / scale};
  return out;
}

std::vector<int> FitOptions::default_df_grid() {
  std::vector<int> g(28);
  std::iota(g.begin(), g.end(), 3);
  return g;
}

namespace {

struct Bracket {
  double lo, hi;
};

// Search range for each family, in tau units.
Bracket tau_bracket(Family f) {
  switch (f) {
    case Family::Gaussian:
    case Family::StudentT: return {-0.99, 0.99};
    case Family::Clayton: return {1e-4, 0.95};
    case Family::Gumbel: return {0.0, 0.95};
  }
  return {0.0, 0.0};
}

FitResult fit_one(std::span<const UV> pseudo, Family family, int df) {
  const std::size_t n = pseudo.size();
  std::vector<double> a, b;
  if (family == Family::Gaussian || family == Family::StudentT) {
    a.resize(n);
    b.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = family == Family::Gaussian ? norm_quantile(pseudo[i].u) : t_quantile(df, pseudo[i].u);
      b[i] = family == Family::Gaussian ? norm_quantile(pseudo[i].v) : t_quantile(df, pseudo[i].v);
    }
  }
  auto loglik = [&](double tau) {
    const auto m = param_of_tau(family, tau, df);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      switch (family) {
        case Family::Gaussian: s += gaussian_log_density(m.param, a[i], b[i]); break;
        case Family::StudentT: s += t_log_density(m.param, df, a[i], b[i]); break;
        case Family::Clayton: s += clayton_log_density(m.param, pseudo[i].u, pseudo[i].v); break;
        case Family::Gumbel: s += gumbel_log_density(m.param, pseudo[i].u, pseudo[i].v); break;
      }
    }
    return s;
  };
  const auto br = tau_bracket(family);
  const auto [tau, neg] = boost::math::tools::brent_find_minima(
      [&](double t) {
        const double l = loglik(t);
        return std::isfinite(l) ? -l : std::numeric_limits<double>::max();
      },
      br.lo, br.hi, 40);
  const double ll = -neg;
  if (!std::isfinite(ll) || neg == std::numeric_limits<double>::max())
    fail(ErrorKind::FitFailure, to_string(family) + " pseudo-likelihood is not finite");
  FitResult r;
  r.model = param_of_tau(family, tau, df);
  r.loglik = ll;
  r.n_params = 1;
  r.aic = 2.0 - 2.0 * ll;
  const double edge = 1e-3 * (br.hi - br.lo);
  r.at_boundary = tau - br.lo < edge || br.hi - tau < edge;
  return r;
}

}  // namespace

std::vector<FitResult> fit_aic(std::span<const UV> pseudo, std::span<const Family> families,
                               const FitOptions& options) {
  if (pseudo.size() < 30) fail(ErrorKind::InsufficientData, "copula fit needs at least 30 pseudo-observations");
  for (const auto& p : pseudo) check_unit(p.u, p.v);
  std::vector<FitResult> out;
  for (Family f : families) {
    if (f != Family::StudentT) {
      out.push_back(fit_one(pseudo, f, 0));
      continue;
    }
    if (options.t_df) {
      out.push_back(fit_one(pseudo, f, *options.t_df));
      continue;
    }
    if (options.df_grid.empty()) fail(ErrorKind::InvalidParameter, "empty df grid");
    std::optional<FitResult> best;
    for (int df : options.df_grid) {
      auto r = fit_one(pseudo, f, df);
      if (!best || r.loglik > best->loglik) best = r;
    }
    best->n_params = 2;
    best->aic = 4.0 - 2.0 * best->loglik;
    out.push_back(*best);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.aic < y.aic; });
  return out;
}

}  // namespace nscop
