#include "nscop/synthesis.hpp"

#include <algorithm>
#include <numeric>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "nscop/errors.hpp"
#include "nscop/random.hpp"

namespace nscop {

void SimSpec::validate() const {
  if (!(lambda1 > 0.0 && lambda2 > 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2))
    fail(ErrorKind::InvalidParameter, "intensities must be finite and positive");
  if (horizon) {
    if (!(*horizon > 0.0) || !std::isfinite(*horizon))
      fail(ErrorKind::InvalidParameter, "horizon must be positive");
  } else if (n1 < 2 || n2 < 2) {
    fail(ErrorKind::InvalidParameter, "n1 and n2 must be at least 2");
  }
  CopulaModel::make(model.family, model.param, model.family == Family::StudentT ? model.df : 8);
}

SimResult simulate(const SimSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const double rate = spec.lambda1 + spec.lambda2;
  boost::random::exponential_distribution<double> gap(rate);

  std::vector<double> times;
  std::size_t n2 = spec.n2;
  if (spec.horizon) {
    const double h = *spec.horizon;
    boost::random::poisson_distribution<std::int64_t> count(rate * h);
    const auto total = static_cast<std::size_t>(count(rng));
    // order statistics of uniforms on (0, h]
    times.resize(total);
    for (double& t : times) t = h * uniform_open(rng);
    std::sort(times.begin(), times.end());
    boost::random::binomial_distribution<std::int64_t> split(static_cast<std::int64_t>(total),
                                                             spec.lambda2 / rate);
    n2 = total ? static_cast<std::size_t>(split(rng)) : 0;
  } else {
    times.resize(spec.n1 + spec.n2);
    double t = 0.0;
    for (double& x : times) x = t += gap(rng);
  }
  const std::size_t total = times.size();

  Rng copula_rng(mix_seed(spec.seed ^ 0x636f70756c61ULL));
  const auto uv = sample_copula(spec.model, total, copula_rng);
  std::vector<double> lp1(total), lp2(total);
  double c1 = spec.log_price0, c2 = spec.log_price0, prev = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double s = std::sqrt(times[i] - prev);
    prev = times[i];
    c1 += spec.margins.first.quantile(uv[i].u) * s;
    c2 += spec.margins.second.quantile(uv[i].v) * s;
    lp1[i] = c1;
    lp2[i] = c2;
  }

  std::vector<char> to_b(total, 0);
  if (spec.synchronous) {
    std::fill(to_b.begin(), to_b.end(), 1);
  } else {
    // partial Fisher-Yates: the first n2 slots of a shuffled index list go to asset 2
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < n2; ++i) {
      boost::random::uniform_int_distribution<std::size_t> pick(i, total - 1);
      std::swap(idx[i], idx[pick(rng)]);
      to_b[idx[i]] = 1;
    }
  }

  std::vector<double> ta, xa, tb, yb;
  for (std::size_t i = 0; i < total; ++i) {
    if (spec.synchronous || !to_b[i]) {
      ta.push_back(times[i]);
      xa.push_back(lp1[i]);
    }
    if (to_b[i]) {
      tb.push_back(times[i]);
      yb.push_back(lp2[i]);
    }
  }
  if (ta.size() < 2 || tb.size() < 2)
    fail(ErrorKind::InsufficientData, "simulated draw left an asset with fewer than 2 ticks");
  return SimResult{TickSeries(std::move(ta), std::move(xa), "asset1"),
                   TickSeries(std::move(tb), std::move(yb), "asset2"), spec.model, tau_of(spec.model)};
}

}  // namespace nscop
