#include "nscop/bivariate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nscop {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

double bivariate_normal_cdf(double h, double k, double rho) {
  if (std::isinf(h) || std::isinf(k)) {
    if (h == -INFINITY || k == -INFINITY) return 0.0;
    if (h == INFINITY) return norm_cdf(k);
    return norm_cdf(h);
  }
  const double base = norm_cdf(h) * norm_cdf(k);
  if (rho == 0.0) return base;
  rho = std::clamp(rho, -1.0, 1.0);
  const double upper = std::asin(rho);
  const double hh_kk = h * h + k * k;
  const double hk = h * k;
  auto integrand = [&](double theta) {
    const double s = std::sin(theta);
    const double c2 = 1.0 - s * s;
    if (c2 <= 0.0) return 0.0;
    return std::exp(-(hh_kk - 2.0 * hk * s) / (2.0 * c2));
  };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, upper, 15, 1e-13);
  return std::clamp(base + integral / (2.0 * std::numbers::pi), 0.0, 1.0);
}

double bivariate_t_cdf(int nu, double dh, double dk, double r) {
  using std::numbers::pi;
  if (dh == -INFINITY || dk == -INFINITY) return 0.0;
  constexpr double eps = 1e-15;
  const double tpi = 2.0 * pi;
  const double snu = std::sqrt(static_cast<double>(nu));
  const double dnu = static_cast<double>(nu);
  const double ors = 1.0 - r * r;
  const double hrk = dh - r * dk;
  const double krh = dk - r * dh;
  double xnhk = 0.0;
  double xnkh = 0.0;
  if (std::abs(hrk) + ors > 0.0) {
    xnhk = hrk * hrk / (hrk * hrk + ors * (dnu + dk * dk));
    xnkh = krh * krh / (krh * krh + ors * (dnu + dh * dh));
  }
  const double hs = (dh - r * dk) < 0.0 ? -1.0 : 1.0;
  const double ks = (dk - r * dh) < 0.0 ? -1.0 : 1.0;
  double bvt = 0.0;
  if (nu % 2 == 0) {
    bvt = std::atan2(std::sqrt(ors), -r) / tpi;
    double gmph = dh / std::sqrt(16.0 * (dnu + dh * dh));
    double gmpk = dk / std::sqrt(16.0 * (dnu + dk * dk));
    double btnckh = 2.0 * std::atan2(std::sqrt(xnkh), std::sqrt(1.0 - xnkh)) / pi;
    double btpdkh = 2.0 * std::sqrt(xnkh * (1.0 - xnkh)) / pi;
    double btnchk = 2.0 * std::atan2(std::sqrt(xnhk), std::sqrt(1.0 - xnhk)) / pi;
    double btpdhk = 2.0 * std::sqrt(xnhk * (1.0 - xnhk)) / pi;
    for (int j = 1; j <= nu / 2; ++j) {
      const double dj = static_cast<double>(j);
      bvt += gmph * (1.0 + ks * btnckh);
      bvt += gmpk * (1.0 + hs * btnchk);
      btnckh += btpdkh;
      btpdkh = 2.0 * dj * btpdkh * (1.0 - xnkh) / (2.0 * dj + 1.0);
      btnchk += btpdhk;
      btpdhk = 2.0 * dj * btpdhk * (1.0 - xnhk) / (2.0 * dj + 1.0);
      gmph = gmph * (2.0 * dj - 1.0) / (2.0 * dj * (1.0 + dh * dh / dnu));
      gmpk = gmpk * (2.0 * dj - 1.0) / (2.0 * dj * (1.0 + dk * dk / dnu));
    }
  } else {
    const double qhrk = std::sqrt(dh * dh + dk * dk - 2.0 * r * dh * dk + dnu * ors);
    const double hkrn = dh * dk + r * dnu;
    const double hkn = dh * dk - dnu;
    const double hpk = dh + dk;
    bvt = std::atan2(-snu * (hkn * qhrk + hpk * hkrn), hkn * hkrn - dnu * hpk * qhrk) / tpi;
    if (bvt < -eps) bvt += 1.0;
    double gmph = dh / (tpi * snu * (1.0 + dh * dh / dnu));
    double gmpk = dk / (tpi * snu * (1.0 + dk * dk / dnu));
    double btnckh = std::sqrt(xnkh);
    double btpdkh = btnckh;
    double btnchk = std::sqrt(xnhk);
    double btpdhk = btnchk;
    for (int j = 1; j <= (nu - 1) / 2; ++j) {
      const double dj = static_cast<double>(j);
      bvt += gmph * (1.0 + ks * btnckh);
      bvt += gmpk * (1.0 + hs * btnchk);
      btpdkh = (2.0 * dj - 1.0) * btpdkh * (1.0 - xnkh) / (2.0 * dj);
      btnckh += btpdkh;
      btpdhk = (2.0 * dj - 1.0) * btpdhk * (1.0 - xnhk) / (2.0 * dj);
      btnchk += btpdhk;
      gmph = 2.0 * dj * gmph / ((2.0 * dj + 1.0) * (1.0 + dh * dh / dnu));
      gmpk = 2.0 * dj * gmpk / ((2.0 * dj + 1.0) * (1.0 + dk * dk / dnu));
    }
  }
  return std::clamp(bvt, 0.0, 1.0);
}

}  // namespace nscop
