#pragma once

namespace nscop {

/// Standard normal CDF and quantile.
double norm_cdf(double x);
double norm_quantile(double p);

/// P(X ≤ h, Y ≤ k) for a standard bivariate normal with correlation rho,
/// by adaptive Gauss–Kronrod on Plackett's one-dimensional representation.
double bivariate_normal_cdf(double h, double k, double rho);

/// P(X ≤ h, Y ≤ k) for the standard bivariate Student-t with integer `nu`
/// degrees of freedom and correlation rho (Dunnett–Sobel closed form as
/// arranged by Genz).
double bivariate_t_cdf(int nu, double h, double k, double rho);

}  // namespace nscop
