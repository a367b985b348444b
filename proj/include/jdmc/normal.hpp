#pragma once

namespace jdmc {

/// Standard normal density.
double normal_pdf(double x) noexcept;

/// Standard normal distribution function, via std::erfc (relative accuracy
/// near machine precision in both tails).
double normal_cdf(double x) noexcept;

/// Inverse of normal_cdf on (0, 1), Wichura's AS 241 (PPND16), about 1e-16
/// relative accuracy. Throws std::domain_error outside (0, 1).
double normal_quantile(double p);

/// Upper quantile z_a with P(N(0,1) > z_a) = a.
double normal_upper_quantile(double a);

}  // namespace jdmc
