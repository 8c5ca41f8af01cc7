#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

// Scalar special functions used throughout the toolkit.
//
// All rate-valued quantities in this library are in bits, so logarithms are
// taken to base 2 and the natural-log conversion constant log2(e) shows up
// in many formulas.
//
// Accuracy targets (checked by the test suite against independent oracles):
//   normal_cdf      absolute error <= 1e-12 for |x| <= 8
//   normal_inv_cdf  absolute error <= 1e-9  for p in [1e-12, 1-1e-12]
//   the pair are mutual inverses to <= 1e-8 on that range

namespace ehfb {

inline constexpr double kLog2E = 1.4426950408889634074;  // log2(e)
inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// AWGN channel capacity 0.5*log2(1+P) in bits per channel use.
inline double capacity(double snr) {
  if (!(snr >= 0.0) || !std::isfinite(snr)) {
    throw std::domain_error("capacity: snr must be finite and nonnegative");
  }
  return 0.5 * std::log2(1.0 + snr);
}

/// Standard normal density.
inline double normal_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

/// Standard normal cdf via the complementary error function.
inline double normal_cdf(double x) {
  if (std::isnan(x)) {
    throw std::domain_error("normal_cdf: x must not be NaN");
  }
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

// Inverse of the standard normal cdf.
//
// ALGORITHM AS241 (Wichura, Appl. Statist. 37(3), 1988), the PPND16 variant,
// which is accurate to about 1 part in 1e16 over (0,1).  Branches on
// |p - 0.5| and on the distance to the endpoints exactly as published.
inline double normal_inv_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error("normal_inv_cdf: p must lie strictly in (0,1)");
  }

  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) *
                    r +
                4.5921953931549871457e+4) *
                   r +
               1.3731693765509461125e+4) *
                  r +
              1.9715909503065514427e+3) *
                 r +
             1.3314166789178437745e+2) *
                r +
            3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) *
                    r +
                2.1213794301586595867e+4) *
                   r +
               5.3941960214247511077e+3) *
                  r +
              6.8718700749205790830e+2) *
                 r +
             4.2313330701600911252e+1) *
                r +
            1.0);
  }

  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e+0) *
                r +
            3.64784832476320460504e+0) *
               r +
           5.76949722146069140550e+0) *
              r +
          4.63033784615654529590e+0) *
             r +
         1.42343711074968357734e+0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e+0) *
              r +
          2.05319162663775882187e+0) *
             r +
         1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e+0) *
              r +
          5.46378491116411436990e+0) *
             r +
         6.65790464350110377720e+0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
  }
  return (q < 0.0) ? -x : x;
}

/// Density of the standard normal evaluated at its own quantile, the
/// denominator pattern shared by the residual constants of both bounds.
inline double normal_pdf_at_quantile(double p) {
  return normal_pdf(normal_inv_cdf(p));
}

}  // namespace ehfb
