#pragma once

// Reference computations for the tests. Nothing here calls into the library's
// numerics: the beta CDF comes from tanh-sinh quadrature of the density and
// interval endpoints from bisection on exact binomial sums.

#include <cmath>
#include <cstdint>
#include <utility>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

// Integral of x^(a-1) (1-x)^(b-1) over [lo, hi] where lo or hi is 0 or 1 or x0.
// The two-argument integrand form gives the distance to the nearest endpoint,
// which keeps x and 1-x accurate next to a singular endpoint.
inline double beta_kernel_integral(double lo, double hi, double a, double b) {
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  const double one_minus_lo = 1.0 - lo;
  const double one_minus_hi = 1.0 - hi;
  auto f = [&](double x, double xc) {
    double u, v;  // u = x, v = 1 - x
    if (xc <= 0.0) {  // left half: xc = lo - x
      u = lo - xc;
      v = one_minus_lo + xc;
    } else {  // right half: xc = hi - x
      u = hi - xc;
      v = one_minus_hi + xc;
    }
    if (u <= 0.0 || v <= 0.0) return 0.0;
    return std::exp((a - 1.0) * std::log(u) + (b - 1.0) * std::log(v));
  };
  return integrator.integrate(f, lo, hi, 1e-14);
}

/// Beta(a, b) CDF at x, normalised by the integral over the complement.
inline double ibeta(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double left = beta_kernel_integral(0.0, x, a, b);
  const double right = beta_kernel_integral(x, 1.0, a, b);
  return left / (left + right);
}

/// Bisection on the quadrature CDF.
inline double beta_quantile(double q, double a, double b) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (ibeta(mid, a, b) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double binomial_coefficient(std::int64_t n, std::int64_t k) {
  double c = 1.0;
  for (std::int64_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return c;
}

inline double binomial_pmf(std::int64_t n, std::int64_t k, double p) {
  return binomial_coefficient(n, k) * std::pow(p, static_cast<double>(k)) *
         std::pow(1.0 - p, static_cast<double>(n - k));
}

/// P(X >= h) for X ~ Binomial(n, p).
inline double upper_tail(std::int64_t n, std::int64_t h, double p) {
  double s = 0.0;
  for (std::int64_t k = h; k <= n; ++k) s += binomial_pmf(n, k, p);
  return s;
}

/// P(X <= h) for X ~ Binomial(n, p).
inline double lower_tail(std::int64_t n, std::int64_t h, double p) {
  double s = 0.0;
  for (std::int64_t k = 0; k <= h; ++k) s += binomial_pmf(n, k, p);
  return s;
}

/// Exact binomial interval: lower solves P(X >= h) = alpha/2, upper solves
/// P(X <= h) = alpha/2, each by bisection in p.
inline std::pair<double, double> exact_interval(std::int64_t h, std::int64_t n,
                                                double alpha) {
  if (n == 0) return {0.0, 1.0};
  double lower = 0.0, upper = 1.0;
  if (h > 0) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (upper_tail(n, h, mid) < alpha / 2.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    lower = 0.5 * (lo + hi);
  }
  if (h < n) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (lower_tail(n, h, mid) > alpha / 2.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    upper = 0.5 * (lo + hi);
  }
  return {lower, upper};
}

}  // namespace oracle
