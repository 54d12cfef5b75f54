#pragma once

// Beta-binomial numerics: regularized incomplete beta, beta quantiles,
// conjugate updating and exact (Clopper-Pearson) binomial intervals.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace betmarket {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Beta distribution parameters. Houses both the prior and the posterior of
/// the Bayes agent; `a` counts pseudo-heads and `b` pseudo-tails.
struct BetaParams {
  double a = 1.0;
  double b = 1.0;

  BetaParams() = default;
  BetaParams(double a_, double b_) : a(a_), b(b_) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw DomainError("beta parameters must be positive and finite");
    }
  }

  friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

/// Observed heads and tails.
struct Counts {
  std::int64_t heads = 0;
  std::int64_t tails = 0;

  std::int64_t total() const { return heads + tails; }

  friend bool operator==(const Counts&, const Counts&) = default;
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 1.0;
  double level = 0.9;  // 1 - alpha

  bool contains(double x) const { return lower <= x && x <= upper; }

  friend bool operator==(const ConfidenceInterval&,
                         const ConfidenceInterval&) = default;
};

namespace detail {

inline constexpr double kCfTolerance = 1e-15;
inline constexpr int kCfMaxIterations = 500;
inline constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the continued fraction for I_x(a,b).
inline double ibeta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kCfMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kCfTolerance) return h;
  }
  throw ConvergenceError("incomplete beta continued fraction did not converge");
}

// x^a (1-x)^b / (a B(a,b)), with ln(1-x) taken from the exact complement.
inline double ibeta_prefactor(double x, double one_minus_x, double a,
                              double b) {
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::exp(a * std::log(x) + b * std::log(one_minus_x) - log_beta) / a;
}

inline void check_shape(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("beta shape parameters must be positive and finite");
  }
}

inline void check_probability(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b), i.e. the Beta(a, b) CDF at x.
inline double regularized_incomplete_beta(double x, double a, double b) {
  detail::check_probability(x, "x");
  detail::check_shape(a, b);
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double y = 1.0 - x;
  // The continued fraction converges fastest below the mean; reflect above.
  if (x > (a + 1.0) / (a + b + 2.0)) {
    return 1.0 - detail::ibeta_prefactor(y, x, b, a) *
                     detail::ibeta_continued_fraction(y, b, a);
  }
  return detail::ibeta_prefactor(x, y, a, b) *
         detail::ibeta_continued_fraction(x, a, b);
}

/// Inverse of the Beta(a, b) CDF by bisection on [0, 1].
///
/// Stops once the bracket is narrower than 1e-12 and the CDF residual is
/// within 1e-10, once the residual drops below 1e-14, or once the bracket
/// can no longer be split in double precision.
inline double beta_quantile(double q, double a, double b) {
  detail::check_probability(q, "q");
  detail::check_shape(a, b);
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;

  constexpr int kMaxIterations = 200;
  constexpr double kWidth = 1e-12;
  constexpr double kResidual = 1e-10;

  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    const double f = regularized_incomplete_beta(mid, a, b);
    const double residual = f - q;
    if (std::fabs(residual) <= 1e-14) return mid;
    if (residual < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= kWidth && std::fabs(residual) <= kResidual) return mid;
  }
  throw ConvergenceError("beta quantile bisection exceeded its iteration cap");
}

/// Conjugate update: beta(a + heads, b + tails).
inline BetaParams beta_posterior(const BetaParams& prior, const Counts& evidence) {
  return BetaParams(prior.a + static_cast<double>(evidence.heads),
                    prior.b + static_cast<double>(evidence.tails));
}

inline double beta_mean(const BetaParams& p) { return p.a / (p.a + p.b); }

/// Clopper-Pearson interval at level 1 - alpha. Empty evidence gives [0, 1].
inline ConfidenceInterval confidence_interval(const Counts& evidence,
                                              double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie in (0, 1)");
  }
  if (evidence.heads < 0 || evidence.tails < 0) {
    throw DomainError("counts must be nonnegative");
  }
  ConfidenceInterval ci;
  ci.level = 1.0 - alpha;
  const auto n = evidence.total();
  if (n == 0) return ci;
  const double h = static_cast<double>(evidence.heads);
  const double nd = static_cast<double>(n);
  ci.lower = evidence.heads == 0 ? 0.0 : beta_quantile(alpha / 2.0, h, nd - h + 1.0);
  ci.upper = evidence.tails == 0 ? 1.0 : beta_quantile(1.0 - alpha / 2.0, h + 1.0, nd - h);
  return ci;
}

/// Clopper-Pearson intervals for every (heads, tails) with total <= max_total,
/// computed once for a fixed alpha. Lookups equal confidence_interval() exactly.
class IntervalTable {
 public:
  IntervalTable(double alpha, std::int64_t max_total)
      : alpha_(alpha), max_total_(max_total) {
    if (max_total < 0) throw DomainError("max_total must be nonnegative");
    table_.reserve(static_cast<std::size_t>((max_total + 1) * (max_total + 2) / 2));
    for (std::int64_t n = 0; n <= max_total; ++n) {
      for (std::int64_t h = 0; h <= n; ++h) {
        table_.push_back(confidence_interval(Counts{h, n - h}, alpha));
      }
    }
  }

  double alpha() const { return alpha_; }
  std::int64_t max_total() const { return max_total_; }

  const ConfidenceInterval& at(const Counts& c) const {
    const auto n = c.total();
    if (n > max_total_ || c.heads < 0 || c.tails < 0) {
      throw DomainError("counts outside the precomputed interval table");
    }
    return table_[static_cast<std::size_t>(n * (n + 1) / 2 + c.heads)];
  }

 private:
  double alpha_;
  std::int64_t max_total_;
  std::vector<ConfidenceInterval> table_;
};

}  // namespace betmarket
