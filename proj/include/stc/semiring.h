#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace stc {

// Log semiring over doubles: plus = log-sum-exp, times = +, zero = -inf, one = 0.
// -inf encodes a forbidden transition and must propagate exactly:
//   logAdd(-inf, x) == x, logTimes(-inf, x) == -inf.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double logAdd(double a, double b) {
  if (a == kNegInf) {
    return b;
  }
  if (b == kNegInf) {
    return a;
  }
  // max-shifted form, never exponentiates a positive argument
  double hi = a > b ? a : b;
  double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

inline double logTimes(double a, double b) {
  if (a == kNegInf || b == kNegInf) {
    return kNegInf;
  }
  return a + b;
}

// Two-pass max-shifted sum in element order; deterministic for a fixed
// ordering.
inline double logSumExp(std::span<const double> xs) {
  double hi = kNegInf;
  for (double x : xs) {
    if (x > hi) {
      hi = x;
    }
  }
  if (hi == kNegInf) {
    return kNegInf;
  }
  double sum = 0.0;
  for (double x : xs) {
    sum += std::exp(x - hi);
  }
  return hi + std::log(sum);
}

inline double logSumExp(const std::vector<double>& xs) {
  return logSumExp(std::span<const double>(xs));
}

// log(exp(total) - exp(part)) for part <= total; -inf when the difference
// underflows or part >= total. Used for complement-token weights where the
// direct sum over the alphabet would cost O(|A|) per token.
inline double logDiffExp(double total, double part) {
  if (total == kNegInf) {
    return kNegInf;
  }
  if (part == kNegInf) {
    return total;
  }
  double d = part - total;
  if (d >= 0.0) {
    return kNegInf;
  }
  double rest = -std::expm1(d); // 1 - exp(d), accurate for small |d|
  if (rest <= 0.0) {
    return kNegInf;
  }
  return total + std::log(rest);
}

} // namespace stc
