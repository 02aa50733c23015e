#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace depagg {

inline double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

/// log(1 + e^t) without overflow.
inline double log1pexp(double t) noexcept {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

inline double log_add_exp(double a, double b) noexcept {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double log_sum_exp(std::span<const double> xs) noexcept {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_binomial(int n, int k) noexcept {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Bernoulli KL divergence KL(s || q) in nats; 0 log 0 = 0.
inline double bernoulli_kl(double s, double q) noexcept {
  double out = 0.0;
  if (s > 0.0) out += s * std::log(s / q);
  if (s < 1.0) out += (1.0 - s) * std::log((1.0 - s) / (1.0 - q));
  return out;
}

}  // namespace depagg
