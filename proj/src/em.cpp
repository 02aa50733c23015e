#include "depagg/em.hpp"

#include <algorithm>
#include <cmath>

#include "depagg/numerics.hpp"
#include "depagg/rng.hpp"
#include "depagg/votes.hpp"

namespace depagg {

std::vector<double> majority_init(const VoteMatrix& v, const EMConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, {0xe301ULL}));
  std::vector<double> gamma(static_cast<std::size_t>(v.n()));
  for (int i = 0; i < v.n(); ++i) {
    int ones = 0;
    for (int j = 0; j < v.K(); ++j) ones += v(i, j);
    const double frac = static_cast<double>(ones) / v.K();
    const double jitter = rng.uniform(-cfg.init_jitter, cfg.init_jitter);
    gamma[static_cast<std::size_t>(i)] = std::clamp(frac + jitter, 0.0, 1.0);
  }
  return gamma;
}

double vote_orientation(const VoteMatrix& v, const std::vector<double>& gamma) {
  double total = 0.0;
  for (int j = 0; j < v.K(); ++j) {
    double on1 = 1.0, n1 = 2.0, off0 = 1.0, n0 = 2.0;
    for (int i = 0; i < v.n(); ++i) {
      const double g = gamma[static_cast<std::size_t>(i)];
      n1 += g;
      n0 += 1.0 - g;
      if (v(i, j)) on1 += g;
      else off0 += 1.0 - g;
    }
    total += logit(on1 / n1) + logit(off0 / n0);
  }
  return total;
}

double log_beta_prior(double p, double a, double b) {
  return (a - 1.0) * std::log(p) + (b - 1.0) * std::log1p(-p);
}

}  // namespace depagg
