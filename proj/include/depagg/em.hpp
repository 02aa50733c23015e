#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace depagg {

/// Shared controls for every EM driver.
struct EMConfig {
  double tol = 1e-6;       ///< relative change of the tracked objective
  int max_iters = 200;
  std::uint64_t seed = 42;  ///< drives the initialization jitter
  double prior_a = 2.0;    ///< Beta(a, b) prior on every probability parameter
  double prior_b = 2.0;
  double init_jitter = 0.05;
};

/// Per-iteration record of an EM run. `objective` is the quantity whose
/// monotonicity the driver guarantees; `log_likelihood` is the observed-data
/// log-likelihood (exact when available, otherwise the surrogate score).
struct EMTrace {
  std::vector<double> objective;
  std::vector<double> log_likelihood;
  int iterations = 0;
  bool converged = false;
  bool flipped = false;
  std::vector<std::string> warnings;
};

/// Majority-vote fractions jittered uniformly by +-cfg.init_jitter, clamped to [0, 1].
class VoteMatrix;
std::vector<double> majority_init(const VoteMatrix& v, const EMConfig& cfg);

/// Label-orientation statistic: summed CI weights logit(a_j) + logit(b_j) of
/// the gamma-weighted sensitivities and specificities (add-one smoothed).
/// Negative values mean the labeling makes judges worse than random on average.
double vote_orientation(const VoteMatrix& v, const std::vector<double>& gamma);

/// Log density of a Beta(a, b) prior at p, without the normalizer.
double log_beta_prior(double p, double a, double b);

}  // namespace depagg
