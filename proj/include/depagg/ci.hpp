#pragma once

#include <span>
#include <utility>
#include <vector>

#include "depagg/em.hpp"
#include "depagg/votes.hpp"

namespace depagg {

/// Conditionally independent judges with asymmetric errors.
/// alpha_j = Pr(J_j = 1 | Y = 1) (sensitivity), beta_j = Pr(J_j = 0 | Y = 0)
/// (specificity), pi = Pr(Y = 1). Every entry lies strictly inside (0, 1).
struct CIParams {
  double pi = 0.5;
  std::vector<double> alpha;
  std::vector<double> beta;

  /// Throws std::invalid_argument on boundary values or length mismatch.
  void validate() const;
  [[nodiscard]] int K() const noexcept { return static_cast<int>(alpha.size()); }

  /// Same law with the label renamed: pi -> 1-pi, alpha -> 1-beta, beta -> 1-alpha.
  [[nodiscard]] CIParams relabeled() const;
};

/// Affine weighted-vote form of the CI log-odds: b + sum_j w_j J_j.
struct WeightedVote {
  double intercept = 0.0;
  std::vector<double> weights;
};

WeightedVote ci_weighted_vote(const CIParams& p);

/// logit(pi) + sum_j [J_j log(alpha_j/(1-beta_j)) + (1-J_j) log((1-alpha_j)/beta_j)].
double ci_log_odds(const CIParams& p, std::span<const int> votes);

/// Posterior via the CI log-odds, thresholded at 0 (gamma >= 1/2).
PosteriorVector wmv_predict(const CIParams& p, const VoteMatrix& v);

/// Uniform majority vote: label 1 iff more than K/2 votes are 1. An exact tie
/// gives label 1 with gamma = 1/2; otherwise gamma is the vote fraction.
PosteriorVector umv_predict(const VoteMatrix& v);

struct CIFit {
  CIParams params;
  PosteriorVector posterior;
  EMTrace trace;
};

/// Dawid-Skene EM with asymmetric errors and Beta(a, b) MAP updates. The
/// tracked objective is the log posterior (observed log-likelihood plus log
/// prior), which is non-decreasing. After convergence the labeling is
/// oriented so the judges' summed weight is non-negative.
CIFit em_fit_ci(const VoteMatrix& v, const EMConfig& cfg = {});

/// Observed-data log-likelihood sum_i log(pi P(J_i|1) + (1-pi) P(J_i|0)).
double ci_observed_log_likelihood(const CIParams& p, const VoteMatrix& v);

}  // namespace depagg
