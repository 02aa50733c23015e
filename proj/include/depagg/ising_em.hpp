#pragma once

#include "depagg/em.hpp"
#include "depagg/ising.hpp"
#include "depagg/pseudo_likelihood.hpp"
#include "depagg/votes.hpp"

namespace depagg {

enum class IsingMode { class_dependent, class_independent };

/// How class scores are computed in the E-step. `automatic` enumerates when
/// K <= k_max_exact and falls back to pseudo-likelihood scores otherwise.
enum class EStepKind { automatic, exact, pseudo };

struct IsingEMOptions {
  EStepKind estep = EStepKind::automatic;
  int k_max_exact = kMaxExactK;
  PLConfig pl;  ///< field_prior_{a,b} are overridden by EMConfig prior_{a,b}
};

struct IsingFit {
  IsingParams params;
  PosteriorVector posterior;
  EMTrace trace;
  bool exact_estep = true;
};

/// Generalized EM for the two Ising variants. The M-step maximizes the
/// gamma-weighted penalized pseudo-likelihood of each class (jointly with
/// one coupling matrix in class_independent mode). With pseudo-likelihood
/// E-step scores the tracked objective
///   sum_i log sum_y pi_y exp(score_iy) + log priors - ridge
/// is non-decreasing; with exact scores the trace records the exact
/// observed log-likelihood plus the same prior terms.
IsingFit em_fit_ising(const VoteMatrix& v, IsingMode mode, const EMConfig& cfg = {},
                      const IsingEMOptions& opts = {});

/// Posteriors for new items under fitted parameters, scored the same way as
/// the E-step selected by `estep`.
PosteriorVector ising_posterior(const IsingParams& p, const VoteMatrix& v,
                                EStepKind estep = EStepKind::automatic, int k_max = kMaxExactK);

}  // namespace depagg
