#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "depagg/curie_weiss.hpp"
#include "depagg/em.hpp"
#include "depagg/quadrature.hpp"
#include "depagg/votes.hpp"

namespace depagg {

/// Exchangeable logistic-normal judges: given (Y=y, Z=z) with Z ~ N(0, sigma2_Z),
/// every vote is Bernoulli(sigma(b + a(2y-1) + lambda(2y-1) z)).
struct FactorParams {
  double pi = 0.5;
  double a = 0.0;
  double b = 0.0;
  double lambda = 0.0;
  double sigma2_Z = 1.0;

  void validate() const;
  [[nodiscard]] double success(int y, double z) const;
};

/// Heterogeneous judges with an r-dimensional standard-normal factor:
/// J_j | (Y=y, Z=z) ~ Bernoulli(sigma(eta_j(y) + lambda_j . z)), eta_j(y) = a_j y + b_j.
struct MultiFactorParams {
  double pi = 0.5;
  Eigen::VectorXd a, b;
  Eigen::MatrixXd loadings;  ///< K x r

  [[nodiscard]] int K() const noexcept { return static_cast<int>(a.size()); }
  [[nodiscard]] int r() const noexcept { return static_cast<int>(loadings.cols()); }
  [[nodiscard]] double eta(int j, int y) const { return a(j) * y + b(j); }
  void validate() const;

  /// The scalar model for K judges. Z -> -Z symmetry lets both classes share
  /// the loading lambda * sigma_Z.
  static MultiFactorParams from_scalar(const FactorParams& p, int K);
};

/// Y_i ~ Bernoulli(pi), Z_i ~ N(0, sigma2_Z), votes conditionally i.i.d.
VoteMatrix sample_factor(const FactorParams& p, int K, int n, std::uint64_t seed);

/// q_y = E_Z[sigma(b + a(2y-1) + lambda(2y-1) Z)] by Gauss-Hermite quadrature.
double marginal_success(const FactorParams& p, int y, int nodes = kDefaultQuadratureNodes);

/// logit(pi) + 2a / (lambda^2 sigma2_Z) (logit(s) - b). Throws when lambda = 0.
double bayes_limit_score(const FactorParams& p, double s);

/// s log(q1/q0) + (1-s) log((1-q1)/(1-q0)).
double ci_limit_score(double q0, double q1, double s);
/// The same quantity written as KL(s||q0) - KL(s||q1).
double ci_limit_score_kl(double q0, double q1, double s);

/// Empirical risks of the plug-in rules 1{l*(s_K) >= 0} (s_K clamped to
/// [1/(2K), 1 - 1/(2K)]) and 1{K l_ind(s_K) + logit(pi) >= 0}.
std::vector<SeparationRow> run_factor_separation(const FactorParams& p, const std::vector<int>& K_grid,
                                                 int n, std::uint64_t seed);

/// log Pr(J | Y=y) by tensor-product Gauss-Hermite quadrature over Z.
double factor_log_likelihood(const MultiFactorParams& p, const std::vector<int>& j, int y,
                             int nodes_per_dim = 0);

/// Second-order Ising reduction with loadings scaled by epsilon:
/// W_jk = lambda_j . lambda_k and
/// h_j = eta_j + (1/2 - p_j) |lambda_j|^2 - sum_{k != j} p_k lambda_j . lambda_k, p_j = sigma(eta_j).
std::pair<Eigen::VectorXd, Eigen::MatrixXd> factor_to_ising(const MultiFactorParams& p, double epsilon, int y);

struct FactorEMOptions {
  int nodes = kDefaultQuadratureNodes;
  double l2_loading = 1.0;  ///< ridge on each loading, i.e. a N(0, 1/2) prior
  double init_loading = 0.1;
  int newton_iters = 50;
};

struct FactorFit {
  MultiFactorParams params;
  PosteriorVector posterior;
  EMTrace trace;
};

/// EM over the discretized (label, quadrature node) mixture with sigma_Z = 1.
/// Only rank 1 is supported. The tracked objective is the quadrature
/// observed log-likelihood plus log priors, non-decreasing per iteration.
FactorFit em_fit_factor(const VoteMatrix& v, int rank = 1, const EMConfig& cfg = {},
                        const FactorEMOptions& opts = {});

/// Posteriors under fitted rank-1 parameters.
PosteriorVector factor_posterior(const MultiFactorParams& p, const VoteMatrix& v,
                                 int nodes = kDefaultQuadratureNodes);

}  // namespace depagg
