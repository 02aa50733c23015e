#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "depagg/votes.hpp"

namespace depagg {

enum class PLSolver { joint_newton, per_node };

struct PLConfig {
  double l2 = 1e-2;          ///< ridge on couplings: penalty l2 * ||W||_F^2
  double field_prior_a = 2.0;  ///< Beta(a, b) prior on sigmoid(h_j); a = b = 1 disables it
  double field_prior_b = 2.0;
  double grad_tol = 1e-6;    ///< stop when ||grad|| <= grad_tol * (1 + |objective|)
  int max_iters = 100;
  PLSolver solver = PLSolver::joint_newton;
};

/// Weighted pseudo-log-likelihood of one Ising law minus l2 * ||W||_F^2:
///   sum_i w_i sum_j [J_ij eta_ij - log(1 + e^eta_ij)],  eta_ij = h_j + sum_{k != j} W_jk J_ik.
double pseudo_log_likelihood(const Eigen::VectorXd& h, const Eigen::MatrixXd& W, const VoteMatrix& v,
                             std::span<const double> weights, double l2);

/// Gradient of `pseudo_log_likelihood`. `dW(j, k)` is the derivative with
/// respect to the symmetric coupling W_jk = W_kj moved as one parameter.
struct PLGradient {
  Eigen::VectorXd dh;
  Eigen::MatrixXd dW;
};
PLGradient pseudo_log_likelihood_grad(const Eigen::VectorXd& h, const Eigen::MatrixXd& W,
                                      const VoteMatrix& v, std::span<const double> weights, double l2);

/// Per-item pseudo-log-likelihood scores sum_j log Pr(J_ij | J_i,-j), no penalty.
Eigen::VectorXd pseudo_scores(const Eigen::VectorXd& h, const Eigen::MatrixXd& W, const VoteMatrix& v);

/// sum_j [(a-1) log sigmoid(h_j) + (b-1) log sigmoid(-h_j)].
double field_log_prior(const Eigen::VectorXd& h, double a, double b);

struct PLFit {
  Eigen::VectorXd h;
  Eigen::MatrixXd W;
  double objective = 0.0;  ///< penalized pseudo-log-likelihood plus field prior
  double grad_norm = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

/// Result of a coupled fit over one or more weighted classes.
struct SharedPLFit {
  std::vector<Eigen::VectorXd> h;  ///< one field vector per group
  Eigen::MatrixXd W;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

/// Raised when the solver hits its iteration cap; carries the best iterate
/// (a single-class fit stores its fields as h[0]).
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, SharedPLFit best)
      : std::runtime_error(what), best_(std::move(best)) {}
  [[nodiscard]] const SharedPLFit& best() const noexcept { return best_; }

 private:
  SharedPLFit best_;
};

/// Maximizes the penalized weighted pseudo-likelihood with field prior.
/// `start` (optional) warm-starts the joint solver.
PLFit fit_pseudo(const VoteMatrix& v, std::span<const double> weights, const PLConfig& cfg = {},
                 const PLFit* start = nullptr);

/// One weighted class inside a shared-coupling fit.
struct PLGroup {
  std::span<const double> weights;
  double prior_a = 2.0;
  double prior_b = 2.0;
};

/// Joint fit of per-group fields and one coupling matrix shared by all
/// groups. The ridge is counted once. `start` warm-starts the solver.
SharedPLFit fit_pseudo_shared(const VoteMatrix& v, std::span<const PLGroup> groups,
                              const PLConfig& cfg = {}, const SharedPLFit* start = nullptr);

}  // namespace depagg
