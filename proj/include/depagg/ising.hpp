#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "depagg/ci.hpp"
#include "depagg/votes.hpp"

namespace depagg {

inline constexpr int kMaxExactK = 15;

/// Class-conditional Ising law
///   Pr(J | Y=y) = exp(h_y . J + 1/2 sum_{j != k} W_y[j,k] J_j J_k) / Z_y.
/// In shared mode W0 and W1 must be identical.
struct IsingParams {
  double pi = 0.5;
  Eigen::VectorXd h0, h1;
  Eigen::MatrixXd W0, W1;
  bool shared_couplings = false;

  [[nodiscard]] int K() const noexcept { return static_cast<int>(h0.size()); }
  [[nodiscard]] const Eigen::VectorXd& h(int y) const { return y ? h1 : h0; }
  [[nodiscard]] const Eigen::MatrixXd& W(int y) const { return y ? W1 : W0; }

  /// Throws std::invalid_argument on shape, symmetry, diagonal or sharing violations.
  void validate() const;
  /// Class labels swapped: (h0, W0) <-> (h1, W1), pi -> 1 - pi.
  [[nodiscard]] IsingParams relabeled() const;

  /// Zero-field, zero-coupling parameters for K judges.
  static IsingParams zeros(int K, bool shared, double pi = 0.5);
};

class ExactEvidenceUnavailable : public std::runtime_error {
 public:
  ExactEvidenceUnavailable(int K, int k_max);
};

/// Log partition functions of both classes.
struct ExactEvidence {
  double log_Z0 = 0.0;
  double log_Z1 = 0.0;
  int K_max_exact = kMaxExactK;
};

/// Vote vector for enumeration index `idx`: J_1 is the most significant bit,
/// so index order is lexicographic in (J_1, ..., J_K).
std::vector<int> config_from_index(std::uint32_t idx, int K);

double energy(std::span<const int> j, const Eigen::VectorXd& h, const Eigen::MatrixXd& W);

/// log sum_J exp(energy(J)). Throws ExactEvidenceUnavailable when K > k_max.
double log_partition(const Eigen::VectorXd& h, const Eigen::MatrixXd& W, int k_max = kMaxExactK);

/// Normalized probabilities of all 2^K configurations, in index order.
std::vector<double> enumerate_probs(const Eigen::VectorXd& h, const Eigen::MatrixXd& W,
                                    int k_max = kMaxExactK);

ExactEvidence exact_evidence(const IsingParams& p, int k_max = kMaxExactK);

double class_conditional_prob(const IsingParams& p, std::span<const int> j, int y,
                              int k_max = kMaxExactK);

/// Bayes log-odds logit(pi) + (E_1 - E_0)(J) + log Z_0 - log Z_1.
double bayes_log_odds(const IsingParams& p, std::span<const int> j, const ExactEvidence& ev);
double bayes_log_odds(const IsingParams& p, std::span<const int> j, int k_max = kMaxExactK);

/// Exact posteriors for every row of `v`.
PosteriorVector ising_predict(const IsingParams& p, const VoteMatrix& v, int k_max = kMaxExactK);

/// Per-judge Pr(J_k = 1) under fields h and couplings W, by enumeration.
Eigen::VectorXd exact_marginals(const Eigen::VectorXd& h, const Eigen::MatrixXd& W,
                                int k_max = kMaxExactK);

/// CI parameters carrying the exact one-dimensional class-conditional marginals.
CIParams ci_from_marginals(const IsingParams& p, int k_max = kMaxExactK);

/// n exact draws from one class's law through the 2^K categorical, one row per draw.
std::vector<std::vector<int>> sample_ising_class(const Eigen::VectorXd& h, const Eigen::MatrixXd& W,
                                                 int n, std::uint64_t seed, int k_max = kMaxExactK);

/// Labeled dataset: Y_i ~ Bernoulli(pi), J_i ~ Pr(. | Y_i). Gold labels attached.
VoteMatrix sample_ising(const IsingParams& p, int n, std::uint64_t seed, int k_max = kMaxExactK);

}  // namespace depagg
