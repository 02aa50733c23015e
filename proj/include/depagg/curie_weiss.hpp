#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace depagg {

enum class FieldMode { constant, scaled };

/// One class of the Curie-Weiss vote model: coupling beta > 0 and either a
/// constant per-spin field h or a scaled field c / K.
struct CWClassSpec {
  double beta = 1.0;
  FieldMode field_mode = FieldMode::constant;
  double field_value = 0.0;

  /// Per-spin field at K judges.
  [[nodiscard]] double field(int K) const;
  void validate() const;
};

/// Law of the magnetization M_K on {-1, -1 + 2/K, ..., 1}: weight
/// binom(K, K(1+m)/2) exp(beta K m^2 / 2 + h K m). Index u counts up-spins.
std::vector<double> magnetization_log_pmf(int K, double beta, double h);

/// n exact draws (rows) of K spins in {-1, +1}. Item i uses the stream
/// derive_seed(seed, {K, i}).
Eigen::MatrixXi sample_cw(int K, double beta, double h, int n, std::uint64_t seed);

/// All roots of m = tanh(beta m + h) in (-1, 1), ascending.
std::vector<double> solve_mean_field(double beta, double h);

/// Positive root of m = tanh(beta m); requires beta > 1.
double m_star(double beta);

/// The root selected in the large-K limit: the global maximizer of
/// beta m^2/2 + h m - entropy cost, i.e. the stable magnetization for h != 0.
double dominant_root(double beta, double h);

enum class CWStatistic { squared, absolute };

/// 1 iff M^2 >= t (squared) or |M| >= t (absolute); t must lie in (0, 1).
int magnetization_classifier(std::span<const int> spins, double t, CWStatistic mode);

/// Product-Bernoulli posterior thresholded at 1/2 given the true marginals.
/// Votes are 0/1.
int ci_oracle_predict(double q0, double q1, double pi, std::span<const int> votes);

/// Pr(J_1 = 1 | class) at K judges, exactly via E[M_K].
double true_marginal(const CWClassSpec& spec, int K);
/// K -> infinity limit of `true_marginal`.
double marginal_limit(const CWClassSpec& spec);

enum class ThresholdMode { automatic, explicit_value };

struct CWExperimentSpec {
  double pi = 0.5;
  CWClassSpec class0, class1;
  std::vector<int> K_grid;
  int n = 1000;
  CWStatistic statistic = CWStatistic::absolute;
  ThresholdMode threshold_mode = ThresholdMode::automatic;
  double threshold = 0.0;  ///< used when threshold_mode == explicit_value
  std::uint64_t seed = 42;

  void validate() const;
  /// Automatic rule: m*^2 / 2 for the squared statistic, (|m0| + m*)/2 for
  /// the absolute one (which requires m* > 1 - 2 q0).
  [[nodiscard]] double resolved_threshold() const;
};

struct SeparationRow {
  int K = 0;
  double risk_bayes = 0.0;  ///< magnetization-rule risk (Bayes proxy)
  double risk_ci = 0.0;
  double sep = 0.0;         ///< risk_ci - risk_bayes
  double se_bayes = 0.0;
  double se_ci = 0.0;
  double q0 = 0.5, q1 = 0.5;
  bool se_reliable = true;
};

std::vector<SeparationRow> run_separation(const CWExperimentSpec& spec);

/// CSV `K,risk_bayes,risk_ci,sep,se_bayes,se_ci`.
std::string separation_csv(const std::vector<SeparationRow>& rows);

}  // namespace depagg
