#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "depagg/curie_weiss.hpp"
#include "depagg/em.hpp"
#include "depagg/factor.hpp"
#include "depagg/ising.hpp"
#include "depagg/pipeline.hpp"

namespace depagg {

// ---- Data-level experiment runners (shared by `reproduce` and the acceptance binary) ----

struct MotivatingResult {
  std::vector<double> p0, p1;  ///< Pr(J | Y=y) for all 8 configurations, lexicographic
  Eigen::VectorXd m0, m1;      ///< true marginals Pr(J_j = 1 | Y=y)
  double lik0 = 0.0, lik1 = 0.0;
  double bayes_posterior = 0.0;
  double ci_posterior = 0.0;   ///< CI posterior built from the true marginals
};

MotivatingResult motivating_result(const IsingParams& p, std::span<const int> query);

struct CISetupResult {
  int setup = 0;
  double wmv_mean = 0.0, wmv_se = 0.0;
  double umv_mean = 0.0, umv_se = 0.0;
};

/// `trials` fresh datasets of n items from setup `setup`; EM is run on each
/// dataset and accuracy is measured on the same items against gold.
CISetupResult ci_setup_experiment(int setup, int trials, int n, std::uint64_t seed, const EMConfig& em);

CWExperimentSpec cw_thm31_spec(std::uint64_t seed);
CWExperimentSpec cw_thm32_spec(std::uint64_t seed, double beta1, double c);

/// p = sigma(2 c m*(beta1)) and the limiting CI risk pi (1 - p).
double cw_thm32_limit_risk(double pi, double beta1, double c);

struct DependenceGainResult {
  EvalSummary classdep, shared, ci, umv;
};

/// Per seed: n items drawn from the class-dependent three-judge model, split
/// by `train_fraction`, each model fitted without labels on the training part,
/// oriented with the training labels, and scored on the rest.
DependenceGainResult dependence_gain(int trials, int n, double train_fraction, std::uint64_t seed,
                                     const EMConfig& em);

// ---- Named reproduction targets ----

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Artifact {
  std::string filename;
  std::string content;
};

struct ExperimentReport {
  std::string name;
  std::string text;  ///< human-readable tables
  std::vector<Check> checks;
  std::vector<Artifact> artifacts;

  [[nodiscard]] bool passed() const;
};

struct ReproduceOptions {
  std::uint64_t seed = 42;
  int trials = 20;
  EMConfig em;
};

const std::vector<std::string>& experiment_names();

/// Throws std::invalid_argument for an unknown name.
ExperimentReport run_experiment(const std::string& name, const ReproduceOptions& opt);

}  // namespace depagg
