#pragma once

#include <cstdint>
#include <vector>

#include "depagg/em.hpp"
#include "depagg/model_io.hpp"
#include "depagg/votes.hpp"

namespace depagg {

struct FittedModel {
  Model model;
  PosteriorVector posterior;  ///< posteriors on the training items
  EMTrace trace;              ///< empty for umv
};

/// Unsupervised fit of one model family on `v` (gold labels, if any, are ignored).
FittedModel fit_model(ModelKind kind, const VoteMatrix& v, const EMConfig& cfg);

struct EvalSpec {
  std::vector<ModelKind> models;
  int trials = 20;
  double train_fraction = 0.15;
  int judges = 0;  ///< judges drawn per trial without replacement; 0 keeps all
  std::uint64_t seed = 42;
  EMConfig em;
  /// Resolve each fit's label orientation with the training labels
  /// (`orient_to_labels`); test labels are only used for scoring.
  bool orient_with_train_labels = true;
};

struct EvalSummary {
  ModelKind model = ModelKind::umv;
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> accuracies;
};

/// Repeated seeded train/test splits. Trial t uses seed derive_seed(seed, {t})
/// for its split, its judge subset and its EM initialization; each model is
/// fitted on the training part and scored against gold on the test part.
std::vector<EvalSummary> evaluate_models(const VoteMatrix& v, const EvalSpec& spec);

/// Sorted judge indices drawn without replacement.
std::vector<int> sample_judges(int K, int m, std::uint64_t seed);

/// Mean and standard error of the mean.
std::pair<double, double> mean_se(const std::vector<double>& xs);

}  // namespace depagg
