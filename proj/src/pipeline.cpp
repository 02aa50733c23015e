#include "depagg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "depagg/ci.hpp"
#include "depagg/factor.hpp"
#include "depagg/ising_em.hpp"
#include "depagg/rng.hpp"

namespace depagg {

FittedModel fit_model(ModelKind kind, const VoteMatrix& v, const EMConfig& cfg) {
  FittedModel out;
  out.model.kind = kind;
  switch (kind) {
    case ModelKind::ci: {
      auto f = em_fit_ci(v, cfg);
      out.model.ci = std::move(f.params);
      out.posterior = std::move(f.posterior);
      out.trace = std::move(f.trace);
      break;
    }
    case ModelKind::ising_shared:
    case ModelKind::ising_classdep: {
      const auto mode = kind == ModelKind::ising_shared ? IsingMode::class_independent : IsingMode::class_dependent;
      auto f = em_fit_ising(v, mode, cfg);
      out.model.ising = std::move(f.params);
      out.posterior = std::move(f.posterior);
      out.trace = std::move(f.trace);
      break;
    }
    case ModelKind::factor: {
      auto f = em_fit_factor(v, 1, cfg);
      out.model.factor = std::move(f.params);
      out.posterior = std::move(f.posterior);
      out.trace = std::move(f.trace);
      break;
    }
    case ModelKind::umv:
      out.posterior = umv_predict(v);
      break;
  }
  return out;
}

std::vector<int> sample_judges(int K, int m, std::uint64_t seed) {
  if (m < 1 || m > K) throw std::invalid_argument("sample_judges: need 1 <= m <= K");
  std::vector<int> idx(static_cast<std::size_t>(K));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int k = 0; k < m; ++k) {
    const int r = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(K - k)));
    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(r)]);
  }
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::pair<double, double> mean_se(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

std::vector<EvalSummary> evaluate_models(const VoteMatrix& v, const EvalSpec& spec) {
  if (!v.has_gold()) throw std::invalid_argument("evaluate: gold labels are required");
  if (spec.trials < 1) throw std::invalid_argument("evaluate: trials must be >= 1");
  if (spec.models.empty()) throw std::invalid_argument("evaluate: no models requested");
  const int m = spec.judges == 0 ? v.K() : spec.judges;
  std::vector<EvalSummary> out(spec.models.size());
  for (std::size_t k = 0; k < spec.models.size(); ++k) out[k].model = spec.models[k];
  for (int t = 0; t < spec.trials; ++t) {
    const std::uint64_t ts = derive_seed(spec.seed, {static_cast<std::uint64_t>(t)});
    const auto cols = sample_judges(v.K(), m, derive_seed(ts, {0x7d9eULL}));
    const VoteMatrix sub = v.select_judges(cols);
    const auto [train, test] = split(sub, SplitSpec{spec.train_fraction, ts});
    EMConfig em = spec.em;
    em.seed = ts;
    for (std::size_t k = 0; k < spec.models.size(); ++k) {
      auto fitted = fit_model(spec.models[k], train, em);
      if (spec.orient_with_train_labels) orient_to_labels(fitted.model, train);
      const auto post = predict(fitted.model, test);
      out[k].accuracies.push_back(accuracy(post.hard_labels, test.gold()));
    }
  }
  for (auto& s : out) std::tie(s.mean, s.se) = mean_se(s.accuracies);
  return out;
}

}  // namespace depagg
