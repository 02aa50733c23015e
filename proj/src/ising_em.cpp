#include "depagg/ising_em.hpp"

#include <cmath>
#include <string>

#include "depagg/numerics.hpp"

namespace depagg {

namespace {

struct Scores {
  Eigen::VectorXd s0, s1;
};

Scores class_scores(const IsingParams& p, const VoteMatrix& v, bool exact, int k_max) {
  Scores sc;
  if (exact) {
    const auto ev = exact_evidence(p, k_max);
    sc.s0.resize(v.n());
    sc.s1.resize(v.n());
    for (int i = 0; i < v.n(); ++i) {
      const auto row = v.row(i);
      sc.s0(i) = energy(row, p.h0, p.W0) - ev.log_Z0;
      sc.s1(i) = energy(row, p.h1, p.W1) - ev.log_Z1;
    }
  } else {
    sc.s0 = pseudo_scores(p.h0, p.W0, v);
    sc.s1 = pseudo_scores(p.h1, p.W1, v);
  }
  return sc;
}

}  // namespace

PosteriorVector ising_posterior(const IsingParams& p, const VoteMatrix& v, EStepKind estep, int k_max) {
  p.validate();
  if (p.K() != v.K()) throw std::invalid_argument("ising_posterior: model K differs from votes K");
  if (estep == EStepKind::exact && v.K() > k_max) throw ExactEvidenceUnavailable(v.K(), k_max);
  const bool exact = estep == EStepKind::exact || (estep == EStepKind::automatic && v.K() <= k_max);
  const Scores sc = class_scores(p, v, exact, k_max);
  std::vector<double> gamma(static_cast<std::size_t>(v.n()));
  for (int i = 0; i < v.n(); ++i)
    gamma[static_cast<std::size_t>(i)] = sigmoid(logit(p.pi) + sc.s1(i) - sc.s0(i));
  return PosteriorVector::from_gamma(std::move(gamma));
}

IsingFit em_fit_ising(const VoteMatrix& v, IsingMode mode, const EMConfig& cfg, const IsingEMOptions& opts) {
  if (v.n() < 2) throw std::invalid_argument("em_fit_ising needs n >= 2");
  if (!(cfg.prior_a > 1.0 && cfg.prior_b > 1.0))
    throw std::invalid_argument("em_fit_ising: Beta prior needs a, b > 1");
  const int K = v.K();
  const double a = cfg.prior_a, b = cfg.prior_b;
  const bool shared = mode == IsingMode::class_independent;

  IsingFit fit;
  bool exact = false;
  switch (opts.estep) {
    case EStepKind::exact:
      if (K > opts.k_max_exact) throw ExactEvidenceUnavailable(K, opts.k_max_exact);
      exact = true;
      break;
    case EStepKind::pseudo:
      exact = false;
      break;
    case EStepKind::automatic:
      exact = K <= opts.k_max_exact;
      if (!exact)
        fit.trace.warnings.push_back("exact evidence unavailable: K = " + std::to_string(K) + " > " +
                                     std::to_string(opts.k_max_exact) +
                                     "; using pseudo-likelihood scores");
      break;
  }
  fit.exact_estep = exact;

  PLConfig pl1 = opts.pl, pl0 = opts.pl;
  // Class 1 fields carry the prior on sensitivity sigma(h1); class 0 fields
  // the same prior on specificity 1 - sigma(h0).
  pl1.field_prior_a = a;
  pl1.field_prior_b = b;
  pl0.field_prior_a = b;
  pl0.field_prior_b = a;

  std::vector<double> gamma = majority_init(v, cfg);
  std::vector<double> gamma0(gamma.size());
  IsingParams p = IsingParams::zeros(K, shared);
  PLFit warm0, warm1;
  warm0.h = warm1.h = p.h0;
  warm0.W = warm1.W = p.W0;
  SharedPLFit warm_shared;
  warm_shared.h = {p.h0, p.h1};
  warm_shared.W = p.W0;

  auto note = [&](const std::string& w) {
    for (const auto& x : fit.trace.warnings)
      if (x == w) return;
    fit.trace.warnings.push_back(w);
  };

  double prev = 0.0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    double g1 = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      gamma0[i] = 1.0 - gamma[i];
      g1 += gamma[i];
    }
    p.pi = (a - 1.0 + g1) / (a + b - 2.0 + v.n());

    if (shared) {
      const PLGroup groups[2] = {{gamma0, b, a}, {gamma, a, b}};
      SharedPLFit f;
      try {
        f = fit_pseudo_shared(v, groups, opts.pl, &warm_shared);
      } catch (const ConvergenceError& e) {
        note(std::string("M-step: ") + e.what());
        f = e.best();
      }
      for (const auto& w : f.warnings) note(w);
      p.h0 = f.h[0];
      p.h1 = f.h[1];
      p.W0 = f.W;
      p.W1 = f.W;
      warm_shared = std::move(f);
    } else {
      auto solve = [&](const std::vector<double>& w, const PLConfig& pc, PLFit& warm) {
        PLFit f;
        try {
          f = fit_pseudo(v, w, pc, &warm);
        } catch (const ConvergenceError& e) {
          note(std::string("M-step: ") + e.what());
          f.h = e.best().h[0];
          f.W = e.best().W;
        }
        for (const auto& x : f.warnings) note(x);
        warm = f;
      };
      solve(gamma, pl1, warm1);
      solve(gamma0, pl0, warm0);
      p.h1 = warm1.h;
      p.W1 = warm1.W;
      p.h0 = warm0.h;
      p.W0 = warm0.W;
    }

    const Scores sc = class_scores(p, v, exact, opts.k_max_exact);
    const double lp1 = std::log(p.pi), lp0 = std::log1p(-p.pi);
    double ll = 0.0;
    for (int i = 0; i < v.n(); ++i) {
      const double l1 = lp1 + sc.s1(i), l0 = lp0 + sc.s0(i);
      gamma[static_cast<std::size_t>(i)] = sigmoid(l1 - l0);
      ll += log_add_exp(l0, l1);
    }
    double obj = ll + log_beta_prior(p.pi, a, b) + field_log_prior(p.h1, a, b) + field_log_prior(p.h0, b, a);
    obj -= opts.pl.l2 * p.W1.squaredNorm();
    if (!shared) obj -= opts.pl.l2 * p.W0.squaredNorm();

    fit.trace.log_likelihood.push_back(ll);
    fit.trace.objective.push_back(obj);
    fit.trace.iterations = it + 1;
    if (it > 0 && std::abs(obj - prev) <= cfg.tol * std::abs(prev)) {
      fit.trace.converged = true;
      break;
    }
    prev = obj;
  }

  if (vote_orientation(v, gamma) < 0.0) {
    p = p.relabeled();
    for (double& g : gamma) g = 1.0 - g;
    fit.trace.flipped = true;
  }
  fit.params = std::move(p);
  fit.posterior = PosteriorVector::from_gamma(std::move(gamma));
  return fit;
}

}  // namespace depagg
