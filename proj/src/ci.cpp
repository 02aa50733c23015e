#include "depagg/ci.hpp"

#include <cmath>
#include <stdexcept>

#include "depagg/numerics.hpp"

namespace depagg {

namespace {

bool interior(double p) { return p > 0.0 && p < 1.0; }

// Per-judge log-likelihood contributions for a vote of 1 and 0 under each class.
struct LogTables {
  std::vector<double> one1, zero1, one0, zero0;
};

LogTables log_tables(const CIParams& p) {
  LogTables t;
  for (int j = 0; j < p.K(); ++j) {
    const double a = p.alpha[static_cast<std::size_t>(j)];
    const double b = p.beta[static_cast<std::size_t>(j)];
    t.one1.push_back(std::log(a));
    t.zero1.push_back(std::log1p(-a));
    t.one0.push_back(std::log1p(-b));
    t.zero0.push_back(std::log(b));
  }
  return t;
}

// Fills per-item log-odds and returns the observed log-likelihood.
double e_step(const CIParams& p, const VoteMatrix& v, std::vector<double>& log_odds) {
  const LogTables t = log_tables(p);
  const double lp1 = std::log(p.pi), lp0 = std::log1p(-p.pi);
  log_odds.assign(static_cast<std::size_t>(v.n()), 0.0);
  double ll = 0.0;
  for (int i = 0; i < v.n(); ++i) {
    double l1 = lp1, l0 = lp0;
    for (int j = 0; j < v.K(); ++j) {
      const auto k = static_cast<std::size_t>(j);
      if (v(i, j)) {
        l1 += t.one1[k];
        l0 += t.one0[k];
      } else {
        l1 += t.zero1[k];
        l0 += t.zero0[k];
      }
    }
    log_odds[static_cast<std::size_t>(i)] = l1 - l0;
    ll += log_add_exp(l0, l1);
  }
  return ll;
}

CIParams m_step(const VoteMatrix& v, const std::vector<double>& gamma, double a, double b) {
  CIParams p;
  const int K = v.K();
  std::vector<double> s1(static_cast<std::size_t>(K), 0.0), s0(static_cast<std::size_t>(K), 0.0);
  double g1 = 0.0, g0 = 0.0;
  for (int i = 0; i < v.n(); ++i) {
    const double g = gamma[static_cast<std::size_t>(i)];
    g1 += g;
    g0 += 1.0 - g;
    for (int j = 0; j < K; ++j) {
      if (v(i, j)) s1[static_cast<std::size_t>(j)] += g;
      else s0[static_cast<std::size_t>(j)] += 1.0 - g;
    }
  }
  const double denom_pad = a + b - 2.0;
  p.pi = (a - 1.0 + g1) / (denom_pad + v.n());
  for (int j = 0; j < K; ++j) {
    p.alpha.push_back((a - 1.0 + s1[static_cast<std::size_t>(j)]) / (denom_pad + g1));
    p.beta.push_back((a - 1.0 + s0[static_cast<std::size_t>(j)]) / (denom_pad + g0));
  }
  return p;
}

double log_prior(const CIParams& p, double a, double b) {
  double lp = log_beta_prior(p.pi, a, b);
  for (int j = 0; j < p.K(); ++j)
    lp += log_beta_prior(p.alpha[static_cast<std::size_t>(j)], a, b) +
          log_beta_prior(p.beta[static_cast<std::size_t>(j)], a, b);
  return lp;
}

bool all_columns_identical(const VoteMatrix& v) {
  for (int j = 1; j < v.K(); ++j)
    if (v.votes().col(j) != v.votes().col(0)) return false;
  return true;
}

}  // namespace

void CIParams::validate() const {
  if (alpha.size() != beta.size()) throw std::invalid_argument("CIParams: alpha/beta length mismatch");
  if (alpha.empty()) throw std::invalid_argument("CIParams: K must be >= 1");
  if (!interior(pi)) throw std::invalid_argument("CIParams: pi must lie in (0, 1)");
  for (std::size_t j = 0; j < alpha.size(); ++j)
    if (!interior(alpha[j]) || !interior(beta[j]))
      throw std::invalid_argument("CIParams: alpha/beta must lie in (0, 1)");
}

CIParams CIParams::relabeled() const {
  CIParams out;
  out.pi = 1.0 - pi;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    out.alpha.push_back(1.0 - beta[j]);
    out.beta.push_back(1.0 - alpha[j]);
  }
  return out;
}

WeightedVote ci_weighted_vote(const CIParams& p) {
  p.validate();
  WeightedVote wv;
  wv.intercept = logit(p.pi);
  for (int j = 0; j < p.K(); ++j) {
    const double a = p.alpha[static_cast<std::size_t>(j)];
    const double b = p.beta[static_cast<std::size_t>(j)];
    wv.weights.push_back(logit(a) + logit(b));
    wv.intercept += std::log1p(-a) - std::log(b);
  }
  return wv;
}

double ci_log_odds(const CIParams& p, std::span<const int> votes) {
  p.validate();
  if (static_cast<int>(votes.size()) != p.K())
    throw std::invalid_argument("ci_log_odds: vote vector length must equal K");
  double lo = logit(p.pi);
  for (int j = 0; j < p.K(); ++j) {
    const double a = p.alpha[static_cast<std::size_t>(j)];
    const double b = p.beta[static_cast<std::size_t>(j)];
    if (votes[static_cast<std::size_t>(j)]) lo += std::log(a) - std::log1p(-b);
    else lo += std::log1p(-a) - std::log(b);
  }
  return lo;
}

PosteriorVector wmv_predict(const CIParams& p, const VoteMatrix& v) {
  p.validate();
  if (p.K() != v.K()) throw std::invalid_argument("wmv_predict: model K differs from votes K");
  std::vector<double> lo;
  e_step(p, v, lo);
  std::vector<double> gamma;
  gamma.reserve(lo.size());
  for (double t : lo) gamma.push_back(sigmoid(t));
  return PosteriorVector::from_gamma(std::move(gamma));
}

PosteriorVector umv_predict(const VoteMatrix& v) {
  std::vector<double> gamma;
  gamma.reserve(static_cast<std::size_t>(v.n()));
  for (int i = 0; i < v.n(); ++i) {
    int ones = 0;
    for (int j = 0; j < v.K(); ++j) ones += v(i, j);
    if (2 * ones == v.K()) gamma.push_back(0.5);
    else gamma.push_back(static_cast<double>(ones) / v.K());
  }
  return PosteriorVector::from_gamma(std::move(gamma));
}

double ci_observed_log_likelihood(const CIParams& p, const VoteMatrix& v) {
  p.validate();
  std::vector<double> lo;
  return e_step(p, v, lo);
}

CIFit em_fit_ci(const VoteMatrix& v, const EMConfig& cfg) {
  if (v.n() < 2) throw std::invalid_argument("em_fit_ci needs n >= 2");
  if (!(cfg.prior_a > 1.0 && cfg.prior_b > 1.0))
    throw std::invalid_argument("em_fit_ci: Beta prior needs a, b > 1");

  CIFit fit;
  if (all_columns_identical(v))
    fit.trace.warnings.emplace_back("low-information input: all judge columns identical");

  std::vector<double> gamma = majority_init(v, cfg);
  std::vector<double> lo;
  CIParams p;
  double prev = 0.0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    p = m_step(v, gamma, cfg.prior_a, cfg.prior_b);
    const double ll = e_step(p, v, lo);
    const double obj = ll + log_prior(p, cfg.prior_a, cfg.prior_b);
    for (std::size_t i = 0; i < lo.size(); ++i) gamma[i] = sigmoid(lo[i]);
    fit.trace.log_likelihood.push_back(ll);
    fit.trace.objective.push_back(obj);
    fit.trace.iterations = it + 1;
    if (it > 0 && std::abs(obj - prev) <= cfg.tol * std::abs(prev)) {
      fit.trace.converged = true;
      break;
    }
    prev = obj;
  }

  double wsum = 0.0;
  for (double w : ci_weighted_vote(p).weights) wsum += w;
  if (wsum < 0.0) {
    p = p.relabeled();
    for (double& g : gamma) g = 1.0 - g;
    fit.trace.flipped = true;
  }
  fit.params = std::move(p);
  fit.posterior = PosteriorVector::from_gamma(std::move(gamma));
  return fit;
}

}  // namespace depagg
