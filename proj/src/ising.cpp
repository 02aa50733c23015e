#include "depagg/ising.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "depagg/numerics.hpp"
#include "depagg/rng.hpp"

namespace depagg {

namespace {

void check_exact(int K, int k_max) {
  if (K > k_max) throw ExactEvidenceUnavailable(K, k_max);
}

// Energies of all 2^K configurations, walking a Gray code so each step
// flips one bit and costs O(K).
std::vector<double> all_energies(const Eigen::VectorXd& h, const Eigen::MatrixXd& W) {
  const int K = static_cast<int>(h.size());
  const std::uint32_t total = 1u << K;
  std::vector<double> e(total, 0.0);
  std::vector<int> cfg(static_cast<std::size_t>(K), 0);
  // field[j] = h_j + sum_k W_jk J_k: the energy change from switching J_j on.
  Eigen::VectorXd field = h;
  double cur = 0.0;
  for (std::uint32_t g = 1; g < total; ++g) {
    const int bit = std::countr_zero(g);
    const int j = K - 1 - bit;
    auto& cj = cfg[static_cast<std::size_t>(j)];
    if (cj == 0) {
      cur += field(j);
      cj = 1;
      field += W.col(j);
    } else {
      field -= W.col(j);
      cj = 0;
      cur -= field(j);
    }
    e[g ^ (g >> 1)] = cur;
  }
  return e;
}

}  // namespace

ExactEvidenceUnavailable::ExactEvidenceUnavailable(int K, int k_max)
    : std::runtime_error("exact evidence unavailable: K = " + std::to_string(K) +
                         " exceeds the enumeration cutoff " + std::to_string(k_max) +
                         "; use pseudo-likelihood scoring") {}

void IsingParams::validate() const {
  const auto K = h0.size();
  if (K < 1) throw std::invalid_argument("IsingParams: K must be >= 1");
  if (h1.size() != K || W0.rows() != K || W0.cols() != K || W1.rows() != K || W1.cols() != K)
    throw std::invalid_argument("IsingParams: inconsistent shapes");
  if (!(pi > 0.0 && pi < 1.0)) throw std::invalid_argument("IsingParams: pi must lie in (0, 1)");
  for (const auto* W : {&W0, &W1}) {
    if (!(W->array() == W->transpose().array()).all())
      throw std::invalid_argument("IsingParams: couplings must be symmetric");
    if ((W->diagonal().array() != 0.0).any())
      throw std::invalid_argument("IsingParams: couplings must have a zero diagonal");
  }
  if (shared_couplings && !(W0.array() == W1.array()).all())
    throw std::invalid_argument("IsingParams: shared mode requires W0 == W1");
}

IsingParams IsingParams::relabeled() const {
  IsingParams out = *this;
  out.pi = 1.0 - pi;
  std::swap(out.h0, out.h1);
  std::swap(out.W0, out.W1);
  return out;
}

IsingParams IsingParams::zeros(int K, bool shared, double pi) {
  IsingParams p;
  p.pi = pi;
  p.h0 = Eigen::VectorXd::Zero(K);
  p.h1 = Eigen::VectorXd::Zero(K);
  p.W0 = Eigen::MatrixXd::Zero(K, K);
  p.W1 = Eigen::MatrixXd::Zero(K, K);
  p.shared_couplings = shared;
  return p;
}

std::vector<int> config_from_index(std::uint32_t idx, int K) {
  std::vector<int> j(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) j[static_cast<std::size_t>(k)] = static_cast<int>((idx >> (K - 1 - k)) & 1u);
  return j;
}

double energy(std::span<const int> j, const Eigen::VectorXd& h, const Eigen::MatrixXd& W) {
  const auto K = static_cast<int>(j.size());
  if (h.size() != K || W.rows() != K || W.cols() != K)
    throw std::invalid_argument("energy: shape mismatch");
  double e = 0.0;
  for (int a = 0; a < K; ++a) {
    if (!j[static_cast<std::size_t>(a)]) continue;
    e += h(a);
    for (int b = a + 1; b < K; ++b)
      if (j[static_cast<std::size_t>(b)]) e += W(a, b);
  }
  return e;
}

double log_partition(const Eigen::VectorXd& h, const Eigen::MatrixXd& W, int k_max) {
  check_exact(static_cast<int>(h.size()), k_max);
  const auto e = all_energies(h, W);
  return log_sum_exp(e);
}

std::vector<double> enumerate_probs(const Eigen::VectorXd& h, const Eigen::MatrixXd& W, int k_max) {
  check_exact(static_cast<int>(h.size()), k_max);
  auto e = all_energies(h, W);
  const double lz = log_sum_exp(e);
  for (double& x : e) x = std::exp(x - lz);
  return e;
}

ExactEvidence exact_evidence(const IsingParams& p, int k_max) {
  ExactEvidence ev;
  ev.K_max_exact = k_max;
  ev.log_Z0 = log_partition(p.h0, p.W0, k_max);
  ev.log_Z1 = p.shared_couplings && p.h0 == p.h1 ? ev.log_Z0 : log_partition(p.h1, p.W1, k_max);
  return ev;
}

double class_conditional_prob(const IsingParams& p, std::span<const int> j, int y, int k_max) {
  p.validate();
  const auto& h = p.h(y);
  const auto& W = p.W(y);
  return std::exp(energy(j, h, W) - log_partition(h, W, k_max));
}

double bayes_log_odds(const IsingParams& p, std::span<const int> j, const ExactEvidence& ev) {
  return logit(p.pi) + energy(j, p.h1, p.W1) - energy(j, p.h0, p.W0) + ev.log_Z0 - ev.log_Z1;
}

double bayes_log_odds(const IsingParams& p, std::span<const int> j, int k_max) {
  p.validate();
  return bayes_log_odds(p, j, exact_evidence(p, k_max));
}

PosteriorVector ising_predict(const IsingParams& p, const VoteMatrix& v, int k_max) {
  p.validate();
  if (p.K() != v.K()) throw std::invalid_argument("ising_predict: model K differs from votes K");
  const auto ev = exact_evidence(p, k_max);
  std::vector<double> gamma;
  gamma.reserve(static_cast<std::size_t>(v.n()));
  for (int i = 0; i < v.n(); ++i) gamma.push_back(sigmoid(bayes_log_odds(p, v.row(i), ev)));
  return PosteriorVector::from_gamma(std::move(gamma));
}

Eigen::VectorXd exact_marginals(const Eigen::VectorXd& h, const Eigen::MatrixXd& W, int k_max) {
  const int K = static_cast<int>(h.size());
  const auto probs = enumerate_probs(h, W, k_max);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(K);
  for (std::uint32_t idx = 0; idx < probs.size(); ++idx)
    for (int k = 0; k < K; ++k)
      if ((idx >> (K - 1 - k)) & 1u) m(k) += probs[idx];
  return m;
}

CIParams ci_from_marginals(const IsingParams& p, int k_max) {
  p.validate();
  const auto m0 = exact_marginals(p.h0, p.W0, k_max);
  const auto m1 = exact_marginals(p.h1, p.W1, k_max);
  CIParams c;
  c.pi = p.pi;
  for (int k = 0; k < p.K(); ++k) {
    c.alpha.push_back(m1(k));
    c.beta.push_back(1.0 - m0(k));
  }
  return c;
}

std::vector<std::vector<int>> sample_ising_class(const Eigen::VectorXd& h, const Eigen::MatrixXd& W,
                                                 int n, std::uint64_t seed, int k_max) {
  const int K = static_cast<int>(h.size());
  const auto probs = enumerate_probs(h, W, k_max);
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  Rng rng(seed);
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    out.push_back(config_from_index(static_cast<std::uint32_t>(it - cdf.begin()), K));
  }
  return out;
}

VoteMatrix sample_ising(const IsingParams& p, int n, std::uint64_t seed, int k_max) {
  p.validate();
  const int K = p.K();
  std::vector<std::vector<double>> cdf(2);
  for (int y = 0; y < 2; ++y) {
    const auto probs = enumerate_probs(p.h(y), p.W(y), k_max);
    cdf[static_cast<std::size_t>(y)].resize(probs.size());
    std::partial_sum(probs.begin(), probs.end(), cdf[static_cast<std::size_t>(y)].begin());
  }
  Rng rng(derive_seed(seed, {0x15195ULL}));
  VoteMatrix::Storage votes(n, K);
  std::vector<int> gold(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int y = rng.bernoulli(p.pi) ? 1 : 0;
    const auto& c = cdf[static_cast<std::size_t>(y)];
    const double u = rng.uniform() * c.back();
    auto it = std::upper_bound(c.begin(), c.end(), u);
    if (it == c.end()) --it;
    const auto idx = static_cast<std::uint32_t>(it - c.begin());
    for (int k = 0; k < K; ++k) votes(i, k) = static_cast<std::uint8_t>((idx >> (K - 1 - k)) & 1u);
    gold[static_cast<std::size_t>(i)] = y;
  }
  return VoteMatrix(std::move(votes), {}, {}, std::move(gold));
}

}  // namespace depagg
