#include "depagg/simulate.hpp"

#include <stdexcept>

#include "depagg/constants.hpp"
#include "depagg/rng.hpp"

namespace depagg {

namespace {

template <typename M>
Eigen::MatrixXd to_matrix(const M& rows) {
  Eigen::MatrixXd W(3, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) W(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return W;
}

template <typename A>
Eigen::VectorXd to_vector(const A& xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) v(static_cast<Eigen::Index>(i)) = xs[i];
  return v;
}

}  // namespace

VoteMatrix sample_ci(const CIParams& p, int n, std::uint64_t seed) {
  p.validate();
  if (n < 1) throw std::invalid_argument("sample_ci: n must be >= 1");
  const int K = p.K();
  Rng rng(derive_seed(seed, {0xc1ULL}));
  VoteMatrix::Storage votes(n, K);
  std::vector<int> gold(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int y = rng.bernoulli(p.pi) ? 1 : 0;
    for (int j = 0; j < K; ++j) {
      const double p1 = y ? p.alpha[static_cast<std::size_t>(j)] : 1.0 - p.beta[static_cast<std::size_t>(j)];
      votes(i, j) = rng.bernoulli(p1) ? 1 : 0;
    }
    gold[static_cast<std::size_t>(i)] = y;
  }
  return VoteMatrix(std::move(votes), {}, {}, std::move(gold));
}

CIParams ci_setup(int index) {
  if (index < 1 || index > 4) throw std::invalid_argument("ci_setup: index must be 1..4");
  const auto k = static_cast<std::size_t>(index - 1);
  CIParams p;
  p.pi = 0.5;
  p.alpha.assign(reference::kCISetupAlpha[k].begin(), reference::kCISetupAlpha[k].end());
  p.beta.assign(reference::kCISetupBeta[k].begin(), reference::kCISetupBeta[k].end());
  return p;
}

IsingParams motivating_shared() {
  IsingParams p;
  p.pi = reference::kMotivatingPi;
  p.h0 = to_vector(reference::kSharedH0);
  p.h1 = to_vector(reference::kSharedH1);
  p.W0 = to_matrix(reference::kSharedW);
  p.W1 = p.W0;
  p.shared_couplings = true;
  return p;
}

IsingParams motivating_classdep() {
  IsingParams p;
  p.pi = reference::kMotivatingPi;
  p.h0 = to_vector(reference::kClassDepH0);
  p.h1 = to_vector(reference::kClassDepH1);
  p.W0 = to_matrix(reference::kClassDepW0);
  p.W1 = to_matrix(reference::kClassDepW1);
  p.shared_couplings = false;
  return p;
}

}  // namespace depagg
