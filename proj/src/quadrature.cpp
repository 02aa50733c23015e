#include "depagg/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace depagg {

namespace {

GaussHermite build(int n) {
  // Probabilists' Hermite recurrence: off-diagonal entries sqrt(k).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussHermite rule;
  for (int q = 0; q < n; ++q) {
    rule.nodes.push_back(es.eigenvalues()(q));
    const double v0 = es.eigenvectors()(0, q);
    rule.weights.push_back(v0 * v0);
  }
  // Symmetrize so odd moments vanish exactly.
  for (int q = 0; q < n / 2; ++q) {
    const int r = n - 1 - q;
    const double x = 0.5 * (rule.nodes[static_cast<std::size_t>(r)] - rule.nodes[static_cast<std::size_t>(q)]);
    const double w = 0.5 * (rule.weights[static_cast<std::size_t>(q)] + rule.weights[static_cast<std::size_t>(r)]);
    rule.nodes[static_cast<std::size_t>(q)] = -x;
    rule.nodes[static_cast<std::size_t>(r)] = x;
    rule.weights[static_cast<std::size_t>(q)] = rule.weights[static_cast<std::size_t>(r)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace

const GaussHermite& gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
  static std::mutex mu;
  static std::map<int, GaussHermite> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build(n)).first;
  return it->second;
}

}  // namespace depagg
