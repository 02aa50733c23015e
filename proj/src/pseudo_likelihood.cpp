#include "depagg/pseudo_likelihood.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "depagg/numerics.hpp"

namespace depagg {

namespace {

void check_weights(const VoteMatrix& v, std::span<const double> w) {
  if (static_cast<int>(w.size()) != v.n())
    throw std::invalid_argument("pseudo-likelihood: weights length must equal n");
  for (double x : w)
    if (!std::isfinite(x) || x < 0.0)
      throw std::invalid_argument("pseudo-likelihood: weights must be finite and non-negative");
}

Eigen::Map<const Eigen::VectorXd> as_vec(std::span<const double> w) {
  return {w.data(), static_cast<Eigen::Index>(w.size())};
}

// Row-major index of the strictly upper pair (j, k), j < k.
struct PairIndex {
  int K;
  std::vector<int> idx;
  explicit PairIndex(int K_) : K(K_), idx(static_cast<std::size_t>(K_ * K_), -1) {
    int c = 0;
    for (int j = 0; j < K; ++j)
      for (int k = j + 1; k < K; ++k) {
        idx[static_cast<std::size_t>(j * K + k)] = c;
        idx[static_cast<std::size_t>(k * K + j)] = c;
        ++c;
      }
  }
  [[nodiscard]] int count() const { return K * (K - 1) / 2; }
  [[nodiscard]] int operator()(int j, int k) const { return idx[static_cast<std::size_t>(j * K + k)]; }
};

// Parameter vector layout: G blocks of K fields, then the upper couplings.
struct Problem {
  const VoteMatrix& v;
  Eigen::MatrixXd X;  // n x K votes as reals
  std::vector<Eigen::VectorXd> w;
  std::vector<double> prior_a, prior_b;
  double l2;
  PairIndex pairs;
  int K, G;

  Problem(const VoteMatrix& v_, std::span<const PLGroup> groups, double l2_)
      : v(v_), X(v_.as_real()), l2(l2_), pairs(v_.K()), K(v_.K()), G(static_cast<int>(groups.size())) {
    for (const auto& g : groups) {
      check_weights(v, g.weights);
      w.emplace_back(as_vec(g.weights));
      prior_a.push_back(g.prior_a);
      prior_b.push_back(g.prior_b);
    }
  }

  [[nodiscard]] int dim() const { return G * K + pairs.count(); }

  [[nodiscard]] Eigen::MatrixXd couplings(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(K, K);
    for (int j = 0; j < K; ++j)
      for (int k = j + 1; k < K; ++k) W(j, k) = W(k, j) = theta(G * K + pairs(j, k));
    return W;
  }

  [[nodiscard]] Eigen::VectorXd pack(const std::vector<Eigen::VectorXd>& h, const Eigen::MatrixXd& W) const {
    Eigen::VectorXd theta(dim());
    for (int g = 0; g < G; ++g) theta.segment(g * K, K) = h[static_cast<std::size_t>(g)];
    for (int j = 0; j < K; ++j)
      for (int k = j + 1; k < K; ++k) theta(G * K + pairs(j, k)) = W(j, k);
    return theta;
  }

  // Objective, and optionally gradient and Hessian.
  double eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const {
    const Eigen::MatrixXd W = couplings(theta);
    const Eigen::MatrixXd XW = X * W;
    double f = -2.0 * l2 * theta.tail(pairs.count()).squaredNorm();
    if (grad) {
      grad->setZero(dim());
      grad->tail(pairs.count()) = -4.0 * l2 * theta.tail(pairs.count());
    }
    if (hess) {
      hess->setZero(dim(), dim());
      hess->diagonal().tail(pairs.count()).setConstant(-4.0 * l2);
    }
    Eigen::MatrixXd Xa(X.rows(), K + 1);
    if (hess) Xa << Eigen::VectorXd::Ones(X.rows()), X;

    for (int g = 0; g < G; ++g) {
      const auto& wg = w[static_cast<std::size_t>(g)];
      const Eigen::VectorXd h = theta.segment(g * K, K);
      const double a = prior_a[static_cast<std::size_t>(g)], b = prior_b[static_cast<std::size_t>(g)];
      Eigen::MatrixXd R(X.rows(), K), S(X.rows(), K);
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (int j = 0; j < K; ++j) {
          const double eta = h(j) + XW(i, j);
          const double s = sigmoid(eta);
          f += wg(i) * (X(i, j) * eta - log1pexp(eta));
          R(i, j) = wg(i) * (X(i, j) - s);
          S(i, j) = wg(i) * s * (1.0 - s);
        }
      }
      for (int j = 0; j < K; ++j) {
        const double sh = sigmoid(h(j));
        f += (a - 1.0) * std::log(sh) + (b - 1.0) * std::log1p(-sh);
        if (grad) (*grad)(g * K + j) += (a - 1.0) * (1.0 - sh) - (b - 1.0) * sh;
        if (hess) (*hess)(g * K + j, g * K + j) -= (a + b - 2.0) * sh * (1.0 - sh);
      }
      if (grad) {
        grad->segment(g * K, K) += R.colwise().sum().transpose();
        const Eigen::MatrixXd Gm = X.transpose() * R;  // Gm(k, j) = sum_i J_ik R_ij
        for (int j = 0; j < K; ++j)
          for (int k = j + 1; k < K; ++k) (*grad)(G * K + pairs(j, k)) += Gm(k, j) + Gm(j, k);
      }
      if (hess) {
        // Node j's linear predictor has design [1, J_-j]; map column 0 to
        // field (g, j) and column 1 + k to the pair (j, k).
        std::vector<int> map(static_cast<std::size_t>(K + 1));
        for (int j = 0; j < K; ++j) {
          const Eigen::MatrixXd A = Xa.transpose() * (S.col(j).asDiagonal() * Xa);
          map[0] = g * K + j;
          for (int k = 0; k < K; ++k) map[static_cast<std::size_t>(k + 1)] = k == j ? -1 : G * K + pairs(j, k);
          for (int r = 0; r <= K; ++r) {
            const int pr = map[static_cast<std::size_t>(r)];
            if (pr < 0) continue;
            for (int c = 0; c <= K; ++c) {
              const int pc = map[static_cast<std::size_t>(c)];
              if (pc < 0) continue;
              (*hess)(pr, pc) -= A(r, c);
            }
          }
        }
      }
    }
    return f;
  }
};

SharedPLFit unpack(const Problem& pb, const Eigen::VectorXd& theta, double f, double gnorm, int iters) {
  SharedPLFit out;
  for (int g = 0; g < pb.G; ++g) out.h.emplace_back(theta.segment(g * pb.K, pb.K));
  out.W = pb.couplings(theta);
  out.objective = f;
  out.grad_norm = gnorm;
  out.iterations = iters;
  return out;
}

SharedPLFit newton(const Problem& pb, Eigen::VectorXd theta, const PLConfig& cfg) {
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  double f = pb.eval(theta, &grad, &hess);
  for (int it = 0; it < cfg.max_iters; ++it) {
    const double gnorm = grad.norm();
    if (gnorm <= cfg.grad_tol * (1.0 + std::abs(f))) return unpack(pb, theta, f, gnorm, it);
    // -hess is positive definite when the priors are proper; the tiny
    // shift only guards flat directions of improper ones.
    Eigen::MatrixXd negH = -hess;
    negH.diagonal().array() += 1e-12 * (1.0 + negH.diagonal().cwiseAbs().maxCoeff());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(negH);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || grad.dot(step) <= 0.0) step = grad;
    const double slope = grad.dot(step);
    double t = 1.0;
    Eigen::VectorXd next;
    double fn = -std::numeric_limits<double>::infinity();
    for (int ls = 0; ls < 60; ++ls) {
      next = theta + t * step;
      fn = pb.eval(next, nullptr, nullptr);
      if (std::isfinite(fn) && fn >= f + 1e-4 * t * slope) break;
      t *= 0.5;
    }
    if (!(fn >= f)) {
      // No ascent possible at machine precision: the iterate is optimal up to rounding.
      return unpack(pb, theta, f, gnorm, it);
    }
    theta = std::move(next);
    f = pb.eval(theta, &grad, &hess);
  }
  const double gnorm = grad.norm();
  auto best = unpack(pb, theta, f, gnorm, cfg.max_iters);
  if (gnorm <= cfg.grad_tol * (1.0 + std::abs(f))) return best;
  throw ConvergenceError("pseudo-likelihood solver did not converge in " +
                             std::to_string(cfg.max_iters) + " iterations",
                         std::move(best));
}

// Weighted logistic regression of column j on [1, J_-j], fitted by Newton.
Eigen::VectorXd node_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& w, int j, const PLConfig& cfg) {
  const auto n = X.rows();
  const int K = static_cast<int>(X.cols());
  Eigen::MatrixXd D(n, K);
  D.col(0).setOnes();
  for (int k = 0, c = 1; k < K; ++k)
    if (k != j) D.col(c++) = X.col(k);
  const Eigen::VectorXd y = X.col(j);
  const double a = cfg.field_prior_a, b = cfg.field_prior_b;
  // Each node carries half of the symmetric ridge, i.e. l2 per directed coefficient.
  auto objective = [&](const Eigen::VectorXd& beta, Eigen::VectorXd* g, Eigen::MatrixXd* H) {
    const Eigen::VectorXd eta = D * beta;
    double f = -cfg.l2 * beta.tail(K - 1).squaredNorm();
    Eigen::VectorXd r(n), s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = sigmoid(eta(i));
      f += w(i) * (y(i) * eta(i) - log1pexp(eta(i)));
      r(i) = w(i) * (y(i) - p);
      s(i) = w(i) * p * (1.0 - p);
    }
    const double sh = sigmoid(beta(0));
    f += (a - 1.0) * std::log(sh) + (b - 1.0) * std::log1p(-sh);
    if (g) {
      *g = D.transpose() * r;
      g->tail(K - 1) -= 2.0 * cfg.l2 * beta.tail(K - 1);
      (*g)(0) += (a - 1.0) * (1.0 - sh) - (b - 1.0) * sh;
    }
    if (H) {
      *H = -(D.transpose() * (s.asDiagonal() * D));
      H->diagonal().tail(K - 1).array() -= 2.0 * cfg.l2;
      (*H)(0, 0) -= (a + b - 2.0) * sh * (1.0 - sh);
    }
    return f;
  };
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  double f = objective(beta, &g, &H);
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (g.norm() <= cfg.grad_tol * (1.0 + std::abs(f))) break;
    Eigen::MatrixXd negH = -H;
    negH.diagonal().array() += 1e-12;
    Eigen::VectorXd step = negH.ldlt().solve(g);
    if (!step.allFinite() || g.dot(step) <= 0.0) step = g;
    double t = 1.0, fn = f;
    Eigen::VectorXd next = beta;
    for (int ls = 0; ls < 60; ++ls) {
      next = beta + t * step;
      fn = objective(next, nullptr, nullptr);
      if (std::isfinite(fn) && fn >= f + 1e-4 * t * g.dot(step)) break;
      t *= 0.5;
    }
    if (!(fn >= f)) break;
    beta = next;
    f = objective(beta, &g, &H);
  }
  return beta;
}

}  // namespace

double pseudo_log_likelihood(const Eigen::VectorXd& h, const Eigen::MatrixXd& W, const VoteMatrix& v,
                             std::span<const double> weights, double l2) {
  check_weights(v, weights);
  const Eigen::MatrixXd X = v.as_real();
  const Eigen::MatrixXd Eta = (X * W).rowwise() + h.transpose();
  double f = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      f += weights[static_cast<std::size_t>(i)] * (X(i, j) * Eta(i, j) - log1pexp(Eta(i, j)));
  return f - l2 * W.squaredNorm();
}

PLGradient pseudo_log_likelihood_grad(const Eigen::VectorXd& h, const Eigen::MatrixXd& W,
                                      const VoteMatrix& v, std::span<const double> weights, double l2) {
  check_weights(v, weights);
  const Eigen::MatrixXd X = v.as_real();
  const Eigen::MatrixXd Eta = (X * W).rowwise() + h.transpose();
  Eigen::MatrixXd R(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      R(i, j) = weights[static_cast<std::size_t>(i)] * (X(i, j) - sigmoid(Eta(i, j)));
  PLGradient g;
  g.dh = R.colwise().sum().transpose();
  const Eigen::MatrixXd Gm = X.transpose() * R;
  g.dW = Gm + Gm.transpose() - 4.0 * l2 * W;
  g.dW.diagonal().setZero();
  return g;
}

Eigen::VectorXd pseudo_scores(const Eigen::VectorXd& h, const Eigen::MatrixXd& W, const VoteMatrix& v) {
  const Eigen::MatrixXd X = v.as_real();
  const Eigen::MatrixXd Eta = (X * W).rowwise() + h.transpose();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) s(i) += X(i, j) * Eta(i, j) - log1pexp(Eta(i, j));
  return s;
}

double field_log_prior(const Eigen::VectorXd& h, double a, double b) {
  double lp = 0.0;
  for (Eigen::Index j = 0; j < h.size(); ++j) {
    const double s = sigmoid(h(j));
    lp += (a - 1.0) * std::log(s) + (b - 1.0) * std::log1p(-s);
  }
  return lp;
}

SharedPLFit fit_pseudo_shared(const VoteMatrix& v, std::span<const PLGroup> groups, const PLConfig& cfg,
                              const SharedPLFit* start) {
  if (groups.empty()) throw std::invalid_argument("fit_pseudo_shared: need at least one group");
  Problem pb(v, groups, cfg.l2);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(pb.dim());
  if (start && static_cast<int>(start->h.size()) == pb.G && start->W.rows() == pb.K)
    theta = pb.pack(start->h, start->W);
  auto fit = newton(pb, std::move(theta), cfg);
  if (v.n() < v.K() + 1)
    fit.warnings.emplace_back("n < K+1: pseudo-likelihood fit is weakly identified");
  return fit;
}

PLFit fit_pseudo(const VoteMatrix& v, std::span<const double> weights, const PLConfig& cfg,
                 const PLFit* start) {
  check_weights(v, weights);
  PLFit out;
  if (cfg.solver == PLSolver::per_node) {
    const Eigen::MatrixXd X = v.as_real();
    const Eigen::VectorXd w = as_vec(weights);
    const int K = v.K();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(K, K);
    out.h.resize(K);
    for (int j = 0; j < K; ++j) {
      const Eigen::VectorXd beta = node_fit(X, w, j, cfg);
      out.h(j) = beta(0);
      for (int k = 0, c = 1; k < K; ++k)
        if (k != j) B(j, k) = beta(c++);
    }
    out.W = (B + B.transpose()) / 2.0;
    // The averaged estimate is reported against the joint objective.
    const PLGroup grp{weights, cfg.field_prior_a, cfg.field_prior_b};
    Problem pb(v, std::span<const PLGroup>(&grp, 1), cfg.l2);
    Eigen::VectorXd grad;
    out.objective = pb.eval(pb.pack({out.h}, out.W), &grad, nullptr);
    out.grad_norm = grad.norm();
    out.iterations = 1;
  } else {
    const PLGroup grp{weights, cfg.field_prior_a, cfg.field_prior_b};
    SharedPLFit warm;
    const SharedPLFit* warm_ptr = nullptr;
    if (start) {
      warm.h = {start->h};
      warm.W = start->W;
      warm_ptr = &warm;
    }
    auto fit = fit_pseudo_shared(v, std::span<const PLGroup>(&grp, 1), cfg, warm_ptr);
    out.h = std::move(fit.h[0]);
    out.W = std::move(fit.W);
    out.objective = fit.objective;
    out.grad_norm = fit.grad_norm;
    out.iterations = fit.iterations;
    out.warnings = std::move(fit.warnings);
  }
  if (v.n() < v.K() + 1 && cfg.solver == PLSolver::per_node)
    out.warnings.emplace_back("n < K+1: pseudo-likelihood fit is weakly identified");
  return out;
}

}  // namespace depagg
