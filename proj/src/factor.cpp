#include "depagg/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "depagg/numerics.hpp"
#include "depagg/rng.hpp"

namespace depagg {

namespace {

constexpr std::uint64_t kItemStream = 0xfac7ULL;

double standard_error(double r, int n) { return std::sqrt(std::max(r * (1.0 - r), 0.0) / n); }

// Row (y * Q + q) of the returned matrix holds log pi_y + log w_q + log Pr(J_i | y, z_q).
Eigen::MatrixXd joint_log_scores(const MultiFactorParams& p, const Eigen::MatrixXd& X, const GaussHermite& gh) {
  const int K = p.K();
  const int Q = static_cast<int>(gh.nodes.size());
  Eigen::MatrixXd D(K, 2 * Q);
  Eigen::RowVectorXd base(2 * Q);
  for (int y = 0; y < 2; ++y) {
    const double lpy = y ? std::log(p.pi) : std::log1p(-p.pi);
    for (int q = 0; q < Q; ++q) {
      const int c = y * Q + q;
      double b0 = lpy + std::log(gh.weights[static_cast<std::size_t>(q)]);
      for (int j = 0; j < K; ++j) {
        const double eta = p.eta(j, y) + p.loadings(j, 0) * gh.nodes[static_cast<std::size_t>(q)];
        const double l0 = -log1pexp(eta);
        b0 += l0;
        D(j, c) = eta;  // log-odds of a 1 vote: (eta - g(eta)) - (-g(eta))
      }
      base(c) = b0;
    }
  }
  return (X * D).rowwise() + base;
}

struct JudgeStats {
  Eigen::VectorXd C, N;  // per (y, q): weighted count of 1-votes and total weight
};

struct JudgeObjective {
  const JudgeStats& st;
  const GaussHermite& gh;
  double pa, pb, l2;

  double operator()(const Eigen::Vector3d& th, Eigen::Vector3d* g, Eigen::Matrix3d* H) const {
    const int Q = static_cast<int>(gh.nodes.size());
    double f = -l2 * th(2) * th(2);
    if (g) *g << 0.0, 0.0, -2.0 * l2 * th(2);
    if (H) {
      H->setZero();
      (*H)(2, 2) = -2.0 * l2;
    }
    for (int y = 0; y < 2; ++y)
      for (int q = 0; q < Q; ++q) {
        const int c = y * Q + q;
        const double z = gh.nodes[static_cast<std::size_t>(q)];
        const Eigen::Vector3d x(y, 1.0, z);
        const double eta = x.dot(th);
        const double s = sigmoid(eta);
        f += st.C(c) * eta - st.N(c) * log1pexp(eta);
        if (g) *g += (st.C(c) - st.N(c) * s) * x;
        if (H) *H -= st.N(c) * s * (1.0 - s) * x * x.transpose();
      }
    // Beta(pa, pb) on sigma(a + b) and on 1 - sigma(b).
    const double t1 = th(0) + th(1), s1 = sigmoid(t1), s0 = sigmoid(th(1));
    f += (pa - 1.0) * std::log(s1) + (pb - 1.0) * std::log1p(-s1);
    f += (pb - 1.0) * std::log(s0) + (pa - 1.0) * std::log1p(-s0);
    if (g) {
      const double d1 = (pa - 1.0) * (1.0 - s1) - (pb - 1.0) * s1;
      const double d0 = (pb - 1.0) * (1.0 - s0) - (pa - 1.0) * s0;
      (*g)(0) += d1;
      (*g)(1) += d1 + d0;
    }
    if (H) {
      const double c1 = (pa + pb - 2.0) * s1 * (1.0 - s1), c0 = (pa + pb - 2.0) * s0 * (1.0 - s0);
      (*H)(0, 0) -= c1;
      (*H)(0, 1) -= c1;
      (*H)(1, 0) -= c1;
      (*H)(1, 1) -= c1 + c0;
    }
    return f;
  }
};

// Newton ascent from th; never returns a point with a lower objective. Returns false on stall.
bool ascend(const JudgeObjective& obj, Eigen::Vector3d& th, int iters) {
  Eigen::Vector3d g;
  Eigen::Matrix3d H;
  double f = obj(th, &g, &H);
  for (int it = 0; it < iters; ++it) {
    if (g.norm() <= 1e-9 * (1.0 + std::abs(f))) return true;
    Eigen::Matrix3d negH = -H;
    negH.diagonal().array() += 1e-12;
    Eigen::Vector3d step = negH.ldlt().solve(g);
    if (!step.allFinite() || g.dot(step) <= 0.0) step = g;
    double t = 1.0, fn = -std::numeric_limits<double>::infinity();
    Eigen::Vector3d next = th;
    for (int ls = 0; ls < 60; ++ls) {
      next = th + t * step;
      fn = obj(next, nullptr, nullptr);
      if (std::isfinite(fn) && fn >= f + 1e-4 * t * g.dot(step)) break;
      t *= 0.5;
    }
    if (!(fn >= f)) return true;  // optimal to rounding
    th = next;
    f = obj(th, &g, &H);
  }
  return g.norm() <= 1e-6 * (1.0 + std::abs(f));
}

double judge_log_prior(const MultiFactorParams& p, double pa, double pb, double l2) {
  double lp = 0.0;
  for (int j = 0; j < p.K(); ++j) {
    lp += log_beta_prior(sigmoid(p.a(j) + p.b(j)), pa, pb);
    lp += log_beta_prior(sigmoid(p.b(j)), pb, pa);
    lp -= l2 * p.loadings(j, 0) * p.loadings(j, 0);
  }
  return lp;
}

}  // namespace

void FactorParams::validate() const {
  if (!(pi > 0.0 && pi < 1.0)) throw std::invalid_argument("FactorParams: pi must lie in (0, 1)");
  if (!(sigma2_Z > 0.0)) throw std::invalid_argument("FactorParams: sigma2_Z must be > 0");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(lambda) || !std::isfinite(sigma2_Z))
    throw std::invalid_argument("FactorParams: parameters must be finite");
}

double FactorParams::success(int y, double z) const {
  const double sgn = 2.0 * y - 1.0;
  return sigmoid(b + a * sgn + lambda * sgn * z);
}

void MultiFactorParams::validate() const {
  if (!(pi > 0.0 && pi < 1.0)) throw std::invalid_argument("MultiFactorParams: pi must lie in (0, 1)");
  if (a.size() < 1 || b.size() != a.size()) throw std::invalid_argument("MultiFactorParams: bad field sizes");
  if (loadings.rows() != a.size() || loadings.cols() < 1)
    throw std::invalid_argument("MultiFactorParams: loading matrix must be K x r with r >= 1");
}

MultiFactorParams MultiFactorParams::from_scalar(const FactorParams& p, int K) {
  p.validate();
  MultiFactorParams m;
  m.pi = p.pi;
  m.a = Eigen::VectorXd::Constant(K, 2.0 * p.a);
  m.b = Eigen::VectorXd::Constant(K, p.b - p.a);
  m.loadings = Eigen::MatrixXd::Constant(K, 1, p.lambda * std::sqrt(p.sigma2_Z));
  return m;
}

VoteMatrix sample_factor(const FactorParams& p, int K, int n, std::uint64_t seed) {
  p.validate();
  if (K < 1 || n < 1) throw std::invalid_argument("sample_factor: need K >= 1 and n >= 1");
  const double sz = std::sqrt(p.sigma2_Z);
  VoteMatrix::Storage votes(n, K);
  std::vector<int> gold(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng item(derive_seed(seed, {kItemStream, static_cast<std::uint64_t>(i)}));
    const int y = item.bernoulli(p.pi) ? 1 : 0;
    const double z = sz * item.normal();
    const double s = p.success(y, z);
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(i)}));
    for (int j = 0; j < K; ++j) votes(i, j) = rng.bernoulli(s) ? 1 : 0;
    gold[static_cast<std::size_t>(i)] = y;
  }
  return VoteMatrix(std::move(votes), {}, {}, std::move(gold));
}

double marginal_success(const FactorParams& p, int y, int nodes) {
  p.validate();
  const auto& gh = gauss_hermite(nodes);
  const double sz = std::sqrt(p.sigma2_Z);
  double q = 0.0;
  for (std::size_t k = 0; k < gh.nodes.size(); ++k) q += gh.weights[k] * p.success(y, sz * gh.nodes[k]);
  return q;
}

double bayes_limit_score(const FactorParams& p, double s) {
  p.validate();
  if (p.lambda == 0.0) throw std::invalid_argument("factor degenerate; Bayes limit undefined by this formula");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("bayes_limit_score: s must lie in (0, 1)");
  return logit(p.pi) + 2.0 * p.a / (p.lambda * p.lambda * p.sigma2_Z) * (logit(s) - p.b);
}

double ci_limit_score(double q0, double q1, double s) {
  for (double x : {q0, q1, s})
    if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("ci_limit_score: arguments must lie in (0, 1)");
  return s * std::log(q1 / q0) + (1.0 - s) * std::log((1.0 - q1) / (1.0 - q0));
}

double ci_limit_score_kl(double q0, double q1, double s) {
  for (double x : {q0, q1, s})
    if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("ci_limit_score_kl: arguments must lie in (0, 1)");
  return bernoulli_kl(s, q0) - bernoulli_kl(s, q1);
}

std::vector<SeparationRow> run_factor_separation(const FactorParams& p, const std::vector<int>& K_grid, int n,
                                                 std::uint64_t seed) {
  p.validate();
  if (p.lambda == 0.0) throw std::invalid_argument("run_factor_separation requires lambda != 0");
  if (n < 1) throw std::invalid_argument("run_factor_separation: n must be >= 1");
  const double q0 = marginal_success(p, 0), q1 = marginal_success(p, 1);
  std::vector<SeparationRow> rows;
  for (int K : K_grid) {
    if (K < 1) throw std::invalid_argument("run_factor_separation: K values must be >= 1");
    const VoteMatrix v = sample_factor(p, K, n, seed);
    const double lo = 1.0 / (2.0 * K), hi = 1.0 - 1.0 / (2.0 * K);
    int err_b = 0, err_c = 0;
    for (int i = 0; i < n; ++i) {
      int S = 0;
      for (int j = 0; j < K; ++j) S += v(i, j);
      const double s = static_cast<double>(S) / K;
      const int y = v.gold()[static_cast<std::size_t>(i)];
      // At K = 1 the clamp interval collapses to {1/2}.
      const double sc = std::clamp(s, lo, hi);
      const int pred_b = bayes_limit_score(p, sc) >= 0.0 ? 1 : 0;
      // K * l_ind(s) written in counts so s in {0, 1} needs no clamp.
      const double ci = S * std::log(q1 / q0) + (K - S) * std::log((1.0 - q1) / (1.0 - q0)) + logit(p.pi);
      const int pred_c = ci >= 0.0 ? 1 : 0;
      err_b += pred_b != y;
      err_c += pred_c != y;
    }
    SeparationRow row;
    row.K = K;
    row.q0 = q0;
    row.q1 = q1;
    row.risk_bayes = static_cast<double>(err_b) / n;
    row.risk_ci = static_cast<double>(err_c) / n;
    row.sep = row.risk_ci - row.risk_bayes;
    row.se_bayes = standard_error(row.risk_bayes, n);
    row.se_ci = standard_error(row.risk_ci, n);
    row.se_reliable = n >= 30;
    rows.push_back(row);
  }
  return rows;
}

double factor_log_likelihood(const MultiFactorParams& p, const std::vector<int>& j, int y, int nodes_per_dim) {
  p.validate();
  if (static_cast<int>(j.size()) != p.K()) throw std::invalid_argument("factor_log_likelihood: length mismatch");
  const int r = p.r();
  if (nodes_per_dim <= 0) nodes_per_dim = r == 1 ? kDefaultQuadratureNodes : (r == 2 ? 41 : 21);
  const auto& gh = gauss_hermite(nodes_per_dim);
  const int Q = nodes_per_dim;
  std::vector<int> idx(static_cast<std::size_t>(r), 0);
  std::vector<double> terms;
  Eigen::VectorXd z(r);
  while (true) {
    double lw = 0.0;
    for (int d = 0; d < r; ++d) {
      z(d) = gh.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])];
      lw += std::log(gh.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(d)])]);
    }
    for (int k = 0; k < p.K(); ++k) {
      const double eta = p.eta(k, y) + p.loadings.row(k).dot(z);
      lw += (j[static_cast<std::size_t>(k)] ? eta : 0.0) - log1pexp(eta);
    }
    terms.push_back(lw);
    int d = 0;
    while (d < r && ++idx[static_cast<std::size_t>(d)] == Q) idx[static_cast<std::size_t>(d++)] = 0;
    if (d == r) break;
  }
  return log_sum_exp(terms);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> factor_to_ising(const MultiFactorParams& p, double epsilon, int y) {
  p.validate();
  const int K = p.K();
  const Eigen::MatrixXd L = epsilon * p.loadings;
  Eigen::MatrixXd W = L * L.transpose();
  Eigen::VectorXd eta(K), pj(K);
  for (int j = 0; j < K; ++j) {
    eta(j) = p.eta(j, y);
    pj(j) = sigmoid(eta(j));
  }
  Eigen::VectorXd h(K);
  for (int j = 0; j < K; ++j) {
    double cross = 0.0;
    for (int k = 0; k < K; ++k)
      if (k != j) cross += pj(k) * W(j, k);
    h(j) = eta(j) + (0.5 - pj(j)) * W(j, j) - cross;
  }
  W.diagonal().setZero();
  return {h, W};
}

PosteriorVector factor_posterior(const MultiFactorParams& p, const VoteMatrix& v, int nodes) {
  p.validate();
  if (p.r() != 1) throw std::invalid_argument("factor_posterior: only rank 1 is supported");
  if (p.K() != v.K()) throw std::invalid_argument("factor_posterior: model K differs from votes K");
  const auto& gh = gauss_hermite(nodes);
  const int Q = nodes;
  const Eigen::MatrixXd S = joint_log_scores(p, v.as_real(), gh);
  std::vector<double> gamma(static_cast<std::size_t>(v.n()));
  std::vector<double> buf(static_cast<std::size_t>(Q));
  for (int i = 0; i < v.n(); ++i) {
    double l[2];
    for (int y = 0; y < 2; ++y) {
      for (int q = 0; q < Q; ++q) buf[static_cast<std::size_t>(q)] = S(i, y * Q + q);
      l[y] = log_sum_exp(buf);
    }
    gamma[static_cast<std::size_t>(i)] = sigmoid(l[1] - l[0]);
  }
  return PosteriorVector::from_gamma(std::move(gamma));
}

FactorFit em_fit_factor(const VoteMatrix& v, int rank, const EMConfig& cfg, const FactorEMOptions& opts) {
  if (rank != 1) throw std::invalid_argument("em_fit_factor: only rank 1 is supported");
  if (v.n() < 2) throw std::invalid_argument("em_fit_factor needs n >= 2");
  if (!(cfg.prior_a > 1.0 && cfg.prior_b > 1.0))
    throw std::invalid_argument("em_fit_factor: Beta prior needs a, b > 1");
  const double pa = cfg.prior_a, pb = cfg.prior_b;
  const int K = v.K(), n = v.n();
  const auto& gh = gauss_hermite(opts.nodes);
  const int Q = opts.nodes;
  const Eigen::MatrixXd X = v.as_real();

  FactorFit fit;
  MultiFactorParams p;
  p.a.resize(K);
  p.b.resize(K);
  p.loadings = Eigen::MatrixXd::Constant(K, 1, opts.init_loading);
  {
    const auto g0 = majority_init(v, cfg);
    double g1 = 0.0;
    for (double g : g0) g1 += g;
    p.pi = (pa - 1.0 + g1) / (pa + pb - 2.0 + n);
    for (int j = 0; j < K; ++j) {
      double on1 = pa - 1.0, on0 = pb - 1.0;
      for (int i = 0; i < n; ++i) {
        on1 += g0[static_cast<std::size_t>(i)] * X(i, j);
        on0 += (1.0 - g0[static_cast<std::size_t>(i)]) * X(i, j);
      }
      const double r1 = on1 / (pa + pb - 2.0 + g1), r0 = on0 / (pa + pb - 2.0 + (n - g1));
      p.b(j) = logit(r0);
      p.a(j) = logit(r1) - p.b(j);
    }
  }

  std::vector<double> gamma(static_cast<std::size_t>(n));
  Eigen::MatrixXd R(n, 2 * Q);
  std::vector<double> buf(static_cast<std::size_t>(2 * Q));
  double prev = 0.0;
  bool stalled = false;
  for (int it = 0; it < cfg.max_iters; ++it) {
    // E-step on the discretized mixture.
    const Eigen::MatrixXd S = joint_log_scores(p, X, gh);
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 2 * Q; ++c) buf[static_cast<std::size_t>(c)] = S(i, c);
      const double lz = log_sum_exp(buf);
      ll += lz;
      double g = 0.0;
      for (int c = 0; c < 2 * Q; ++c) {
        R(i, c) = std::exp(S(i, c) - lz);
        if (c >= Q) g += R(i, c);
      }
      gamma[static_cast<std::size_t>(i)] = g;
    }
    const double obj = ll + log_beta_prior(p.pi, pa, pb) + judge_log_prior(p, pa, pb, opts.l2_loading);
    fit.trace.log_likelihood.push_back(ll);
    fit.trace.objective.push_back(obj);
    fit.trace.iterations = it + 1;
    if (it > 0 && std::abs(obj - prev) <= cfg.tol * std::abs(prev)) {
      fit.trace.converged = true;
      break;
    }
    prev = obj;
    if (it + 1 == cfg.max_iters) break;

    // M-step.
    double g1 = 0.0;
    for (double g : gamma) g1 += g;
    p.pi = (pa - 1.0 + g1) / (pa + pb - 2.0 + n);
    JudgeStats st;
    st.N = R.colwise().sum().transpose();
    const Eigen::MatrixXd C = X.transpose() * R;  // K x 2Q
    for (int j = 0; j < K; ++j) {
      st.C = C.row(j).transpose();
      JudgeObjective jo{st, gh, pa, pb, opts.l2_loading};
      Eigen::Vector3d th(p.a(j), p.b(j), p.loadings(j, 0));
      if (!ascend(jo, th, opts.newton_iters)) stalled = true;
      p.a(j) = th(0);
      p.b(j) = th(1);
      p.loadings(j, 0) = th(2);
    }
  }
  if (stalled) fit.trace.warnings.emplace_back("M-step optimizer stalled; returning best iterate");

  if (p.loadings.sum() < 0.0) p.loadings = -p.loadings;
  if (vote_orientation(v, gamma) < 0.0) {
    p.pi = 1.0 - p.pi;
    p.b = p.a + p.b;
    p.a = -p.a;
    for (double& g : gamma) g = 1.0 - g;
    fit.trace.flipped = true;
  }
  fit.params = std::move(p);
  fit.posterior = PosteriorVector::from_gamma(std::move(gamma));
  return fit;
}

}  // namespace depagg
