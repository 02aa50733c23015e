#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "depagg/ci.hpp"
#include "depagg/constants.hpp"
#include "depagg/curie_weiss.hpp"
#include "depagg/ising.hpp"
#include "depagg/ising_em.hpp"
#include "depagg/numerics.hpp"
#include "depagg/pipeline.hpp"
#include "depagg/rng.hpp"
#include "depagg/simulate.hpp"

using namespace depagg;

namespace {

Eigen::MatrixXd random_symmetric(Rng& rng, int K, double scale) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(K, K);
  for (int j = 0; j < K; ++j)
    for (int k = j + 1; k < K; ++k) W(j, k) = W(k, j) = rng.uniform(-scale, scale);
  return W;
}

Eigen::VectorXd random_fields(Rng& rng, int K, double scale) {
  Eigen::VectorXd h(K);
  for (int j = 0; j < K; ++j) h(j) = rng.uniform(-scale, scale);
  return h;
}

IsingParams random_params(Rng& rng, int K, bool shared) {
  IsingParams p;
  p.pi = rng.uniform(0.1, 0.9);
  p.h0 = random_fields(rng, K, 2.0);
  p.h1 = random_fields(rng, K, 2.0);
  p.W0 = random_symmetric(rng, K, 1.5);
  p.W1 = shared ? p.W0 : random_symmetric(rng, K, 1.5);
  p.shared_couplings = shared;
  return p;
}

// Unnormalized log-weight written out from the definition, without the
// library's energy() helper.
double naive_log_weight(const std::vector<int>& j, const Eigen::VectorXd& h, const Eigen::MatrixXd& W) {
  double e = 0.0;
  for (std::size_t a = 0; a < j.size(); ++a) {
    e += h(static_cast<Eigen::Index>(a)) * j[a];
    for (std::size_t b = 0; b < j.size(); ++b)
      if (a != b) e += 0.5 * W(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * j[a] * j[b];
  }
  return e;
}

double accuracy_of(const PosteriorVector& p, const VoteMatrix& v) { return accuracy(p.hard_labels, v.gold()); }

// Unsupervised fit on `train`, label orientation from the training gold, score on `test`.
double test_accuracy(ModelKind kind, const VoteMatrix& train, const VoteMatrix& test, const EMConfig& cfg) {
  auto fitted = fit_model(kind, train, cfg);
  orient_to_labels(fitted.model, train);
  return accuracy_of(predict(fitted.model, test), test);
}

}  // namespace

TEST_CASE("configuration order is lexicographic") {
  CHECK(config_from_index(0, 3) == std::vector<int>{0, 0, 0});
  CHECK(config_from_index(1, 3) == std::vector<int>{0, 0, 1});
  CHECK(config_from_index(4, 3) == std::vector<int>{1, 0, 0});
  CHECK(config_from_index(6, 3) == std::vector<int>{1, 1, 0});
}

TEST_CASE("energy") {
  const auto p = motivating_shared();
  CHECK(energy(std::vector<int>{0, 0, 0}, p.h0, p.W0) == 0.0);
  CHECK(energy(std::vector<int>{1, 0, 1}, p.h0, p.W0) == doctest::Approx(6.2221).epsilon(1e-12));
  const Eigen::VectorXd h0 = Eigen::VectorXd::Zero(4);
  const Eigen::MatrixXd W0 = Eigen::MatrixXd::Zero(4, 4);
  CHECK(energy(std::vector<int>{1, 1, 0, 1}, h0, W0) == 0.0);
}

TEST_CASE("log partition closed forms") {
  for (int K = 1; K <= 10; ++K) {
    CHECK(log_partition(Eigen::VectorXd::Zero(K), Eigen::MatrixXd::Zero(K, K)) ==
          doctest::Approx(K * std::log(2.0)).epsilon(1e-13));
  }
  for (double t : {-3.0, -0.2, 0.0, 1.7, 9.0}) {
    CHECK(log_partition(Eigen::VectorXd::Constant(1, t), Eigen::MatrixXd::Zero(1, 1)) ==
          doctest::Approx(std::log1p(std::exp(t))).epsilon(1e-13));
  }
  for (double w : {-2.0, 0.5, 3.0}) {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2, 2);
    W(0, 1) = W(1, 0) = w;
    CHECK(log_partition(Eigen::VectorXd::Zero(2), W) == doctest::Approx(std::log(3.0 + std::exp(w))).epsilon(1e-13));
  }
}

TEST_CASE("enumeration agrees with a naive sum") {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const int K = 1 + static_cast<int>(rng.below(9));
    const auto h = random_fields(rng, K, 2.0);
    const auto W = random_symmetric(rng, K, 2.0);
    std::vector<double> lw;
    for (std::uint32_t idx = 0; idx < (1u << K); ++idx) lw.push_back(naive_log_weight(config_from_index(idx, K), h, W));
    const double logZ = log_sum_exp(lw);
    CHECK(log_partition(h, W) == doctest::Approx(logZ).epsilon(1e-12));
    const auto probs = enumerate_probs(h, W);
    for (std::size_t i = 0; i < lw.size(); ++i) CHECK(probs[i] == doctest::Approx(std::exp(lw[i] - logZ)).epsilon(1e-10));
  }
}

TEST_CASE("shared-coupling example: frozen enumeration oracle") {
  // Independent evaluation of the three-judge example, rounded to the digits shown.
  const std::array<double, 8> y0 = {0.001806, 0.060323, 0.017999, 0.0048255, 3.155e-4, 0.909875, 2.011e-4, 0.004655};
  const std::array<double, 8> y1 = {0.31956, 0.020232, 0.37958, 1.929e-4, 0.042844, 0.234195, 0.0032546, 1.428e-4};
  const auto p = motivating_shared();
  for (std::uint32_t idx = 0; idx < 8; ++idx) {
    const auto j = config_from_index(idx, 3);
    CHECK(class_conditional_prob(p, j, 0) == doctest::Approx(y0[idx]).epsilon(1e-3));
    CHECK(class_conditional_prob(p, j, 1) == doctest::Approx(y1[idx]).epsilon(1e-3));
  }
  const std::vector<int> q = {0, 1, 1};
  CHECK(std::abs(class_conditional_prob(p, q, 0) - 0.00483) <= 5e-4);
  CHECK(std::abs(class_conditional_prob(p, q, 1) - 1.93e-4) <= 2e-5);
  CHECK(std::abs(sigmoid(bayes_log_odds(p, q)) - 0.038) <= 0.005);
  CHECK(sigmoid(bayes_log_odds(p, q)) == doctest::Approx(0.03844).epsilon(1e-3));

  const auto m = exact_marginals(p.h0, p.W0);
  CHECK(std::abs(m(0) - 0.9150) <= 5e-4);
  CHECK(std::abs(m(1) - 0.0277) <= 5e-4);
  CHECK(std::abs(m(2) - 0.9797) <= 5e-4);
  const auto ci = ci_from_marginals(p);
  CHECK(std::abs(sigmoid(ci_log_odds(ci, q)) - 0.968) <= 0.005);
  CHECK(sigmoid(ci_log_odds(ci, q)) == doctest::Approx(0.96824).epsilon(1e-4));
}

TEST_CASE("class-dependent example: frozen enumeration oracle") {
  const auto p = motivating_classdep();
  const std::vector<int> q = {1, 1, 0};
  CHECK(class_conditional_prob(p, q, 0) == doctest::Approx(0.003928).epsilon(1e-3));
  CHECK(class_conditional_prob(p, q, 1) == doctest::Approx(1.2368e-4).epsilon(1e-3));
  CHECK(std::abs(sigmoid(bayes_log_odds(p, q)) - 0.031) <= 0.005);
  CHECK(sigmoid(bayes_log_odds(p, q)) == doctest::Approx(0.03052).epsilon(1e-3));
  CHECK(sigmoid(ci_log_odds(ci_from_marginals(p), q)) == doctest::Approx(0.95706).epsilon(1e-4));
}

TEST_CASE("uniform law") {
  for (int K = 1; K <= 6; ++K) {
    const auto p = IsingParams::zeros(K, false);
    for (std::uint32_t idx = 0; idx < (1u << K); ++idx)
      CHECK(class_conditional_prob(p, config_from_index(idx, K), 1) == doctest::Approx(std::ldexp(1.0, -K)).epsilon(1e-13));
    const auto ci = ci_from_marginals(p);
    for (double a : ci.alpha) CHECK(a == doctest::Approx(0.5).epsilon(1e-13));
  }
}

TEST_CASE("normalization for K up to 12") {
  Rng rng(12);
  for (int t = 0; t < 40; ++t) {
    const int K = 1 + static_cast<int>(rng.below(12));
    const auto p = random_params(rng, K, false);
    for (int y = 0; y < 2; ++y) {
      double s = 0.0;
      for (std::uint32_t idx = 0; idx < (1u << K); ++idx) s += class_conditional_prob(p, config_from_index(idx, K), y);
      CHECK(std::abs(s - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("quadratic Bayes-rule identity") {
  Rng rng(21);
  for (int t = 0; t < 40; ++t) {
    const int K = 1 + static_cast<int>(rng.below(8));
    const auto p = random_params(rng, K, false);
    const auto ev = exact_evidence(p);
    const Eigen::VectorXd dh = p.h1 - p.h0;
    const Eigen::MatrixXd dW = p.W1 - p.W0;
    for (std::uint32_t idx = 0; idx < (1u << K); ++idx) {
      const auto j = config_from_index(idx, K);
      double rhs = 0.0;
      for (int a = 0; a < K; ++a) {
        rhs += dh(a) * j[static_cast<std::size_t>(a)];
        for (int b = a + 1; b < K; ++b) rhs += dW(a, b) * j[static_cast<std::size_t>(a)] * j[static_cast<std::size_t>(b)];
      }
      const double lhs = bayes_log_odds(p, j, ev) - logit(p.pi) - (ev.log_Z0 - ev.log_Z1);
      CHECK(std::abs(lhs - rhs) <= 1e-10);
      const double direct = std::log(p.pi * class_conditional_prob(p, j, 1)) -
                            std::log((1.0 - p.pi) * class_conditional_prob(p, j, 0));
      CHECK(std::abs(bayes_log_odds(p, j, ev) - direct) <= 1e-10);
    }
  }
}

TEST_CASE("shared couplings give a linear rule") {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    const int K = 1 + static_cast<int>(rng.below(10));
    const auto p = random_params(rng, K, true);
    const auto ev = exact_evidence(p);
    const Eigen::VectorXd c = p.h1 - p.h0;
    const double b0 = logit(p.pi) + ev.log_Z0 - ev.log_Z1;
    for (std::uint32_t idx = 0; idx < (1u << K); ++idx) {
      const auto j = config_from_index(idx, K);
      double lin = b0;
      for (int a = 0; a < K; ++a) lin += c(a) * j[static_cast<std::size_t>(a)];
      CHECK(std::abs(bayes_log_odds(p, j, ev) - lin) <= 1e-10);
    }
  }
}

TEST_CASE("zero couplings reduce to the CI model") {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const int K = 1 + static_cast<int>(rng.below(6));
    auto p = random_params(rng, K, false);
    p.W0.setZero();
    p.W1.setZero();
    CIParams ci;
    ci.pi = p.pi;
    for (int j = 0; j < K; ++j) {
      ci.alpha.push_back(sigmoid(p.h1(j)));
      ci.beta.push_back(1.0 - sigmoid(p.h0(j)));
    }
    for (std::uint32_t idx = 0; idx < (1u << K); ++idx) {
      const auto j = config_from_index(idx, K);
      CHECK(std::abs(bayes_log_odds(p, j) - ci_log_odds(ci, j)) <= 1e-10);
    }
  }
}

TEST_CASE("exact samples match the enumerated law") {
  Rng rng(40);
  const int K = 4;
  const auto h = random_fields(rng, K, 1.5);
  const auto W = random_symmetric(rng, K, 1.5);
  const int n = 1000000;
  const auto draws = sample_ising_class(h, W, n, 99);
  std::vector<double> counts(1u << K, 0.0);
  for (const auto& d : draws) {
    std::uint32_t idx = 0;
    for (int b : d) idx = idx << 1 | static_cast<std::uint32_t>(b);
    counts[idx] += 1.0;
  }
  const auto probs = enumerate_probs(h, W);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double se = std::sqrt(probs[i] * (1.0 - probs[i]) / n);
    CHECK(std::abs(counts[i] / n - probs[i]) <= 3.0 * se);
  }
}

TEST_CASE("exact evidence is refused above the cutoff") {
  auto p = IsingParams::zeros(16, false);
  CHECK_THROWS_AS(exact_evidence(p), ExactEvidenceUnavailable);
  try {
    (void)exact_evidence(p);
  } catch (const ExactEvidenceUnavailable& e) {
    CHECK(std::string(e.what()).find("exact evidence unavailable") == 0);
  }
  CHECK_NOTHROW(exact_evidence(IsingParams::zeros(15, false)));
}

TEST_CASE("parameter validation") {
  auto p = motivating_shared();
  CHECK_NOTHROW(p.validate());
  p.W1(0, 1) += 0.1;
  p.W1(1, 0) += 0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  auto q = motivating_classdep();
  q.W0(0, 1) = 1.0;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  auto r = motivating_classdep();
  r.W0(2, 2) = 0.5;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("one judge: Ising EM equals CI EM") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    CIParams truth{0.6, {0.8}, {0.7}};
    const auto v = sample_ci(truth, 300, s);
    EMConfig cfg;
    cfg.seed = s;
    cfg.tol = 1e-10;
    const auto ci = em_fit_ci(v, cfg);
    for (auto mode : {IsingMode::class_dependent, IsingMode::class_independent}) {
      IsingEMOptions opts;
      opts.pl.grad_tol = 1e-12;
      const auto is = em_fit_ising(v, mode, cfg, opts);
      for (int i = 0; i < v.n(); ++i)
        CHECK(is.posterior.gamma[static_cast<std::size_t>(i)] ==
              doctest::Approx(ci.posterior.gamma[static_cast<std::size_t>(i)]).epsilon(1e-6));
      CHECK(is.params.pi == doctest::Approx(ci.params.pi).epsilon(1e-6));
    }
  }
}

TEST_CASE("EM objective is monotone with pseudo-likelihood scores") {
  const auto truth = motivating_classdep();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto v = sample_ising(truth, 1000, s);
    EMConfig cfg;
    cfg.seed = s;
    IsingEMOptions opts;
    opts.estep = EStepKind::pseudo;
    for (auto mode : {IsingMode::class_dependent, IsingMode::class_independent}) {
      const auto fit = em_fit_ising(v, mode, cfg, opts);
      CHECK_FALSE(fit.exact_estep);
      for (std::size_t t = 1; t < fit.trace.objective.size(); ++t)
        CHECK(fit.trace.objective[t] >= fit.trace.objective[t - 1] - 1e-8 * std::abs(fit.trace.objective[t - 1]));
    }
  }
}

TEST_CASE("large K falls back to pseudo-likelihood scores with a warning") {
  Rng rng(1);
  IsingParams truth = IsingParams::zeros(20, false, 0.5);
  for (int j = 0; j < 20; ++j) {
    truth.h0(j) = -1.0;
    truth.h1(j) = 1.0;
  }
  VoteMatrix::Storage s(300, 20);
  std::vector<int> gold;
  for (int i = 0; i < 300; ++i) {
    const int y = rng.bernoulli(0.5);
    gold.push_back(y);
    for (int j = 0; j < 20; ++j) s(i, j) = rng.bernoulli(sigmoid(y ? 1.0 : -1.0));
  }
  const VoteMatrix v(s, {}, {}, gold);
  const auto fit = em_fit_ising(v, IsingMode::class_dependent);
  CHECK_FALSE(fit.exact_estep);
  REQUIRE_FALSE(fit.trace.warnings.empty());
  CHECK(fit.trace.warnings[0].find("exact evidence unavailable") != std::string::npos);
  for (double g : fit.posterior.gamma) CHECK((g >= 0.0 && g <= 1.0));
  IsingEMOptions strict;
  strict.estep = EStepKind::exact;
  CHECK_THROWS_AS(em_fit_ising(v, IsingMode::class_dependent, {}, strict), ExactEvidenceUnavailable);
}

TEST_CASE("shared-coupling data: class-independent EM against CI EM") {
  const auto truth = motivating_shared();
  std::vector<double> ising, ci;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto data = sample_ising(truth, 5000, derive_seed(11, {s}));
    const auto [train, test] = split(data, SplitSpec{0.5, s});
    EMConfig cfg;
    cfg.seed = s;
    ising.push_back(test_accuracy(ModelKind::ising_shared, train, test, cfg));
    ci.push_back(test_accuracy(ModelKind::ci, train, test, cfg));
  }
  const double gain = mean_se(ising).first - mean_se(ci).first;
  INFO("class-independent Ising " << mean_se(ising).first << ", CI " << mean_se(ci).first);
  CHECK(gain >= 0.03);
}

TEST_CASE("Curie-Weiss data: class-dependent EM against CI EM") {
  const double pi = 0.7;
  const int K = 10, n = 2000;
  std::vector<double> acc_is, acc_ci;
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng lab(derive_seed(s, {0x1abeULL}));
    const auto x0 = sample_cw(K, 0.5, 0.0, n, derive_seed(s, {0}));
    const auto x1 = sample_cw(K, 2.0, 0.0, n, derive_seed(s, {1}));
    VoteMatrix::Storage votes(n, K);
    std::vector<int> gold;
    for (int i = 0; i < n; ++i) {
      const int y = lab.bernoulli(pi);
      gold.push_back(y);
      for (int j = 0; j < K; ++j) votes(i, j) = static_cast<std::uint8_t>(((y ? x1(i, j) : x0(i, j)) + 1) / 2);
    }
    const VoteMatrix v(votes, {}, {}, gold);
    const auto [train, test] = split(v, SplitSpec{0.5, s});
    EMConfig cfg;
    cfg.seed = s;
    acc_is.push_back(test_accuracy(ModelKind::ising_classdep, train, test, cfg));
    acc_ci.push_back(test_accuracy(ModelKind::ci, train, test, cfg));
  }
  INFO("class-dependent Ising " << mean_se(acc_is).first << ", CI " << mean_se(acc_ci).first);
  CHECK(mean_se(acc_is).first >= 0.9);
  CHECK(mean_se(acc_ci).first <= std::max(pi, 1.0 - pi) + 0.05);
}
