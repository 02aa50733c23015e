#include <doctest.h>

#include <array>
#include <cmath>

#include "depagg/ci.hpp"
#include "depagg/numerics.hpp"
#include "depagg/pipeline.hpp"
#include "depagg/rng.hpp"
#include "depagg/simulate.hpp"

using namespace depagg;

namespace {

CIParams random_params(Rng& rng, int K) {
  CIParams p;
  p.pi = rng.uniform(0.05, 0.95);
  for (int j = 0; j < K; ++j) {
    p.alpha.push_back(rng.uniform(0.02, 0.98));
    p.beta.push_back(rng.uniform(0.02, 0.98));
  }
  return p;
}

// Posterior by direct product of Bernoulli likelihoods.
double brute_posterior(const CIParams& p, const std::vector<int>& j) {
  double l1 = p.pi, l0 = 1.0 - p.pi;
  for (std::size_t k = 0; k < j.size(); ++k) {
    l1 *= j[k] ? p.alpha[k] : 1.0 - p.alpha[k];
    l0 *= j[k] ? 1.0 - p.beta[k] : p.beta[k];
  }
  return l1 / (l1 + l0);
}

VoteMatrix single_row(std::vector<int> bits) {
  VoteMatrix::Storage s(1, static_cast<Eigen::Index>(bits.size()));
  for (std::size_t k = 0; k < bits.size(); ++k) s(0, static_cast<Eigen::Index>(k)) = static_cast<std::uint8_t>(bits[k]);
  return VoteMatrix(std::move(s));
}

}  // namespace

TEST_CASE("uninformative judges leave the prior log-odds") {
  CIParams p{0.3, {0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}};
  for (std::uint32_t idx = 0; idx < 8; ++idx) {
    const std::vector<int> j = {static_cast<int>(idx >> 2 & 1), static_cast<int>(idx >> 1 & 1),
                                static_cast<int>(idx & 1)};
    CHECK(ci_log_odds(p, j) == doctest::Approx(logit(0.3)).epsilon(1e-14));
  }
}

TEST_CASE("single strong judge voting 1") {
  CIParams p{0.5, {0.9}, {0.9}};
  CHECK(ci_log_odds(p, std::vector<int>{1}) == doctest::Approx(2.1972245773362196).epsilon(1e-13));
}

TEST_CASE("log-odds match brute-force enumeration on random CI models") {
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int K = 1 + static_cast<int>(rng.below(8));
    const auto p = random_params(rng, K);
    for (std::uint32_t idx = 0; idx < (1u << K); ++idx) {
      std::vector<int> j(static_cast<std::size_t>(K));
      for (int k = 0; k < K; ++k) j[static_cast<std::size_t>(k)] = static_cast<int>(idx >> (K - 1 - k) & 1u);
      worst = std::max(worst, std::abs(sigmoid(ci_log_odds(p, j)) - brute_posterior(p, j)));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("log-odds are affine in each vote with slope w_k") {
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    const int K = 2 + static_cast<int>(rng.below(6));
    const auto p = random_params(rng, K);
    const auto wv = ci_weighted_vote(p);
    std::vector<int> j(static_cast<std::size_t>(K));
    for (auto& b : j) b = rng.bernoulli(0.5);
    for (int k = 0; k < K; ++k) {
      auto hi = j, lo = j;
      hi[static_cast<std::size_t>(k)] = 1;
      lo[static_cast<std::size_t>(k)] = 0;
      CHECK(ci_log_odds(p, hi) - ci_log_odds(p, lo) ==
            doctest::Approx(wv.weights[static_cast<std::size_t>(k)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("weighted vote signs") {
  CIParams strong{0.5, {0.9, 0.9, 0.9}, {0.9, 0.9, 0.9}};
  const auto post = wmv_predict(strong, single_row({1, 1, 1}));
  CHECK(post.hard_labels[0] == 1);
  CHECK(post.gamma[0] > 0.5);

  CIParams adv{0.5, {0.9, 0.2}, {0.9, 0.3}};
  CHECK(ci_log_odds(adv, std::vector<int>{0, 1}) < ci_log_odds(adv, std::vector<int>{0, 0}));
  CHECK(ci_weighted_vote(adv).weights[1] < 0.0);
}

TEST_CASE("oracle weighted vote beats uniform majority on setup 2") {
  const auto p = ci_setup(2);
  const auto v = sample_ci(p, 10000, 5);
  const double wmv = accuracy(wmv_predict(p, v).hard_labels, v.gold());
  const double umv = accuracy(umv_predict(v).hard_labels, v.gold());
  CHECK(wmv >= umv);
}

TEST_CASE("uniform majority vote") {
  CHECK(umv_predict(single_row({1, 1, 0})).hard_labels[0] == 1);
  CHECK(umv_predict(single_row({0, 0, 1})).hard_labels[0] == 0);
  const auto tie = umv_predict(single_row({1, 0}));
  CHECK(tie.hard_labels[0] == 1);
  CHECK(tie.gamma[0] == 0.5);
}

TEST_CASE("EM on setup 1 recovers the reference accuracy") {
  std::vector<double> accs;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto v = sample_ci(ci_setup(1), 200, derive_seed(1, {s}));
    EMConfig cfg;
    cfg.seed = s;
    accs.push_back(accuracy(em_fit_ci(v, cfg).posterior.hard_labels, v.gold()));
  }
  CHECK(std::abs(mean_se(accs).first - 0.997) <= 0.02);
}

TEST_CASE("EM on setup 3 against the reference accuracy") {
  std::vector<double> accs;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto v = sample_ci(ci_setup(3), 200, derive_seed(3, {s}));
    EMConfig cfg;
    cfg.seed = s;
    accs.push_back(accuracy(em_fit_ci(v, cfg).posterior.hard_labels, v.gold()));
  }
  const double m = mean_se(accs).first;
  INFO("mean EM-WMV accuracy on setup 3: " << m);
  CHECK(std::abs(m - 0.611) <= 0.05);
}

TEST_CASE("duplicated judge columns keep parameters interior") {
  Rng rng(8);
  VoteMatrix::Storage s(100, 3);
  for (int i = 0; i < 100; ++i) {
    const int b = rng.bernoulli(0.6);
    s(i, 0) = s(i, 1) = s(i, 2) = static_cast<std::uint8_t>(b);
  }
  const auto fit = em_fit_ci(VoteMatrix(s));
  CHECK(fit.trace.converged);
  REQUIRE_FALSE(fit.trace.warnings.empty());
  CHECK(fit.trace.warnings[0].find("low-information") != std::string::npos);
  for (int k = 0; k < 3; ++k) {
    CHECK(fit.params.alpha[static_cast<std::size_t>(k)] > 0.0);
    CHECK(fit.params.alpha[static_cast<std::size_t>(k)] < 1.0);
    CHECK(fit.params.beta[static_cast<std::size_t>(k)] > 0.0);
    CHECK(fit.params.beta[static_cast<std::size_t>(k)] < 1.0);
  }
}

TEST_CASE("EM objective is non-decreasing") {
  for (int setup = 1; setup <= 4; ++setup) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto v = sample_ci(ci_setup(setup), 300, s);
      EMConfig cfg;
      cfg.seed = s;
      cfg.tol = 1e-12;
      const auto fit = em_fit_ci(v, cfg);
      for (std::size_t t = 1; t < fit.trace.objective.size(); ++t)
        CHECK(fit.trace.objective[t] >= fit.trace.objective[t - 1] - 1e-10);
    }
  }
}

TEST_CASE("label-flip symmetry") {
  for (int setup = 1; setup <= 4; ++setup) {
    const auto v = sample_ci(ci_setup(setup), 400, 77);
    EMConfig cfg;
    cfg.init_jitter = 0.0;
    const auto a = em_fit_ci(v, cfg);
    const auto f = v.flipped();
    const auto b = em_fit_ci(f, cfg);
    CHECK(accuracy(a.posterior.hard_labels, v.gold()) ==
          doctest::Approx(accuracy(b.posterior.hard_labels, f.gold())).epsilon(1e-12));
  }
}

TEST_CASE("fitted posteriors are calibrated on simulated data") {
  const auto v = sample_ci(ci_setup(4), 100000, 31);
  const auto fit = em_fit_ci(v);
  std::array<double, 10> hits{}, count{};
  for (int i = 0; i < v.n(); ++i) {
    const double g = fit.posterior.gamma[static_cast<std::size_t>(i)];
    const auto b = static_cast<std::size_t>(std::min(9, static_cast<int>(g * 10.0)));
    count[b] += 1.0;
    hits[b] += v.gold()[static_cast<std::size_t>(i)];
  }
  for (std::size_t b = 0; b < 10; ++b) {
    if (count[b] < 100.0) continue;
    const double centre = (static_cast<double>(b) + 0.5) / 10.0;
    INFO("bin " << b << " count " << count[b]);
    CHECK(std::abs(hits[b] / count[b] - centre) <= 0.05);
  }
}

TEST_CASE("relabeled parameters describe the same law") {
  Rng rng(4);
  const auto p = random_params(rng, 4);
  const auto q = p.relabeled();
  const std::vector<int> j = {1, 0, 0, 1};
  CHECK(ci_log_odds(q, j) == doctest::Approx(-ci_log_odds(p, j)).epsilon(1e-12));
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(em_fit_ci(single_row({1, 0})), std::invalid_argument);
  const auto v = sample_ci(ci_setup(1), 20, 1);
  EMConfig flat;
  flat.prior_a = 1.0;
  CHECK_THROWS_AS(em_fit_ci(v, flat), std::invalid_argument);
  CIParams bad{0.5, {1.0}, {0.5}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CIParams p{0.5, {0.7, 0.7}, {0.7, 0.7}};
  CHECK_THROWS_AS((void)ci_log_odds(p, std::vector<int>{1}), std::invalid_argument);
}
