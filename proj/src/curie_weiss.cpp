#include "depagg/curie_weiss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "depagg/numerics.hpp"
#include "depagg/rng.hpp"

namespace depagg {

namespace {

constexpr std::uint64_t kLabelStream = 0x1abe1ULL;

std::vector<double> pmf(int K, double beta, double h) {
  auto lp = magnetization_log_pmf(K, beta, h);
  for (double& x : lp) x = std::exp(x);
  return lp;
}

// Draws one row of K spins: up-spin count from the cdf, then a partial
// Fisher-Yates shuffle picks their positions.
void draw_row(const std::vector<double>& cdf, Rng& rng, std::vector<int>& pos, int* out) {
  const int K = static_cast<int>(pos.size());
  const double u = rng.uniform() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  const int ups = static_cast<int>(it - cdf.begin());
  std::iota(pos.begin(), pos.end(), 0);
  for (int k = 0; k < ups; ++k) {
    const int r = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(K - k)));
    std::swap(pos[static_cast<std::size_t>(k)], pos[static_cast<std::size_t>(r)]);
  }
  for (int k = 0; k < K; ++k) out[k] = -1;
  for (int k = 0; k < ups; ++k) out[pos[static_cast<std::size_t>(k)]] = 1;
}

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  std::partial_sum(p.begin(), p.end(), c.begin());
  return c;
}

double mean_field_gap(double beta, double h, double m) { return std::tanh(beta * m + h) - m; }

// Large-K exponent per spin at magnetization m.
double free_energy(double beta, double h, double m) {
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  const double up = (1.0 + m) / 2.0, dn = (1.0 - m) / 2.0;
  return beta * m * m / 2.0 + h * m - xlogx(up) - xlogx(dn);
}

double standard_error(double r, int n) { return std::sqrt(std::max(r * (1.0 - r), 0.0) / n); }

}  // namespace

double CWClassSpec::field(int K) const {
  return field_mode == FieldMode::scaled ? field_value / K : field_value;
}

void CWClassSpec::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("CWClassSpec: beta must be > 0");
  if (!std::isfinite(field_value)) throw std::invalid_argument("CWClassSpec: field must be finite");
}

std::vector<double> magnetization_log_pmf(int K, double beta, double h) {
  if (K < 1) throw std::invalid_argument("magnetization_log_pmf: K must be >= 1");
  std::vector<double> lp(static_cast<std::size_t>(K) + 1);
  for (int u = 0; u <= K; ++u) {
    const double m = (2.0 * u - K) / K;
    lp[static_cast<std::size_t>(u)] = log_binomial(K, u) + beta * K * m * m / 2.0 + h * K * m;
  }
  const double z = log_sum_exp(lp);
  for (double& x : lp) x -= z;
  return lp;
}

Eigen::MatrixXi sample_cw(int K, double beta, double h, int n, std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("sample_cw: K must be >= 1");
  const auto cdf = cumulative(pmf(K, beta, h));
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(n, K);
  std::vector<int> pos(static_cast<std::size_t>(K));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(i)}));
    draw_row(cdf, rng, pos, out.row(i).data());
  }
  return out;
}

std::vector<double> solve_mean_field(double beta, double h) {
  if (!(beta > 0.0)) throw std::invalid_argument("solve_mean_field: beta must be > 0");
  const double lo = -1.0 + 1e-9, hi = 1.0 - 1e-9;
  constexpr int kGrid = 8000;
  std::vector<double> roots;
  auto push = [&](double r) {
    if (roots.empty() || std::abs(roots.back() - r) > 1e-10) roots.push_back(r);
  };
  double a = lo, fa = mean_field_gap(beta, h, a);
  if (fa == 0.0) push(a);
  for (int g = 1; g <= kGrid; ++g) {
    const double b = lo + (hi - lo) * g / kGrid;
    const double fb = mean_field_gap(beta, h, b);
    if (fb == 0.0) {
      push(b);
    } else if (fa != 0.0 && (fa < 0.0) != (fb < 0.0)) {
      double x0 = a, x1 = b, f0 = fa;
      for (int it = 0; it < 200 && x1 - x0 > 1e-16; ++it) {
        const double mid = 0.5 * (x0 + x1);
        const double fm = mean_field_gap(beta, h, mid);
        if (fm == 0.0) {
          x0 = x1 = mid;
          break;
        }
        if ((fm < 0.0) == (f0 < 0.0)) {
          x0 = mid;
          f0 = fm;
        } else {
          x1 = mid;
        }
      }
      push(0.5 * (x0 + x1));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

double m_star(double beta) {
  if (!(beta > 1.0)) throw std::invalid_argument("m_star: requires beta > 1");
  return solve_mean_field(beta, 0.0).back();
}

double dominant_root(double beta, double h) {
  const auto roots = solve_mean_field(beta, h);
  double best = roots.front();
  for (double r : roots)
    if (free_energy(beta, h, r) > free_energy(beta, h, best)) best = r;
  return best;
}

int magnetization_classifier(std::span<const int> spins, double t, CWStatistic mode) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("magnetization_classifier: t must lie in (0, 1)");
  if (spins.empty()) throw std::invalid_argument("magnetization_classifier: no spins");
  double s = 0.0;
  for (int x : spins) s += x;
  const double m = s / static_cast<double>(spins.size());
  const double stat = mode == CWStatistic::squared ? m * m : std::abs(m);
  return stat >= t ? 1 : 0;
}

int ci_oracle_predict(double q0, double q1, double pi, std::span<const int> votes) {
  if (!(q0 > 0.0 && q0 < 1.0 && q1 > 0.0 && q1 < 1.0))
    throw std::invalid_argument("ci_oracle_predict: marginals must lie in (0, 1)");
  double S = 0.0;
  for (int v : votes) S += v;
  const double Kd = static_cast<double>(votes.size());
  const double lo = logit(pi) + S * (std::log(q1) - std::log(q0)) +
                    (Kd - S) * (std::log1p(-q1) - std::log1p(-q0));
  return lo >= 0.0 ? 1 : 0;
}

double true_marginal(const CWClassSpec& spec, int K) {
  spec.validate();
  const auto p = pmf(K, spec.beta, spec.field(K));
  double em = 0.0;
  for (int u = 0; u <= K; ++u) em += p[static_cast<std::size_t>(u)] * (2.0 * u - K) / K;
  return (1.0 + em) / 2.0;
}

double marginal_limit(const CWClassSpec& spec) {
  spec.validate();
  if (spec.field_mode == FieldMode::scaled) {
    if (spec.beta <= 1.0) return 0.5;
    const double ms = m_star(spec.beta);
    const double p = sigmoid(2.0 * spec.field_value * ms);
    return (1.0 + (2.0 * p - 1.0) * ms) / 2.0;
  }
  if (spec.field_value == 0.0) return 0.5;
  return (1.0 + dominant_root(spec.beta, spec.field_value)) / 2.0;
}

void CWExperimentSpec::validate() const {
  if (!(pi > 0.0 && pi < 1.0)) throw std::invalid_argument("CWExperimentSpec: pi must lie in (0, 1)");
  class0.validate();
  class1.validate();
  if (K_grid.empty()) throw std::invalid_argument("CWExperimentSpec: empty K grid");
  for (int K : K_grid)
    if (K < 1) throw std::invalid_argument("CWExperimentSpec: K values must be >= 1");
  if (n < 1) throw std::invalid_argument("CWExperimentSpec: n must be >= 1");
  (void)resolved_threshold();
}

double CWExperimentSpec::resolved_threshold() const {
  if (threshold_mode == ThresholdMode::explicit_value) {
    if (!(threshold > 0.0 && threshold < 1.0))
      throw std::invalid_argument("CWExperimentSpec: threshold must lie in (0, 1)");
    return threshold;
  }
  const double ms = m_star(class1.beta);
  if (statistic == CWStatistic::squared) return ms * ms / 2.0;
  const double q0 = marginal_limit(class0);
  if (!(ms > 1.0 - 2.0 * q0))
    throw std::invalid_argument("separation condition m* > 1 - 2 q0 violated (m* = " + std::to_string(ms) +
                                ", q0 = " + std::to_string(q0) + "); automatic threshold undefined");
  const double m0 = 2.0 * q0 - 1.0;
  return (std::abs(m0) + ms) / 2.0;
}

std::vector<SeparationRow> run_separation(const CWExperimentSpec& spec) {
  spec.validate();
  const double t = spec.resolved_threshold();
  std::vector<SeparationRow> rows;
  for (int K : spec.K_grid) {
    SeparationRow row;
    row.K = K;
    row.q0 = true_marginal(spec.class0, K);
    row.q1 = true_marginal(spec.class1, K);
    const std::vector<double> cdf[2] = {
        cumulative(pmf(K, spec.class0.beta, spec.class0.field(K))),
        cumulative(pmf(K, spec.class1.beta, spec.class1.field(K)))};
    std::vector<int> pos(static_cast<std::size_t>(K)), spins(static_cast<std::size_t>(K)),
        votes(static_cast<std::size_t>(K));
    int err_bayes = 0, err_ci = 0;
    for (int i = 0; i < spec.n; ++i) {
      // Labels are shared across the K grid; spins come from a per-(K, item) stream.
      Rng label_rng(derive_seed(spec.seed, {kLabelStream, static_cast<std::uint64_t>(i)}));
      const int y = label_rng.bernoulli(spec.pi) ? 1 : 0;
      Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(i)}));
      draw_row(cdf[y], rng, pos, spins.data());
      for (int k = 0; k < K; ++k) votes[static_cast<std::size_t>(k)] = (spins[static_cast<std::size_t>(k)] + 1) / 2;
      err_bayes += magnetization_classifier(spins, t, spec.statistic) != y;
      err_ci += ci_oracle_predict(row.q0, row.q1, spec.pi, votes) != y;
    }
    row.risk_bayes = static_cast<double>(err_bayes) / spec.n;
    row.risk_ci = static_cast<double>(err_ci) / spec.n;
    row.sep = row.risk_ci - row.risk_bayes;
    row.se_bayes = standard_error(row.risk_bayes, spec.n);
    row.se_ci = standard_error(row.risk_ci, spec.n);
    row.se_reliable = spec.n >= 30;
    rows.push_back(row);
  }
  return rows;
}

std::string separation_csv(const std::vector<SeparationRow>& rows) {
  std::ostringstream out;
  out << "K,risk_bayes,risk_ci,sep,se_bayes,se_ci\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.K, r.risk_bayes, r.risk_ci, r.sep,
                  r.se_bayes, r.se_ci);
    out << buf;
  }
  return out.str();
}

}  // namespace depagg
