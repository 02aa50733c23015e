#include "depagg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "depagg/constants.hpp"
#include "depagg/experiments.hpp"
#include "depagg/model_io.hpp"
#include "depagg/pipeline.hpp"
#include "depagg/simulate.hpp"

namespace depagg {

namespace {

namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 42;
  double tol = 1e-6;
  int max_iters = 200;
  int trials = 20;
  double prior_a = 2.0;
  double prior_b = 2.0;
  std::string out;

  [[nodiscard]] EMConfig em() const {
    EMConfig c;
    c.tol = tol;
    c.max_iters = max_iters;
    c.seed = seed;
    c.prior_a = prior_a;
    c.prior_b = prior_b;
    return c;
  }
};

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

std::string posterior_csv(const VoteMatrix& v, const PosteriorVector& post) {
  std::ostringstream s;
  write_posteriors(s, v, post);
  return s.str();
}

Json accuracy_json(const VoteMatrix& v, const PosteriorVector& post) {
  if (!v.has_gold()) return nullptr;
  return accuracy(post.hard_labels, v.gold());
}

Json trace_json(const EMTrace& t) {
  Json j;
  j["iterations"] = t.iterations;
  j["converged"] = t.converged;
  j["flipped"] = t.flipped;
  j["objective"] = t.objective;
  j["log_likelihood"] = t.log_likelihood;
  j["warnings"] = t.warnings;
  return j;
}

int cmd_fit(const Globals& gl, const std::string& votes_path, const std::string& model, std::ostream& out,
            std::ostream& err) {
  const auto v = load_votes(votes_path);
  const auto kind = parse_model_name(model);
  const auto fitted = fit_model(kind, v, gl.em());
  for (const auto& w : fitted.trace.warnings) err << "warning: " << w << '\n';
  for (std::size_t t = 0; t < fitted.trace.objective.size(); ++t) {
    err << "iter " << t + 1 << "  objective " << fitted.trace.objective[t];
    if (t < fitted.trace.log_likelihood.size()) err << "  loglik " << fitted.trace.log_likelihood[t];
    err << '\n';
  }
  Json rep;
  rep["model"] = model_name(kind);
  rep["seed"] = gl.seed;
  rep["n"] = v.n();
  rep["K"] = v.K();
  rep["accuracy"] = accuracy_json(v, fitted.posterior);
  rep["params"] = to_json(fitted.model);
  rep["trace"] = trace_json(fitted.trace);
  const fs::path dir = gl.out.empty() ? fs::path(".") : fs::path(gl.out);
  fs::create_directories(dir);
  save_model(dir / "model.json", fitted.model);
  write_file(dir / "posteriors.csv", posterior_csv(v, fitted.posterior));
  write_file(dir / "report.json", rep.dump(2) + '\n');
  out << rep.dump(2) << '\n';
  return kExitOk;
}

int cmd_predict(const Globals& gl, const std::string& votes_path, const std::string& model_path,
                std::ostream& out) {
  const auto v = load_votes(votes_path);
  const auto m = load_model(model_path);
  const auto post = predict(m, v);
  const auto csv = posterior_csv(v, post);
  if (gl.out.empty()) {
    out << csv;
    return kExitOk;
  }
  const fs::path dir(gl.out);
  write_file(dir / "posteriors.csv", csv);
  Json rep;
  rep["model"] = model_name(m.kind);
  rep["seed"] = gl.seed;
  rep["n"] = v.n();
  rep["K"] = v.K();
  rep["accuracy"] = accuracy_json(v, post);
  out << rep.dump(2) << '\n';
  return kExitOk;
}

int cmd_evaluate(const Globals& gl, const std::string& votes_path, const std::vector<std::string>& models,
                 double train_fraction, int judges, std::ostream& out) {
  const auto v = load_votes(votes_path);
  EvalSpec spec;
  for (const auto& m : models) spec.models.push_back(parse_model_name(m));
  spec.trials = gl.trials;
  spec.train_fraction = train_fraction;
  spec.judges = judges;
  spec.seed = gl.seed;
  spec.em = gl.em();
  const auto res = evaluate_models(v, spec);
  Json rep;
  rep["command"] = "evaluate";
  rep["seed"] = gl.seed;
  rep["n"] = v.n();
  rep["K"] = v.K();
  rep["trials"] = spec.trials;
  rep["train_fraction"] = spec.train_fraction;
  rep["judges"] = judges == 0 ? v.K() : judges;
  Json arr = Json::array();
  for (const auto& r : res) {
    Json e;
    e["model"] = model_name(r.model);
    e["mean"] = r.mean;
    e["se"] = r.se;
    arr.push_back(std::move(e));
  }
  rep["models"] = std::move(arr);
  const auto text = rep.dump(2) + '\n';
  if (!gl.out.empty()) write_file(fs::path(gl.out) / "evaluate.json", text);
  out << text;
  return kExitOk;
}

VoteMatrix simulate_source(const std::string& source, int n, int judges, std::uint64_t seed) {
  if (source.rfind("ci-setup-", 0) == 0) {
    const int idx = std::stoi(source.substr(9));
    return sample_ci(ci_setup(idx), n, seed);
  }
  if (source == "motivating-shared") return sample_ising(motivating_shared(), n, seed);
  if (source == "motivating-classdep") return sample_ising(motivating_classdep(), n, seed);
  if (source == "factor") {
    namespace pub = reference;
    FactorParams p;
    p.pi = pub::kFactorPi;
    p.a = pub::kFactorA;
    p.b = pub::kFactorB;
    p.lambda = pub::kFactorLambda;
    p.sigma2_Z = pub::kFactorSigma2;
    return sample_factor(p, judges, n, seed);
  }
  throw std::invalid_argument("unknown source '" + source +
                              "' (expected ci-setup-1..4, motivating-shared, motivating-classdep, factor)");
}

int cmd_simulate(const Globals& gl, const std::string& source, int n, int judges, std::ostream& out) {
  const auto v = simulate_source(source, n, judges, gl.seed);
  std::ostringstream s;
  write_votes(s, v);
  if (gl.out.empty()) {
    out << s.str();
  } else {
    write_file(fs::path(gl.out) / "votes.csv", s.str());
  }
  return kExitOk;
}

int cmd_reproduce(const Globals& gl, const std::string& name, std::ostream& out) {
  ReproduceOptions opt;
  opt.seed = gl.seed;
  opt.trials = gl.trials;
  opt.em = gl.em();
  const auto rep = run_experiment(name, opt);
  const fs::path dir = gl.out.empty() ? fs::path(".") : fs::path(gl.out);
  out << "== " << rep.name << " (seed " << gl.seed << ")\n" << rep.text;
  for (const auto& a : rep.artifacts) {
    write_file(dir / a.filename, a.content);
    out << "wrote " << (dir / a.filename).string() << '\n';
  }
  int failed = 0;
  for (const auto& c : rep.checks) {
    out << (c.pass ? "PASS  " : "FAIL  ") << c.name << "  (" << c.detail << ")\n";
    failed += c.pass ? 0 : 1;
  }
  out << (failed ? "FAIL" : "PASS") << ": " << rep.checks.size() - static_cast<std::size_t>(failed) << '/'
      << rep.checks.size() << " checks passed\n";
  return failed ? kExitCheckFailed : kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dependence-aware aggregation of binary judge votes"};
  app.require_subcommand(1);
  Globals gl;
  app.add_option("--seed", gl.seed, "Random seed")->capture_default_str();
  app.add_option("--tol", gl.tol, "EM relative tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--max-iters", gl.max_iters, "EM iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--trials", gl.trials, "Repetitions for evaluate / reproduce")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--prior-a", gl.prior_a, "Beta prior a (> 1)")->capture_default_str();
  app.add_option("--prior-b", gl.prior_b, "Beta prior b (> 1)")->capture_default_str();
  app.add_option("--out", gl.out, "Output directory");

  std::string votes, model = "ci", model_path, source, name;
  std::vector<std::string> models = {"ci", "umv"};
  double train_fraction = 0.15;
  int judges = 0, n_items = 1000, sim_judges = 20;

  auto* fit = app.add_subcommand("fit", "Fit a model without labels; write model.json and posteriors.csv");
  fit->fallthrough();
  fit->add_option("votes", votes, "Vote CSV")->required();
  fit->add_option("--model", model, "ci, ising-shared, ising-classdep, factor, umv")->capture_default_str();

  auto* pred = app.add_subcommand("predict", "Posteriors for a vote CSV under a saved model");
  pred->fallthrough();
  pred->add_option("votes", votes, "Vote CSV")->required();
  pred->add_option("--model-file", model_path, "Model JSON written by fit")->required();

  auto* eval = app.add_subcommand("evaluate", "Repeated train/test accuracy against gold labels");
  eval->fallthrough();
  eval->add_option("votes", votes, "Vote CSV with a label column")->required();
  eval->add_option("--model", models, "Models to compare")->capture_default_str();
  eval->add_option("--train-fraction", train_fraction, "Training share per trial")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  eval->add_option("--judges", judges, "Judges drawn per trial without replacement (0 = all)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);

  auto* sim = app.add_subcommand("simulate", "Write a labeled synthetic vote CSV");
  sim->fallthrough();
  sim->add_option("source", source, "ci-setup-1..4, motivating-shared, motivating-classdep, factor")->required();
  sim->add_option("-n,--items", n_items, "Items")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--judges", sim_judges, "Judges (factor source only)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* rep = app.add_subcommand("reproduce", "Run a named reference experiment and check its tolerances");
  rep->fallthrough();
  std::string names_help;
  for (const auto& e : experiment_names()) names_help += (names_help.empty() ? "" : ", ") + e;
  rep->add_option("name", name, names_help)->required();

  std::vector<std::string> args(argv + 1, argv + argc);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*fit) return cmd_fit(gl, votes, model, out, err);
    if (*pred) return cmd_predict(gl, votes, model_path, out);
    if (*eval) return cmd_evaluate(gl, votes, models, train_fraction, judges, out);
    if (*sim) return cmd_simulate(gl, source, n_items, sim_judges, out);
    if (*rep) return cmd_reproduce(gl, name, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace depagg
