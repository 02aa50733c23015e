#include "depagg/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include "depagg/ising_em.hpp"

namespace depagg {

namespace {

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json mat(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd read_vec(const Json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a.at(i).get<double>();
  return v;
}

Eigen::MatrixXd read_mat(const Json& rows) {
  const auto R = static_cast<Eigen::Index>(rows.size());
  const auto C = R ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
  Eigen::MatrixXd m(R, C);
  for (Eigen::Index r = 0; r < R; ++r) {
    const auto& row = rows.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != C) throw std::invalid_argument("model JSON: ragged matrix");
    for (Eigen::Index c = 0; c < C; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

}  // namespace

std::string model_name(ModelKind k) {
  switch (k) {
    case ModelKind::ci: return "ci";
    case ModelKind::ising_shared: return "ising-shared";
    case ModelKind::ising_classdep: return "ising-classdep";
    case ModelKind::factor: return "factor";
    case ModelKind::umv: return "umv";
  }
  return "?";
}

ModelKind parse_model_name(const std::string& s) {
  for (auto k : {ModelKind::ci, ModelKind::ising_shared, ModelKind::ising_classdep, ModelKind::factor,
                 ModelKind::umv})
    if (model_name(k) == s) return k;
  throw std::invalid_argument("unknown model '" + s + "' (expected ci, ising-shared, ising-classdep, factor, umv)");
}

Json to_json(const Model& m) {
  Json j;
  switch (m.kind) {
    case ModelKind::ci:
      j["model"] = "ci";
      j["pi"] = m.ci.pi;
      j["alpha"] = m.ci.alpha;
      j["beta"] = m.ci.beta;
      break;
    case ModelKind::ising_shared:
    case ModelKind::ising_classdep:
      j["mode"] = m.kind == ModelKind::ising_shared ? "class_independent" : "class_dependent";
      j["pi"] = m.ising.pi;
      j["h0"] = vec(m.ising.h0);
      j["h1"] = vec(m.ising.h1);
      j["W0"] = mat(m.ising.W0);
      j["W1"] = mat(m.ising.W1);
      break;
    case ModelKind::factor:
      j["model"] = "factor";
      j["pi"] = m.factor.pi;
      j["a"] = vec(m.factor.a);
      j["b"] = vec(m.factor.b);
      j["loadings"] = mat(m.factor.loadings);
      break;
    case ModelKind::umv:
      j["model"] = "umv";
      break;
  }
  return j;
}

Model model_from_json(const Json& j) {
  Model m;
  if (j.contains("mode")) {
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "class_independent") m.kind = ModelKind::ising_shared;
    else if (mode == "class_dependent") m.kind = ModelKind::ising_classdep;
    else throw std::invalid_argument("model JSON: unknown Ising mode '" + mode + "'");
    m.ising.pi = j.at("pi").get<double>();
    m.ising.h0 = read_vec(j.at("h0"));
    m.ising.h1 = read_vec(j.at("h1"));
    m.ising.W0 = read_mat(j.at("W0"));
    m.ising.W1 = read_mat(j.at("W1"));
    m.ising.shared_couplings = m.kind == ModelKind::ising_shared;
    m.ising.validate();
    return m;
  }
  const auto name = j.at("model").get<std::string>();
  if (name == "ci") {
    m.kind = ModelKind::ci;
    m.ci.pi = j.at("pi").get<double>();
    m.ci.alpha = j.at("alpha").get<std::vector<double>>();
    m.ci.beta = j.at("beta").get<std::vector<double>>();
    m.ci.validate();
  } else if (name == "factor") {
    m.kind = ModelKind::factor;
    m.factor.pi = j.at("pi").get<double>();
    m.factor.a = read_vec(j.at("a"));
    m.factor.b = read_vec(j.at("b"));
    m.factor.loadings = read_mat(j.at("loadings"));
    m.factor.validate();
  } else if (name == "umv") {
    m.kind = ModelKind::umv;
  } else {
    throw std::invalid_argument("model JSON: unknown model '" + name + "'");
  }
  return m;
}

void save_model(const std::filesystem::path& path, const Model& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(m).dump(2) << '\n';
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("model JSON: ") + e.what());
  }
  return model_from_json(j);
}

PosteriorVector predict(const Model& m, const VoteMatrix& v) {
  switch (m.kind) {
    case ModelKind::ci: return wmv_predict(m.ci, v);
    case ModelKind::ising_shared:
    case ModelKind::ising_classdep: return ising_posterior(m.ising, v);
    case ModelKind::factor: return factor_posterior(m.factor, v);
    case ModelKind::umv: return umv_predict(v);
  }
  throw std::logic_error("predict: unknown model kind");
}

Model relabeled(const Model& m) {
  Model r = m;
  switch (m.kind) {
    case ModelKind::ci: r.ci = m.ci.relabeled(); break;
    case ModelKind::ising_shared:
    case ModelKind::ising_classdep: r.ising = m.ising.relabeled(); break;
    case ModelKind::factor:
      // eta'(1) = eta(0) = b and eta'(0) = eta(1) = a + b.
      r.factor.pi = 1.0 - m.factor.pi;
      r.factor.a = -m.factor.a;
      r.factor.b = m.factor.a + m.factor.b;
      break;
    case ModelKind::umv: break;
  }
  return r;
}

bool orient_to_labels(Model& m, const VoteMatrix& labeled) {
  if (m.kind == ModelKind::umv) return false;
  if (accuracy(predict(m, labeled).hard_labels, labeled.gold()) >= 0.5) return false;
  m = relabeled(m);
  return true;
}

}  // namespace depagg
