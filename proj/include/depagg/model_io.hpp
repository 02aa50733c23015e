#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "depagg/ci.hpp"
#include "depagg/factor.hpp"
#include "depagg/ising.hpp"

namespace depagg {

using Json = nlohmann::ordered_json;

enum class ModelKind { ci, ising_shared, ising_classdep, factor, umv };

/// CLI spelling: ci, ising-shared, ising-classdep, factor, umv.
std::string model_name(ModelKind k);
ModelKind parse_model_name(const std::string& s);

/// A fitted model of any supported family; only the member matching `kind` is meaningful.
struct Model {
  ModelKind kind = ModelKind::umv;
  CIParams ci;
  IsingParams ising;
  MultiFactorParams factor;
};

// Schemas:
//   ci:     {model, pi, alpha, beta}
//   ising:  {mode, pi, h0, h1, W0, W1}, matrices as arrays of rows
//   factor: {model, pi, a, b, loadings}
//   umv:    {model}
Json to_json(const Model& m);
Model model_from_json(const Json& j);

void save_model(const std::filesystem::path& path, const Model& m);
Model load_model(const std::filesystem::path& path);

/// Posteriors for `v` under any model kind.
PosteriorVector predict(const Model& m, const VoteMatrix& v);

/// The same law with the class labels swapped (umv is returned unchanged).
Model relabeled(const Model& m);

/// Resolves the global label orientation of an unsupervised fit with gold
/// labels: relabels `m` when it scores below 1/2 on `labeled`. Returns
/// whether it flipped. umv is never flipped.
bool orient_to_labels(Model& m, const VoteMatrix& labeled);

}  // namespace depagg
