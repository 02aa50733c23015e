#pragma once

#include <vector>

namespace depagg {

// Gauss-Hermite rule for expectations under N(0, 1):
// E[f(Z)] ~ sum_q weights[q] f(nodes[q]), weights summing to 1.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Golub-Welsch eigen-decomposition of the Hermite Jacobi matrix.
// Results for each size are cached; the returned rule is immutable.
const GaussHermite& gauss_hermite(int n);

inline constexpr int kDefaultQuadratureNodes = 61;

}  // namespace depagg
