#pragma once

#include <cstdint>

#include "depagg/ci.hpp"
#include "depagg/ising.hpp"
#include "depagg/votes.hpp"

namespace depagg {

/// Labeled CI data: Y ~ Bernoulli(pi), J_j | Y independent with the given
/// sensitivities and specificities.
VoteMatrix sample_ci(const CIParams& p, int n, std::uint64_t seed);

/// Setup `index` (1-based, 1..4) of the reference CI simulations, with pi = 1/2.
CIParams ci_setup(int index);

/// The two reference three-judge Ising instances.
IsingParams motivating_shared();
IsingParams motivating_classdep();

}  // namespace depagg
