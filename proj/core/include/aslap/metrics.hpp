#pragma once

#include <span>

#include "aslap/beliefs.hpp"
#include "aslap/environment.hpp"

namespace aslap::evaluation {

/// Mean over valid cells of (true latent - latent mean)^2.
double mse(const beliefs::LatentBelief& latent, const GridEnvironment& env);

/// Mean pairwise Euclidean distance between positions, in cells.
double spread(std::span<const Cell> positions);

}  // namespace aslap::evaluation
