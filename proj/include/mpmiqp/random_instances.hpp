#pragma once

#include <cstddef>

#include "mpmiqp/projection.hpp"
#include "mpmiqp/rng.hpp"

namespace mpmiqp {

// Random well-posed multi-period problem: P_t SPD, A_t nonsingular, r, f, b
// standard normal, c uniform on [0, 2].
MultiPeriodProblem random_problem(std::size_t n, std::size_t d, RandomStream& rng);

// project(random_problem(n, d, rng)); always satisfies the assumption.
ProjectedMIQP random_projected(std::size_t n, std::size_t d, RandomStream& rng);

// Spec built from the same recursion as the projection but with P_t allowed
// to be indefinite, so that the result passes or fails the assumption
// (roughly fail_prob of the draws carry a non-PD P_t). For d == 1 a quarter
// of the draws use unstructured u, v instead.
CostSpec random_spec(std::size_t n, std::size_t d, RandomStream& rng, double fail_prob = 0.5);

}  // namespace mpmiqp
