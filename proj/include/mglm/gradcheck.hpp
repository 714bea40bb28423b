#pragma once

#include <functional>
#include <vector>

#include "mglm/graph.hpp"

namespace mglm {

// Builds the forward computation on a fresh tape and returns the loss node.
// Called repeatedly (parameters are perturbed between calls), so it must be a
// pure function of the current parameter values.
using LossBuilder = std::function<int(Graph&)>;

// One analytic gradient tensor per parameter, in the given order.
std::vector<Tensor> analytic_gradients(const LossBuilder& build,
                                       const std::vector<Parameter*>& params);

// Compares the given gradients against central finite differences on a random
// subsample of up to max_coords coordinates (all of them when fewer exist).
// Relative error uses max(1, |analytic|, |numeric|) as the denominator.
double max_rel_error_vs_fd(const LossBuilder& build, const std::vector<Parameter*>& params,
                           const std::vector<Tensor>& grads, int max_coords, uint64_t seed,
                           double step = 1e-5);

// Convenience wrapper: analytic gradients + finite-difference comparison.
double gradient_check(const LossBuilder& build, const std::vector<Parameter*>& params,
                      int max_coords = 200, uint64_t seed = 0);

}  // namespace mglm
