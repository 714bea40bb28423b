#pragma once

#include <utility>
#include <vector>

namespace mglm {

// Temperature softmax with max subtraction. Throws std::invalid_argument on
// non-finite input or temperature <= 0.
std::vector<double> softmax(const std::vector<double>& logits, double temperature = 1.0);

// Sum of weight * (-log_probs[index]) over the targets.
// Throws std::invalid_argument on out-of-range indices or negative weights.
double weighted_nll(const std::vector<double>& log_probs,
                    const std::vector<std::pair<int, double>>& targets);

// log(sum exp(x_i / tau)) over the entries where banned[i] is false.
double log_sum_exp_masked(const double* x, int n, const std::vector<unsigned char>& banned,
                          double inv_tau);

}  // namespace mglm
