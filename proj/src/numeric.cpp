#include "mglm/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mglm {

std::vector<double> softmax(const std::vector<double>& logits, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("softmax: temperature must be > 0");
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  double mx = -1e300;
  for (double v : logits) {
    if (!std::isfinite(v)) throw std::invalid_argument("softmax: non-finite logit");
    mx = std::max(mx, v);
  }
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp((logits[i] - mx) / temperature);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

double weighted_nll(const std::vector<double>& log_probs,
                    const std::vector<std::pair<int, double>>& targets) {
  double loss = 0.0;
  for (const auto& [idx, w] : targets) {
    if (idx < 0 || idx >= static_cast<int>(log_probs.size()))
      throw std::invalid_argument("weighted_nll: target index out of range");
    if (w < 0.0) throw std::invalid_argument("weighted_nll: negative weight");
    loss += w * (-log_probs[static_cast<size_t>(idx)]);
  }
  return loss;
}

double log_sum_exp_masked(const double* x, int n, const std::vector<unsigned char>& banned,
                          double inv_tau) {
  double mx = -1e300;
  for (int i = 0; i < n; ++i)
    if (!banned[static_cast<size_t>(i)]) mx = std::max(mx, x[i] * inv_tau);
  double z = 0.0;
  for (int i = 0; i < n; ++i)
    if (!banned[static_cast<size_t>(i)]) z += std::exp(x[i] * inv_tau - mx);
  return mx + std::log(z);
}

}  // namespace mglm
