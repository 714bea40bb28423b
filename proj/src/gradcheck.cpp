#include "mglm/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mglm/rng.hpp"

namespace mglm {

namespace {

double forward_value(const LossBuilder& build) {
  Graph g;
  int loss = build(g);
  const Tensor& v = g.value(loss);
  if (v.numel() != 1) throw std::invalid_argument("gradient_check: loss must be scalar");
  return v.data[0];
}

}  // namespace

std::vector<Tensor> analytic_gradients(const LossBuilder& build,
                                       const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
  Graph g;
  int loss = build(g);
  g.backward(loss);
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (Parameter* p : params) grads.push_back(p->grad);
  return grads;
}

double max_rel_error_vs_fd(const LossBuilder& build, const std::vector<Parameter*>& params,
                           const std::vector<Tensor>& grads, int max_coords, uint64_t seed,
                           double step) {
  // Flatten (param, coord) pairs, then pick a deterministic subsample.
  std::vector<std::pair<int, long>> coords;
  for (size_t pi = 0; pi < params.size(); ++pi)
    for (long c = 0; c < params[pi]->value.numel(); ++c)
      coords.emplace_back(static_cast<int>(pi), c);
  Rng rng = Rng::stream(seed, "gradcheck");
  if (static_cast<long>(coords.size()) > max_coords) {
    for (size_t i = 0; i < coords.size(); ++i) {
      size_t j = i + rng.next_below(coords.size() - i);
      std::swap(coords[i], coords[j]);
    }
    coords.resize(static_cast<size_t>(max_coords));
  }

  double worst = 0.0;
  for (auto [pi, c] : coords) {
    double& x = params[static_cast<size_t>(pi)]->value.data[static_cast<size_t>(c)];
    double orig = x;
    x = orig + step;
    double up = forward_value(build);
    x = orig - step;
    double down = forward_value(build);
    x = orig;
    double numeric = (up - down) / (2.0 * step);
    double analytic = grads[static_cast<size_t>(pi)].data[static_cast<size_t>(c)];
    double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
    worst = std::max(worst, std::fabs(analytic - numeric) / denom);
  }
  return worst;
}

double gradient_check(const LossBuilder& build, const std::vector<Parameter*>& params,
                      int max_coords, uint64_t seed) {
  std::vector<Tensor> grads = analytic_gradients(build, params);
  return max_rel_error_vs_fd(build, params, grads, max_coords, seed);
}

}  // namespace mglm
