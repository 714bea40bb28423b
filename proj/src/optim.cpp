#include "mglm/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace mglm {

void adam_step(Parameter& p, AdamState& s, double lr, const AdamHyperparams& hp) {
  if (!p.value.same_shape(s.m) || !p.value.same_shape(s.v))
    throw std::invalid_argument("adam_step: state shape mismatch for " + p.name);
  if (!(lr >= 0.0)) throw std::invalid_argument("adam_step: negative learning rate");
  s.t += 1;
  double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(s.t));
  double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(s.t));
  for (size_t i = 0; i < p.value.data.size(); ++i) {
    double g = p.grad.data[i];
    s.m.data[i] = hp.beta1 * s.m.data[i] + (1.0 - hp.beta1) * g;
    s.v.data[i] = hp.beta2 * s.v.data[i] + (1.0 - hp.beta2) * g * g;
    double mhat = s.m.data[i] / bc1;
    double vhat = s.v.data[i] / bc2;
    p.value.data[i] -= lr * mhat / (std::sqrt(vhat) + hp.eps);
  }
}

}  // namespace mglm
