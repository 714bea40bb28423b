#pragma once

#include "mglm/graph.hpp"
#include "mglm/tensor.hpp"

namespace mglm {

struct AdamHyperparams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Tensor m;
  Tensor v;
  long t = 0;

  static AdamState init_like(const Parameter& p) {
    AdamState s;
    s.m = Tensor::zeros(p.value.shape);
    s.v = Tensor::zeros(p.value.shape);
    return s;
  }
};

// Bias-corrected Adam update from the parameter's accumulated gradient.
// Increments state.t.
void adam_step(Parameter& p, AdamState& s, double lr, const AdamHyperparams& hp = {});

}  // namespace mglm
