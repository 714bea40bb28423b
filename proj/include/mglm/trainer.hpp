#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "mglm/canvas.hpp"
#include "mglm/corpus.hpp"
#include "mglm/model.hpp"
#include "mglm/optim.hpp"
#include "mglm/vocab.hpp"

namespace mglm {

enum class RegimeType { Bilingual, MultiTargetFixed, MultiTargetAny, Joint };

struct Regime {
  RegimeType type = RegimeType::Joint;
  int src = 0;  // Bilingual / MultiTargetFixed source channel
  int tgt = 1;  // Bilingual target channel
};

Regime regime_from_string(const std::string& s, int src, int tgt);
std::string regime_to_string(const Regime& r);

struct TrainConfig {
  Regime regime;
  Prior prior;
  double lr = 1e-4;
  int total_iters = 1000;
  double warmup_frac = 0.10;  // linear warmup over the first fraction of iters
  int batch_size = 32;
  uint64_t seed = 1;
  int eval_every = 25;
  int threads = 1;
  MaskMode mask_mode = MaskMode::PerChannel;
  bool span_mass_weights = false;
  AdamHyperparams adam;
  std::string checkpoint_path;  // written when non-empty
  std::string loss_log_path;    // written when non-empty

  void validate(int k) const;
};

// Observation pattern for one training example.
//   Bilingual(s,t):      s Full, t Partial, all other channels Absent
//   MultiTargetFixed(s): s Full, others Partial
//   MultiTargetAny:      source drawn uniformly per example, then as Fixed
//   Joint:               all Partial
ObservationMask regime_mask(const Regime& regime, int k, Rng& rng);

// Mean per-slot weighted negative log likelihood of the slot targets under
// the per-slot insertion softmax (PAD and SEP excluded from the support).
int instance_loss_node(Graph& g, const Canvas& canvas, const SlotTargets& targets, ModelParams& mp);
double instance_loss(const Canvas& canvas, const SlotTargets& targets, ModelParams& mp);

// Linear warmup from 0 to lr over ceil(warmup_frac * total_iters) steps, then
// constant.
double lr_at(int step, const TrainConfig& config);

struct TrainResult {
  std::vector<double> loss_history;                     // one entry per step
  std::vector<std::tuple<int, double, double>> log_rows;  // (step, lr, loss)
};

// Runs the full loop: batch sampling, per-example masking and canvas
// sampling, loss, backward, Adam with the warmup schedule. Deterministic for
// a fixed config and seed, independent of the thread count. Throws
// std::runtime_error naming the step and example on a non-finite loss.
TrainResult train(const TrainConfig& config, ModelParams& mp,
                  const std::vector<ParallelExample>& corpus, const Vocabulary& vocab);

void write_loss_log(const std::string& path, const std::vector<std::tuple<int, double, double>>& rows);

}  // namespace mglm
