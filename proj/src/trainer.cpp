#include "mglm/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <thread>

#include "mglm/checkpoint.hpp"

namespace mglm {

Regime regime_from_string(const std::string& s, int src, int tgt) {
  Regime r;
  r.src = src;
  r.tgt = tgt;
  if (s == "bilingual") r.type = RegimeType::Bilingual;
  else if (s == "multi_fixed") r.type = RegimeType::MultiTargetFixed;
  else if (s == "multi_any") r.type = RegimeType::MultiTargetAny;
  else if (s == "joint") r.type = RegimeType::Joint;
  else throw std::invalid_argument("unknown regime '" + s + "' (bilingual|multi_fixed|multi_any|joint)");
  return r;
}

std::string regime_to_string(const Regime& r) {
  switch (r.type) {
    case RegimeType::Bilingual: return "bilingual";
    case RegimeType::MultiTargetFixed: return "multi_fixed";
    case RegimeType::MultiTargetAny: return "multi_any";
    case RegimeType::Joint: return "joint";
  }
  return "?";
}

void TrainConfig::validate(int k) const {
  if (total_iters < 1) throw std::invalid_argument("TrainConfig: total_iters must be >= 1");
  if (!(warmup_frac > 0.0 && warmup_frac < 1.0))
    throw std::invalid_argument("TrainConfig: warmup_frac must be in (0,1)");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (eval_every < 1) throw std::invalid_argument("TrainConfig: eval_every must be >= 1");
  if (!(lr >= 0.0)) throw std::invalid_argument("TrainConfig: lr must be >= 0");
  if (threads < 1) throw std::invalid_argument("TrainConfig: threads must be >= 1");
  switch (regime.type) {
    case RegimeType::Bilingual:
      if (regime.src < 0 || regime.src >= k || regime.tgt < 0 || regime.tgt >= k)
        throw std::invalid_argument("TrainConfig: bilingual channels out of range");
      if (regime.src == regime.tgt)
        throw std::invalid_argument("TrainConfig: bilingual source and target must differ");
      break;
    case RegimeType::MultiTargetFixed:
      if (regime.src < 0 || regime.src >= k)
        throw std::invalid_argument("TrainConfig: source channel out of range");
      break;
    case RegimeType::MultiTargetAny:
    case RegimeType::Joint:
      break;
  }
}

ObservationMask regime_mask(const Regime& regime, int k, Rng& rng) {
  ObservationMask mask;
  mask.obs.assign(static_cast<size_t>(k), ChannelObs::Partial);
  switch (regime.type) {
    case RegimeType::Bilingual:
      mask.obs.assign(static_cast<size_t>(k), ChannelObs::Absent);
      mask.obs[static_cast<size_t>(regime.src)] = ChannelObs::Full;
      mask.obs[static_cast<size_t>(regime.tgt)] = ChannelObs::Partial;
      break;
    case RegimeType::MultiTargetFixed:
      mask.obs[static_cast<size_t>(regime.src)] = ChannelObs::Full;
      break;
    case RegimeType::MultiTargetAny: {
      int s = static_cast<int>(rng.next_below(static_cast<uint64_t>(k)));
      mask.obs[static_cast<size_t>(s)] = ChannelObs::Full;
      break;
    }
    case RegimeType::Joint:
      break;
  }
  return mask;
}

int instance_loss_node(Graph& g, const Canvas& canvas, const SlotTargets& targets, ModelParams& mp) {
  if (static_cast<int>(targets.size()) != canvas.length())
    throw std::invalid_argument("instance_loss: targets do not match canvas length");
  int hidden = encode_node(g, canvas, mp);
  int logits = slot_logits_node(g, hidden, mp);
  std::vector<std::vector<RowTarget>> rows(targets.size());
  for (size_t i = 0; i < targets.size(); ++i)
    for (const SlotTarget& t : targets[i]) rows[i].push_back({t.token, t.weight});
  return g.weighted_nll_rows(logits, banned_columns(mp.config.vocab_size), rows,
                             1.0 / canvas.length());
}

double instance_loss(const Canvas& canvas, const SlotTargets& targets, ModelParams& mp) {
  Graph g;
  return g.value(instance_loss_node(g, canvas, targets, mp)).data[0];
}

double lr_at(int step, const TrainConfig& config) {
  if (step < 0 || step >= config.total_iters) throw std::invalid_argument("lr_at: step out of range");
  int warmup_steps = static_cast<int>(std::ceil(config.warmup_frac * config.total_iters));
  if (warmup_steps > 0 && step < warmup_steps)
    return config.lr * static_cast<double>(step) / warmup_steps;
  return config.lr;
}

TrainResult train(const TrainConfig& config, ModelParams& mp,
                  const std::vector<ParallelExample>& corpus, const Vocabulary& vocab) {
  int k = mp.config.channels;
  config.validate(k);
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");

  // Pre-encode the corpus once.
  std::vector<std::vector<std::vector<int>>> encoded(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (static_cast<int>(corpus[i].channels.size()) != k)
      throw std::invalid_argument("train: example " + std::to_string(i) + " does not have k channels");
    for (const std::string& ch : corpus[i].channels) encoded[i].push_back(vocab.encode(ch));
  }

  std::vector<AdamState> states;
  states.reserve(mp.params.size());
  for (const Parameter& p : mp.params) states.push_back(AdamState::init_like(p));

  Rng batch_rng = Rng::stream(config.seed, "batch");
  Rng canvas_stream = Rng::stream(config.seed, "canvas");

  TrainResult result;
  result.loss_history.reserve(static_cast<size_t>(config.total_iters));

  int B = config.batch_size;
  std::vector<int> batch_examples(static_cast<size_t>(B));
  std::vector<std::unique_ptr<Graph>> graphs(static_cast<size_t>(B));
  std::vector<double> losses(static_cast<size_t>(B));

  for (int step = 0; step < config.total_iters; ++step) {
    double lr = lr_at(step, config);
    for (int b = 0; b < B; ++b)
      batch_examples[static_cast<size_t>(b)] =
          static_cast<int>(batch_rng.next_below(corpus.size()));

    Rng step_stream = canvas_stream.fork(static_cast<uint64_t>(step));
    auto run_example = [&](int b) {
      int ex = batch_examples[static_cast<size_t>(b)];
      Rng rng = step_stream.fork(static_cast<uint64_t>(b));
      ObservationMask mask = regime_mask(config.regime, k, rng);
      std::vector<CanvasItem> full =
          concatenate_channels_subset(encoded[static_cast<size_t>(ex)], mask.active());
      SampledCanvas sc = sample_canvas(full, mask, rng, config.mask_mode);
      SlotTargets targets =
          build_training_instance(sc.canvas, sc.spans, config.prior, config.span_mass_weights);
      auto g = std::make_unique<Graph>();
      int loss = instance_loss_node(*g, sc.canvas, targets, mp);
      g->backward(loss, /*accumulate_into_params=*/false);
      losses[static_cast<size_t>(b)] = g->value(loss).data[0];
      graphs[static_cast<size_t>(b)] = std::move(g);
    };

    int workers = std::min(config.threads, B);
    if (workers <= 1) {
      for (int b = 0; b < B; ++b) run_example(b);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(workers));
      for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          for (int b = w; b < B; b += workers) run_example(b);
        });
      for (std::thread& t : pool) t.join();
    }

    double mean_loss = 0.0;
    for (int b = 0; b < B; ++b) {
      double l = losses[static_cast<size_t>(b)];
      if (!std::isfinite(l))
        throw std::runtime_error("train: non-finite loss at step " + std::to_string(step) +
                                 ", example " + std::to_string(batch_examples[static_cast<size_t>(b)]));
      mean_loss += l;
    }
    mean_loss /= B;

    // Gradients are exported in example order, so results do not depend on
    // the thread count.
    mp.zero_grads();
    for (int b = 0; b < B; ++b) graphs[static_cast<size_t>(b)]->add_param_grads();
    double inv_b = 1.0 / B;
    for (Parameter& p : mp.params)
      for (double& gval : p.grad.data) gval *= inv_b;
    for (size_t pi = 0; pi < mp.params.size(); ++pi)
      adam_step(mp.params[pi], states[pi], lr, config.adam);
    for (int b = 0; b < B; ++b) graphs[static_cast<size_t>(b)].reset();

    result.loss_history.push_back(mean_loss);
    if (step % config.eval_every == 0 || step == config.total_iters - 1)
      result.log_rows.emplace_back(step, lr, mean_loss);
  }

  if (!config.loss_log_path.empty()) write_loss_log(config.loss_log_path, result.log_rows);
  if (!config.checkpoint_path.empty()) save_checkpoint(config.checkpoint_path, mp);
  return result;
}

void write_loss_log(const std::string& path, const std::vector<std::tuple<int, double, double>>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_loss_log: cannot open " + path);
  f << "step,lr,loss\n";
  char buf[96];
  for (const auto& [step, lr, loss] : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g\n", step, lr, loss);
    f << buf;
  }
  if (!f) throw std::runtime_error("write_loss_log: write failed for " + path);
}

}  // namespace mglm
