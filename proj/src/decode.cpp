#include "mglm/decode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "mglm/numeric.hpp"
#include "mglm/vocab.hpp"

namespace mglm {

namespace {

constexpr double kMaskedThreshold = kMaskedLogit * 0.5;

std::vector<uint8_t> channel_eligibility(const Canvas& canvas, const std::vector<int>& allowed) {
  std::vector<uint8_t> ok(canvas.items.size(), 1);
  if (allowed.empty()) return ok;
  for (size_t i = 0; i < canvas.items.size(); ++i) {
    int ch = canvas.items[i].channel;
    ok[i] = std::find(allowed.begin(), allowed.end(), ch) != allowed.end() ? 1 : 0;
  }
  return ok;
}

}  // namespace

void DecodeConfig::validate() const {
  if (!(temperature > 0.0)) throw std::invalid_argument("DecodeConfig: temperature must be > 0");
  if (max_iters < 1) throw std::invalid_argument("DecodeConfig: max_iters must be >= 1");
}

Canvas init_canvas(int k, const std::vector<std::vector<int>>& tokens_per_channel) {
  std::vector<int> all(static_cast<size_t>(k));
  for (int c = 0; c < k; ++c) all[static_cast<size_t>(c)] = c;
  return init_canvas_subset(all, tokens_per_channel);
}

Canvas init_canvas_subset(const std::vector<int>& channels,
                          const std::vector<std::vector<int>>& tokens_per_channel) {
  Canvas canvas;
  canvas.channels = channels;
  int prev = -1;
  for (int c : channels) {
    if (c <= prev) throw std::invalid_argument("init_canvas: channels must be ascending");
    prev = c;
    if (c < static_cast<int>(tokens_per_channel.size()))
      for (int tok : tokens_per_channel[static_cast<size_t>(c)]) canvas.items.push_back({tok, c});
    canvas.items.push_back({Vocabulary::kSep, c});
  }
  return canvas;
}

ParallelStep step_parallel_greedy(const Canvas& canvas, ModelParams& mp,
                                  const std::vector<int>& allowed_channels) {
  Tensor logits = slot_logits(canvas, mp);
  std::vector<uint8_t> eligible = channel_eligibility(canvas, allowed_channels);
  ParallelStep out;
  out.all_closed = true;
  int V = logits.cols();
  for (int l = 0; l < canvas.length(); ++l) {
    if (!eligible[static_cast<size_t>(l)]) continue;
    int best = -1;
    double best_v = -1e301;
    for (int c = 0; c < V; ++c) {
      double x = logits.at(l, c);
      if (x <= kMaskedThreshold) continue;
      if (x > best_v) {
        best_v = x;
        best = c;
      }
    }
    if (best != Vocabulary::kEosSlot) {
      out.all_closed = false;
      out.insertions.push_back({l, best, canvas.items[static_cast<size_t>(l)].channel});
    }
  }
  return out;
}

void apply_insertions(Canvas& canvas, const std::vector<Insertion>& insertions) {
  for (auto it = insertions.rbegin(); it != insertions.rend(); ++it)
    canvas.items.insert(canvas.items.begin() + it->slot, {it->token, it->channel});
}

SerialStepResult step_serial(Canvas& canvas, std::vector<SlotState>& states, ModelParams& mp,
                             DecodeMode mode, double temperature, Rng* rng,
                             const std::vector<int>& allowed_channels) {
  if (static_cast<int>(states.size()) != canvas.length())
    throw std::invalid_argument("step_serial: slot state size mismatch");
  std::vector<uint8_t> eligible = channel_eligibility(canvas, allowed_channels);
  std::vector<int> open;
  for (int l = 0; l < canvas.length(); ++l)
    if (eligible[static_cast<size_t>(l)] && states[static_cast<size_t>(l)] == SlotState::Open)
      open.push_back(l);
  if (open.empty()) throw std::logic_error("step_serial: no open slot (caller should have terminated)");

  Tensor logits = slot_logits(canvas, mp);
  int V = logits.cols();
  std::vector<uint8_t> banned = banned_columns(mp.config.vocab_size);

  int slot = -1, token = -1;
  if (mode == DecodeMode::SerialGreedy) {
    // Joint argmax over the restricted grid: temperature-monotone, so the raw
    // logit argmax suffices.
    double best = -1e301;
    for (int l : open) {
      for (int c = 0; c < V; ++c) {
        double x = logits.at(l, c);
        if (x <= kMaskedThreshold) continue;
        if (x > best) {
          best = x;
          slot = l;
          token = c;
        }
      }
    }
  } else {
    if (!rng) throw std::invalid_argument("step_serial: sampling requires an rng");
    if (!(temperature > 0.0)) throw std::invalid_argument("step_serial: temperature must be > 0");
    // p(l) over open slots via per-row log-sum-exp, then p(c|l) over the row.
    double inv_tau = 1.0 / temperature;
    std::vector<double> lse(open.size());
    for (size_t oi = 0; oi < open.size(); ++oi)
      lse[oi] = log_sum_exp_masked(&logits.at(open[oi], 0), V, banned, inv_tau);
    std::vector<double> pl = softmax(lse, 1.0);
    double u = rng->uniform_double();
    size_t pick = 0;
    double acc = 0.0;
    for (size_t oi = 0; oi < pl.size(); ++oi) {
      acc += pl[oi];
      if (u < acc) {
        pick = oi;
        break;
      }
      pick = oi;  // saturate on rounding
    }
    slot = open[pick];
    double mx = -1e300;
    for (int c = 0; c < V; ++c) {
      double x = logits.at(slot, c);
      if (x > kMaskedThreshold) mx = std::max(mx, x * inv_tau);
    }
    double z = 0.0;
    std::vector<double> pc(static_cast<size_t>(V), 0.0);
    for (int c = 0; c < V; ++c) {
      double x = logits.at(slot, c);
      if (x <= kMaskedThreshold) continue;
      pc[static_cast<size_t>(c)] = std::exp(x * inv_tau - mx);
      z += pc[static_cast<size_t>(c)];
    }
    double u2 = rng->uniform_double() * z;
    double acc2 = 0.0;
    token = -1;
    for (int c = 0; c < V; ++c) {
      if (pc[static_cast<size_t>(c)] == 0.0) continue;
      acc2 += pc[static_cast<size_t>(c)];
      token = c;
      if (u2 < acc2) break;
    }
  }

  SerialStepResult res;
  if (token == Vocabulary::kEosSlot) {
    states[static_cast<size_t>(slot)] = SlotState::Closed;
    res.closed_slot = slot;
    return res;
  }
  int channel = canvas.items[static_cast<size_t>(slot)].channel;
  canvas.items.insert(canvas.items.begin() + slot, {token, channel});
  states.insert(states.begin() + slot, SlotState::Open);  // the new token's own slot
  states[static_cast<size_t>(slot) + 1] = SlotState::Open;  // anchor's left context changed
  res.inserted = true;
  res.insertion = {slot, token, channel};
  return res;
}

std::vector<std::vector<int>> split_channels(const Canvas& canvas, int k) {
  std::vector<std::vector<int>> out(static_cast<size_t>(k));
  size_t seg = 0;
  for (const CanvasItem& it : canvas.items) {
    if (seg >= canvas.channels.size()) throw std::logic_error("split_channels: items after final SEP");
    if (it.token == Vocabulary::kSep) {
      ++seg;
      continue;
    }
    int ch = canvas.channels[seg];
    if (ch < 0 || ch >= k) throw std::logic_error("split_channels: channel id out of range");
    out[static_cast<size_t>(ch)].push_back(it.token);
  }
  return out;
}

DecodeResult decode(const DecodeConfig& config, const Canvas& init, ModelParams& mp) {
  config.validate();
  auto t0 = std::chrono::steady_clock::now();
  DecodeResult res;
  Canvas canvas = init;
  DecodeTrace& trace = res.trace;
  int cap = mp.config.max_pos;
  Rng rng(0);
  if (config.mode == DecodeMode::SerialSample) rng = Rng::stream(config.seed, "decode");

  if (config.mode == DecodeMode::ParallelGreedy) {
    for (int iter = 0; iter < config.max_iters; ++iter) {
      if (canvas.length() > cap) {
        trace.truncated = true;
        break;
      }
      ParallelStep step = step_parallel_greedy(canvas, mp, config.allowed_channels);
      // Clamp the insertion batch to the position capacity.
      bool clamped = false;
      if (canvas.length() + static_cast<int>(step.insertions.size()) > cap) {
        step.insertions.resize(static_cast<size_t>(cap - canvas.length()));
        clamped = true;
      }
      trace.iterations.push_back(step.insertions);
      apply_insertions(canvas, step.insertions);
      if (step.all_closed) break;
      if (clamped || iter == config.max_iters - 1) {
        trace.truncated = true;
        break;
      }
    }
  } else {
    std::vector<SlotState> states(static_cast<size_t>(canvas.length()), SlotState::Open);
    std::vector<uint8_t> eligible;
    auto any_open = [&]() {
      eligible = channel_eligibility(canvas, config.allowed_channels);
      for (int l = 0; l < canvas.length(); ++l)
        if (eligible[static_cast<size_t>(l)] && states[static_cast<size_t>(l)] == SlotState::Open)
          return true;
      return false;
    };
    for (int iter = 0; iter < config.max_iters; ++iter) {
      if (!any_open()) break;
      if (canvas.length() >= cap) {
        trace.truncated = true;
        break;
      }
      SerialStepResult step = step_serial(canvas, states, mp, config.mode, config.temperature,
                                          &rng, config.allowed_channels);
      std::vector<Insertion> recorded;
      if (step.inserted) recorded.push_back(step.insertion);
      trace.iterations.push_back(std::move(recorded));
      if (iter == config.max_iters - 1 && any_open()) trace.truncated = true;
    }
  }

  trace.iteration_count = static_cast<int>(trace.iterations.size());
  trace.final_canvas = canvas;
  res.channel_tokens = split_channels(canvas, mp.config.channels);
  trace.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

IterationBounds iteration_bounds(long n_tokens, long k) {
  if (k < 1 || n_tokens < k)
    throw std::invalid_argument("iteration_bounds: need N >= k >= 1");
  auto floor_log2 = [](long v) {
    long b = -1;
    while (v > 0) {
      v >>= 1;
      ++b;
    }
    return b;
  };
  IterationBounds out;
  out.serial = n_tokens;
  out.multi_channel_parallel = floor_log2(n_tokens / k) + 2;
  out.per_channel_parallel = k * out.multi_channel_parallel;
  out.single_sequence = floor_log2(n_tokens) + 2;
  return out;
}

JointScheme joint_scheme_from_string(const std::string& s) {
  if (s == "unrestricted") return JointScheme::Unrestricted;
  if (s == "chain") return JointScheme::Chain;
  if (s == "common_cause") return JointScheme::CommonCause;
  throw std::invalid_argument("unknown scheme '" + s + "' (unrestricted|chain|common_cause)");
}

std::string joint_scheme_to_string(JointScheme s) {
  switch (s) {
    case JointScheme::Unrestricted: return "unrestricted";
    case JointScheme::Chain: return "chain";
    case JointScheme::CommonCause: return "common_cause";
  }
  return "?";
}

JointSampleResult sample_joint(const JointSampleConfig& config, ModelParams& mp) {
  int k = mp.config.channels;
  if (!(config.temperature > 0.0)) throw std::invalid_argument("sample_joint: temperature must be > 0");
  Rng base = Rng::stream(config.seed, "sample-joint");

  auto sample_phase = [&](const Canvas& init, const std::vector<int>& allowed,
                          uint64_t phase) -> DecodeResult {
    DecodeConfig dc;
    dc.mode = DecodeMode::SerialSample;
    dc.temperature = config.temperature;
    dc.max_iters = config.max_iters;
    dc.seed = base.fork(phase).seed();
    dc.allowed_channels = allowed;
    return decode(dc, init, mp);
  };

  JointSampleResult res;
  res.channel_tokens.assign(static_cast<size_t>(k), {});
  std::vector<std::vector<int>> empty_channels(static_cast<size_t>(k));

  switch (config.scheme) {
    case JointScheme::Unrestricted: {
      DecodeResult d = sample_phase(init_canvas(k, empty_channels), {}, 0);
      res.channel_tokens = d.channel_tokens;
      res.truncated = d.trace.truncated;
      break;
    }
    case JointScheme::Chain: {
      std::vector<int> order = config.chain_order;
      if (order.empty())
        for (int c = 0; c < k; ++c) order.push_back(c);
      for (int c : order)
        if (c < 0 || c >= k) throw std::invalid_argument("sample_joint: chain order channel out of range");
      // First link: restricted to its own segment of the full canvas.
      DecodeResult first = sample_phase(init_canvas(k, empty_channels), {order[0]}, 0);
      res.channel_tokens[static_cast<size_t>(order[0])] = first.channel_tokens[static_cast<size_t>(order[0])];
      res.truncated = first.trace.truncated;
      for (size_t j = 1; j < order.size(); ++j) {
        int prev = order[j - 1], cur = order[j];
        std::vector<int> chans = {std::min(prev, cur), std::max(prev, cur)};
        std::vector<std::vector<int>> seed_tokens(static_cast<size_t>(k));
        seed_tokens[static_cast<size_t>(prev)] = res.channel_tokens[static_cast<size_t>(prev)];
        DecodeResult d = sample_phase(init_canvas_subset(chans, seed_tokens), {cur}, j);
        res.channel_tokens[static_cast<size_t>(cur)] = d.channel_tokens[static_cast<size_t>(cur)];
        res.truncated = res.truncated || d.trace.truncated;
      }
      break;
    }
    case JointScheme::CommonCause: {
      int root = config.root;
      if (root < 0 || root >= k) throw std::invalid_argument("sample_joint: root channel out of range");
      DecodeResult rootd = sample_phase(init_canvas(k, empty_channels), {root}, 0);
      res.channel_tokens[static_cast<size_t>(root)] = rootd.channel_tokens[static_cast<size_t>(root)];
      res.truncated = rootd.trace.truncated;
      uint64_t phase = 1;
      for (int c = 0; c < k; ++c) {
        if (c == root) continue;
        std::vector<int> chans = {std::min(root, c), std::max(root, c)};
        std::vector<std::vector<int>> seed_tokens(static_cast<size_t>(k));
        seed_tokens[static_cast<size_t>(root)] = res.channel_tokens[static_cast<size_t>(root)];
        DecodeResult d = sample_phase(init_canvas_subset(chans, seed_tokens), {c}, phase++);
        res.channel_tokens[static_cast<size_t>(c)] = d.channel_tokens[static_cast<size_t>(c)];
        res.truncated = res.truncated || d.trace.truncated;
      }
      break;
    }
  }
  return res;
}

}  // namespace mglm
