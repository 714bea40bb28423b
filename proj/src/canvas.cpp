#include "mglm/canvas.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mglm/vocab.hpp"

namespace mglm {

std::vector<int> ObservationMask::active() const {
  std::vector<int> a;
  for (int c = 0; c < static_cast<int>(obs.size()); ++c)
    if (obs[static_cast<size_t>(c)] != ChannelObs::Absent) a.push_back(c);
  return a;
}

std::vector<CanvasItem> concatenate_channels(const std::vector<std::vector<int>>& tokens_per_channel) {
  std::vector<int> all(tokens_per_channel.size());
  for (size_t c = 0; c < all.size(); ++c) all[c] = static_cast<int>(c);
  return concatenate_channels_subset(tokens_per_channel, all);
}

std::vector<CanvasItem> concatenate_channels_subset(const std::vector<std::vector<int>>& tokens_per_channel,
                                                    const std::vector<int>& channels) {
  std::vector<CanvasItem> out;
  int prev = -1;
  for (int c : channels) {
    if (c <= prev) throw std::invalid_argument("concatenate_channels: channels must be ascending");
    if (c >= static_cast<int>(tokens_per_channel.size()))
      throw std::invalid_argument("concatenate_channels: channel id out of range");
    prev = c;
    for (int tok : tokens_per_channel[static_cast<size_t>(c)]) out.push_back({tok, c});
    out.push_back({Vocabulary::kSep, c});
  }
  return out;
}

SampledCanvas sample_canvas(const std::vector<CanvasItem>& full, const ObservationMask& mask,
                            Rng& rng, MaskMode mode) {
  // Decide, per full-sequence position, whether the token is kept.
  std::vector<uint8_t> keep(full.size(), 0);
  std::vector<std::vector<int>> token_positions(mask.obs.size());
  for (size_t i = 0; i < full.size(); ++i) {
    const CanvasItem& it = full[i];
    if (it.channel < 0 || it.channel >= static_cast<int>(mask.obs.size()))
      throw std::invalid_argument("sample_canvas: channel id outside mask");
    ChannelObs o = mask.obs[static_cast<size_t>(it.channel)];
    if (o == ChannelObs::Absent)
      throw std::invalid_argument("sample_canvas: full sequence contains an absent channel");
    if (it.token == Vocabulary::kSep) {
      keep[i] = 1;  // SEPs are never maskable
      continue;
    }
    switch (o) {
      case ChannelObs::Full:
        keep[i] = 1;
        break;
      case ChannelObs::Empty:
        break;
      case ChannelObs::Partial:
        token_positions[static_cast<size_t>(it.channel)].push_back(static_cast<int>(i));
        break;
      case ChannelObs::Absent:
        break;
    }
  }

  auto keep_subset = [&](std::vector<int>& positions, Rng& r) {
    int n = static_cast<int>(positions.size());
    int m = static_cast<int>(r.uniform_int(0, n));
    // Uniform m-subset via partial Fisher-Yates.
    for (int i = 0; i < m; ++i) {
      int j = i + static_cast<int>(r.next_below(static_cast<uint64_t>(n - i)));
      std::swap(positions[static_cast<size_t>(i)], positions[static_cast<size_t>(j)]);
    }
    for (int i = 0; i < m; ++i) keep[static_cast<size_t>(positions[static_cast<size_t>(i)])] = 1;
  };

  if (mode == MaskMode::PerChannel) {
    for (size_t c = 0; c < token_positions.size(); ++c)
      if (!token_positions[c].empty()) keep_subset(token_positions[c], rng);
  } else {
    std::vector<int> pooled;
    for (const auto& v : token_positions) pooled.insert(pooled.end(), v.begin(), v.end());
    if (!pooled.empty()) keep_subset(pooled, rng);
  }

  // Build the canvas and attribute each dropped run to the slot of the next
  // kept item (one always exists: the channel's SEP is kept).
  SampledCanvas out;
  std::vector<int> pending;
  for (size_t i = 0; i < full.size(); ++i) {
    if (!keep[i]) {
      pending.push_back(full[i].token);
      continue;
    }
    int slot = out.canvas.length();
    if (!pending.empty()) {
      out.spans.push_back({slot, std::move(pending)});
      pending.clear();
    }
    out.canvas.items.push_back(full[i]);
  }
  if (!pending.empty()) throw std::logic_error("sample_canvas: trailing dropped run (missing SEP?)");
  out.canvas.channels = mask.active();
  return out;
}

std::vector<double> slot_weights(int span_length, const Prior& prior) {
  if (span_length < 1) throw std::invalid_argument("slot_weights: span length must be >= 1");
  std::vector<double> w(static_cast<size_t>(span_length));
  if (prior.kind == PriorKind::Uniform) {
    std::fill(w.begin(), w.end(), 1.0 / span_length);
    return w;
  }
  if (!(prior.tree_tau > 0.0)) throw std::invalid_argument("slot_weights: tree_tau must be > 0");
  double center = (span_length - 1) / 2.0;
  double z = 0.0;
  for (int i = 0; i < span_length; ++i) {
    w[static_cast<size_t>(i)] = std::exp(-std::fabs(i - center) / prior.tree_tau);
    z += w[static_cast<size_t>(i)];
  }
  for (double& v : w) v /= z;
  return w;
}

SlotTargets build_training_instance(const Canvas& canvas, const std::vector<Span>& spans,
                                    const Prior& prior, bool span_mass_weights) {
  SlotTargets targets(static_cast<size_t>(canvas.length()), {{Vocabulary::kEosSlot, 1.0}});
  for (const Span& sp : spans) {
    if (sp.slot < 0 || sp.slot >= canvas.length())
      throw std::invalid_argument("build_training_instance: span slot out of range");
    int s = static_cast<int>(sp.tokens.size());
    std::vector<double> w = slot_weights(s, prior);
    std::vector<SlotTarget>& t = targets[static_cast<size_t>(sp.slot)];
    t.clear();
    for (int i = 0; i < s; ++i) {
      double weight = span_mass_weights ? w[static_cast<size_t>(i)] * s : w[static_cast<size_t>(i)];
      t.push_back({sp.tokens[static_cast<size_t>(i)], weight});
    }
  }
  return targets;
}

std::vector<CanvasItem> reconstruct_full(const Canvas& canvas, const SlotTargets& targets, int eos_slot_id) {
  if (static_cast<int>(targets.size()) != canvas.length())
    throw std::invalid_argument("reconstruct_full: targets size mismatch");
  std::vector<CanvasItem> out;
  for (int i = 0; i < canvas.length(); ++i) {
    const CanvasItem& anchor = canvas.items[static_cast<size_t>(i)];
    for (const SlotTarget& t : targets[static_cast<size_t>(i)])
      if (t.token != eos_slot_id) out.push_back({t.token, anchor.channel});
    out.push_back(anchor);
  }
  return out;
}

void validate_canvas(const Canvas& canvas, int sep_id) {
  size_t seg = 0;
  int prev_channel = -1;
  for (const CanvasItem& it : canvas.items) {
    if (seg >= canvas.channels.size()) throw std::logic_error("canvas: items after final SEP");
    int expect = canvas.channels[seg];
    if (it.channel != expect) throw std::logic_error("canvas: item channel does not match its segment");
    if (it.channel < prev_channel) throw std::logic_error("canvas: channel ids must be non-decreasing");
    prev_channel = it.channel;
    if (it.token == sep_id) ++seg;
  }
  if (seg != canvas.channels.size()) throw std::logic_error("canvas: missing SEP for an active channel");
}

}  // namespace mglm
