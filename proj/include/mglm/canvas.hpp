#pragma once

#include <vector>

#include "mglm/rng.hpp"

namespace mglm {

struct CanvasItem {
  int token;
  int channel;
  bool operator==(const CanvasItem&) const = default;
};

// The model's working sequence: each active channel's kept tokens followed by
// that channel's SEP, segments in ascending channel order. Slot i means
// "insert immediately to the left of item i", so a canvas of length T has T
// slots and the minimal canvas is one SEP per active channel.
struct Canvas {
  std::vector<CanvasItem> items;
  std::vector<int> channels;  // active channel ids, ascending

  int length() const { return static_cast<int>(items.size()); }
};

enum class ChannelObs { Full, Partial, Empty, Absent };

struct ObservationMask {
  std::vector<ChannelObs> obs;  // indexed by channel id

  std::vector<int> active() const;  // channels that appear in the canvas
};

enum class PriorKind { Uniform, BinaryTree };

struct Prior {
  PriorKind kind = PriorKind::Uniform;
  double tree_tau = 1.0;
};

// How partial observations are drawn: independently per channel (default) or
// one uniform subset over the pooled maskable tokens.
enum class MaskMode { PerChannel, Global };

// A maximal run of missing tokens, attributed to the slot of the nearest kept
// item to its right. Tokens are in original order.
struct Span {
  int slot;
  std::vector<int> tokens;
};

// Per slot: weighted candidate insertions for the missing span anchored
// there, or the single pair (EOS_SLOT, 1.0) when nothing is missing.
struct SlotTarget {
  int token;
  double weight;
};
using SlotTargets = std::vector<std::vector<SlotTarget>>;

// Full concatenated sequence for channels 0..k-1 (or an explicit subset):
// [ch tokens..., SEP] per channel, with channel ids attached.
std::vector<CanvasItem> concatenate_channels(const std::vector<std::vector<int>>& tokens_per_channel);
std::vector<CanvasItem> concatenate_channels_subset(const std::vector<std::vector<int>>& tokens_per_channel,
                                                    const std::vector<int>& channels);

struct SampledCanvas {
  Canvas canvas;
  std::vector<Span> spans;
};

// Draws a partial observation of the full sequence. SEPs are always kept;
// Full channels keep every token; Empty channels keep none; each Partial
// channel of length n keeps a uniform random m ~ U{0..n} subset (uniform over
// subsets of that size), preserving order. This sampling realizes the
// marginalization over factorization orders.
SampledCanvas sample_canvas(const std::vector<CanvasItem>& full, const ObservationMask& mask,
                            Rng& rng, MaskMode mode = MaskMode::PerChannel);

// Weight of each missing token within a span of length s under the prior.
// Uniform: all 1/s. BinaryTree: w_i proportional to exp(-|i-(s-1)/2|/tau),
// normalized, biasing generation toward the span center.
std::vector<double> slot_weights(int span_length, const Prior& prior);

// When true, slot weights are scaled by the span length so a slot's total
// target mass equals its span size instead of 1.
SlotTargets build_training_instance(const Canvas& canvas, const std::vector<Span>& spans,
                                    const Prior& prior, bool span_mass_weights = false);

// Re-inserts every slot's span tokens to the left of their anchors; the
// round trip must reproduce the original full sequence exactly.
std::vector<CanvasItem> reconstruct_full(const Canvas& canvas, const SlotTargets& targets, int eos_slot_id);

// Checks structural invariants (SEP per active channel, non-decreasing
// channel ids, items match their segment's channel); throws on violation.
void validate_canvas(const Canvas& canvas, int sep_id);

}  // namespace mglm
