#pragma once

#include <cstdint>
#include <vector>

#include "mglm/canvas.hpp"
#include "mglm/model.hpp"

namespace mglm {

enum class DecodeMode { SerialGreedy, SerialSample, ParallelGreedy };

struct DecodeConfig {
  DecodeMode mode = DecodeMode::ParallelGreedy;
  double temperature = 1.0;  // SerialSample only
  int max_iters = 256;
  uint64_t seed = 0;
  // Channels whose slots may receive insertions; empty means all.
  std::vector<int> allowed_channels;

  void validate() const;
};

struct Insertion {
  int slot;
  int token;
  int channel;
};

struct DecodeTrace {
  std::vector<std::vector<Insertion>> iterations;  // per-iteration insertions
  int iteration_count = 0;                         // == iterations.size()
  double wall_ms = 0.0;
  Canvas final_canvas;
  bool truncated = false;
};

// Seed canvas: each channel's provided tokens (complete sentences or
// scattered fragments, order preserved) followed by its SEP; an empty list
// contributes a lone SEP.
Canvas init_canvas(int k, const std::vector<std::vector<int>>& tokens_per_channel);
Canvas init_canvas_subset(const std::vector<int>& channels,
                          const std::vector<std::vector<int>>& tokens_per_channel);

struct ParallelStep {
  std::vector<Insertion> insertions;  // ascending slot order
  bool all_closed = false;            // every eligible slot predicted EOS_SLOT
};

// One parallel-greedy iteration: every eligible slot takes argmax_c p(c|l);
// EOS_SLOT predictions contribute nothing. Positions refer to the pre-step
// canvas.
ParallelStep step_parallel_greedy(const Canvas& canvas, ModelParams& mp,
                                  const std::vector<int>& allowed_channels);

// Applies insertions right-to-left so recorded slot indices never shift.
void apply_insertions(Canvas& canvas, const std::vector<Insertion>& insertions);

enum class SlotState : uint8_t { Open, Closed };

struct SerialStepResult {
  bool inserted = false;
  Insertion insertion{};
  int closed_slot = -1;
};

// One serial step over the joint (content, location) distribution restricted
// to open slots in allowed channels: greedy argmax or temperature sampling.
// Choosing EOS_SLOT closes the slot; an insertion opens the new token's slot
// and reopens the anchor's slot. Throws std::logic_error when no slot is
// eligible.
SerialStepResult step_serial(Canvas& canvas, std::vector<SlotState>& states, ModelParams& mp,
                             DecodeMode mode, double temperature, Rng* rng,
                             const std::vector<int>& allowed_channels);

struct DecodeResult {
  // Indexed by model channel id; channels not present in the canvas are empty.
  std::vector<std::vector<int>> channel_tokens;
  DecodeTrace trace;
};

DecodeResult decode(const DecodeConfig& config, const Canvas& init, ModelParams& mp);

// Splits a canvas at its SEPs into per-model-channel token lists.
std::vector<std::vector<int>> split_channels(const Canvas& canvas, int k);

// Theoretical iteration counts for decoding N tokens across k parallel
// sequences (floor semantics, exact integer arithmetic):
//   serial:                 N
//   per_channel_parallel:   k * (floor(log2(N/k)) + 2)
//   multi_channel_parallel: floor(log2(N/k)) + 2
//   single_sequence:        floor(log2(N)) + 2
struct IterationBounds {
  long serial;
  long per_channel_parallel;
  long multi_channel_parallel;
  long single_sequence;
};
IterationBounds iteration_bounds(long n_tokens, long k);

enum class JointScheme { Unrestricted, Chain, CommonCause };

JointScheme joint_scheme_from_string(const std::string& s);
std::string joint_scheme_to_string(JointScheme s);

struct JointSampleConfig {
  JointScheme scheme = JointScheme::Unrestricted;
  std::vector<int> chain_order;  // Chain; defaults to 0..k-1
  int root = 0;                  // CommonCause
  double temperature = 1.0;
  uint64_t seed = 0;
  int max_iters = 256;
};

struct JointSampleResult {
  std::vector<std::vector<int>> channel_tokens;
  bool truncated = false;
};

// Unconditional joint sampling.
//   Unrestricted: serial sampling over the all-SEP canvas until every slot
//     closes.
//   Chain(order): sample order[0] restricted to its segment of the full
//     canvas, then each next channel on a two-channel canvas conditioned on
//     the previous channel's completed text.
//   CommonCause(root): sample root once, then every other channel on a
//     two-channel canvas conditioned on that same root sample.
JointSampleResult sample_joint(const JointSampleConfig& config, ModelParams& mp);

}  // namespace mglm
