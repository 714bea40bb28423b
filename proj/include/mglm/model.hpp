#pragma once

#include <cstdint>
#include <vector>

#include "mglm/canvas.hpp"
#include "mglm/graph.hpp"
#include "mglm/tensor.hpp"

namespace mglm {

struct ModelConfig {
  int layers = 2;
  int dim = 64;
  int heads = 4;
  int ffn = 256;
  int vocab_size = 0;
  int max_pos = 128;
  int channels = 3;
  uint64_t seed = 1;

  void validate() const;
};

// Index of one transformer block's parameters inside ModelParams::params.
struct LayerRefs {
  int ln1_gamma, ln1_beta;
  int wq, bq, wk, bk, wv, bv, wo, bo;
  int ln2_gamma, ln2_beta;
  int w1, b1, w2, b2;
};

// All learnable arrays of the decoder-only, non-causal insertion transformer:
// token/position/channel embeddings, L pre-norm attention blocks, a final
// layer norm and the output projection to vocabulary logits.
struct ModelParams {
  ModelConfig config;
  std::vector<Parameter> params;

  int tok_emb = -1, pos_emb = -1, chan_emb = -1;
  std::vector<LayerRefs> layers;
  int lnf_gamma = -1, lnf_beta = -1;
  int w_out = -1, b_out = -1;

  static ModelParams init(const ModelConfig& config);

  Parameter& at(int idx) { return params[static_cast<size_t>(idx)]; }
  const Parameter& at(int idx) const { return params[static_cast<size_t>(idx)]; }
  void zero_grads();
  std::vector<Parameter*> all_params();
  long value_count() const;
};

// Logit value used to exclude PAD/SEP from the insertable vocabulary; large
// enough that exp() underflows to exactly 0 after max subtraction.
constexpr double kMaskedLogit = -1e30;

// banned[v] is true for columns that must never be inserted (PAD, SEP).
std::vector<uint8_t> banned_columns(int vocab_size);

// Graph-building pieces (shared by training and inference).
int embed_canvas_node(Graph& g, const Canvas& canvas, ModelParams& mp);
int transformer_block_node(Graph& g, int x, ModelParams& mp, int layer);
int encode_node(Graph& g, const Canvas& canvas, ModelParams& mp);          // embeddings + L blocks
int slot_logits_node(Graph& g, int hidden, ModelParams& mp);               // final LN + projection, unmasked

// Forward-only conveniences.
Tensor embed_canvas(const Canvas& canvas, ModelParams& mp);
Tensor encode(const Canvas& canvas, ModelParams& mp);
// Row i = logits over the vocabulary for slot i, with PAD and SEP masked.
Tensor slot_logits(const Canvas& canvas, ModelParams& mp);

// p(content, location) over the T x V grid as one temperature softmax across
// all non-masked entries, plus the derived marginal p(l) and conditional
// p(c|l). p(c|l) * p(l) == p(c,l) up to rounding.
struct JointDistribution {
  Tensor joint;                       // [T,V], masked entries 0
  std::vector<double> slot_marginal;  // p(l)
  Tensor content_given_slot;          // [T,V], masked entries 0
};
JointDistribution joint_distribution(const Tensor& masked_logits, double temperature);

}  // namespace mglm
