#include "mglm/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mglm/rng.hpp"
#include "mglm/vocab.hpp"

namespace mglm {

void ModelConfig::validate() const {
  if (layers < 0) throw std::invalid_argument("ModelConfig: layers must be >= 0");
  if (dim < 1 || ffn < 1) throw std::invalid_argument("ModelConfig: dim and ffn must be >= 1");
  if (heads < 1 || dim % heads != 0)
    throw std::invalid_argument("ModelConfig: head count must divide model dim");
  if (vocab_size < Vocabulary::kNumSpecials + 1)
    throw std::invalid_argument("ModelConfig: vocab_size must cover the specials plus one token");
  if (max_pos < 2) throw std::invalid_argument("ModelConfig: max_pos too small");
  if (channels < 1) throw std::invalid_argument("ModelConfig: need at least one channel");
}

namespace {

Tensor uniform_init(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  double s = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : t.data) v = (rng.uniform_double() * 2.0 - 1.0) * s;
  return t;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& config) {
  config.validate();
  ModelParams mp;
  mp.config = config;
  Rng rng = Rng::stream(config.seed, "model-init");
  int d = config.dim, V = config.vocab_size, P = config.max_pos, k = config.channels, f = config.ffn;

  auto add = [&](const std::string& name, Tensor t) {
    mp.params.emplace_back(name, std::move(t));
    return static_cast<int>(mp.params.size()) - 1;
  };
  auto matrix = [&](const std::string& name, int rows, int cols) {
    return add(name, uniform_init({rows, cols}, rows, cols, rng));
  };
  auto bias = [&](const std::string& name, int n) { return add(name, Tensor::zeros({n})); };
  auto gain = [&](const std::string& name, int n) {
    Tensor t = Tensor::zeros({n});
    t.fill(1.0);
    return add(name, std::move(t));
  };

  mp.tok_emb = matrix("tok_emb", V, d);
  mp.pos_emb = matrix("pos_emb", P, d);
  mp.chan_emb = matrix("chan_emb", k, d);
  for (int l = 0; l < config.layers; ++l) {
    std::string p = "layer" + std::to_string(l) + ".";
    LayerRefs r;
    r.ln1_gamma = gain(p + "ln1.gamma", d);
    r.ln1_beta = bias(p + "ln1.beta", d);
    r.wq = matrix(p + "attn.wq", d, d);
    r.bq = bias(p + "attn.bq", d);
    r.wk = matrix(p + "attn.wk", d, d);
    r.bk = bias(p + "attn.bk", d);
    r.wv = matrix(p + "attn.wv", d, d);
    r.bv = bias(p + "attn.bv", d);
    r.wo = matrix(p + "attn.wo", d, d);
    r.bo = bias(p + "attn.bo", d);
    r.ln2_gamma = gain(p + "ln2.gamma", d);
    r.ln2_beta = bias(p + "ln2.beta", d);
    r.w1 = matrix(p + "ffn.w1", d, f);
    r.b1 = bias(p + "ffn.b1", f);
    r.w2 = matrix(p + "ffn.w2", f, d);
    r.b2 = bias(p + "ffn.b2", d);
    mp.layers.push_back(r);
  }
  mp.lnf_gamma = gain("final_ln.gamma", d);
  mp.lnf_beta = bias("final_ln.beta", d);
  mp.w_out = matrix("out.w", d, V);
  mp.b_out = bias("out.b", V);
  return mp;
}

void ModelParams::zero_grads() {
  for (Parameter& p : params) p.zero_grad();
}

std::vector<Parameter*> ModelParams::all_params() {
  std::vector<Parameter*> out;
  out.reserve(params.size());
  for (Parameter& p : params) out.push_back(&p);
  return out;
}

long ModelParams::value_count() const {
  long n = 0;
  for (const Parameter& p : params) n += p.value.numel();
  return n;
}

std::vector<uint8_t> banned_columns(int vocab_size) {
  std::vector<uint8_t> banned(static_cast<size_t>(vocab_size), 0);
  banned[Vocabulary::kPad] = 1;
  banned[Vocabulary::kSep] = 1;
  return banned;
}

int embed_canvas_node(Graph& g, const Canvas& canvas, ModelParams& mp) {
  if (canvas.length() < 1) throw std::invalid_argument("embed_canvas: empty canvas");
  std::vector<int> tokens, channels;
  tokens.reserve(canvas.items.size());
  channels.reserve(canvas.items.size());
  for (const CanvasItem& it : canvas.items) {
    tokens.push_back(it.token);
    channels.push_back(it.channel);
  }
  return g.embed_rows(g.param(mp.at(mp.tok_emb)), g.param(mp.at(mp.pos_emb)),
                      g.param(mp.at(mp.chan_emb)), tokens, channels);
}

int transformer_block_node(Graph& g, int x, ModelParams& mp, int layer) {
  const LayerRefs& r = mp.layers[static_cast<size_t>(layer)];
  int h = g.layer_norm(x, g.param(mp.at(r.ln1_gamma)), g.param(mp.at(r.ln1_beta)));
  int q = g.add_rowvec(g.matmul(h, g.param(mp.at(r.wq))), g.param(mp.at(r.bq)));
  int k = g.add_rowvec(g.matmul(h, g.param(mp.at(r.wk))), g.param(mp.at(r.bk)));
  int v = g.add_rowvec(g.matmul(h, g.param(mp.at(r.wv))), g.param(mp.at(r.bv)));
  int att = g.attention_core(q, k, v, mp.config.heads);
  int proj = g.add_rowvec(g.matmul(att, g.param(mp.at(r.wo))), g.param(mp.at(r.bo)));
  int x1 = g.add(x, proj);
  int h2 = g.layer_norm(x1, g.param(mp.at(r.ln2_gamma)), g.param(mp.at(r.ln2_beta)));
  int ff = g.add_rowvec(g.matmul(h2, g.param(mp.at(r.w1))), g.param(mp.at(r.b1)));
  int ff2 = g.add_rowvec(g.matmul(g.relu(ff), g.param(mp.at(r.w2))), g.param(mp.at(r.b2)));
  return g.add(x1, ff2);
}

int encode_node(Graph& g, const Canvas& canvas, ModelParams& mp) {
  int x = embed_canvas_node(g, canvas, mp);
  for (int l = 0; l < mp.config.layers; ++l) x = transformer_block_node(g, x, mp, l);
  return x;
}

int slot_logits_node(Graph& g, int hidden, ModelParams& mp) {
  int h = g.layer_norm(hidden, g.param(mp.at(mp.lnf_gamma)), g.param(mp.at(mp.lnf_beta)));
  return g.add_rowvec(g.matmul(h, g.param(mp.at(mp.w_out))), g.param(mp.at(mp.b_out)));
}

Tensor embed_canvas(const Canvas& canvas, ModelParams& mp) {
  Graph g;
  return g.value(embed_canvas_node(g, canvas, mp));
}

Tensor encode(const Canvas& canvas, ModelParams& mp) {
  Graph g;
  return g.value(encode_node(g, canvas, mp));
}

Tensor slot_logits(const Canvas& canvas, ModelParams& mp) {
  Graph g;
  Tensor logits = g.value(slot_logits_node(g, encode_node(g, canvas, mp), mp));
  std::vector<uint8_t> banned = banned_columns(mp.config.vocab_size);
  for (int i = 0; i < logits.rows(); ++i)
    for (int j = 0; j < logits.cols(); ++j)
      if (banned[static_cast<size_t>(j)]) logits.at(i, j) = kMaskedLogit;
  return logits;
}

JointDistribution joint_distribution(const Tensor& masked_logits, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("joint_distribution: temperature must be > 0");
  if (masked_logits.rank() != 2) throw std::invalid_argument("joint_distribution: logits must be [T,V]");
  int T = masked_logits.shape[0], V = masked_logits.shape[1];
  const double masked_threshold = kMaskedLogit * 0.5;

  JointDistribution jd;
  jd.joint = Tensor::zeros({T, V});
  jd.content_given_slot = Tensor::zeros({T, V});
  jd.slot_marginal.assign(static_cast<size_t>(T), 0.0);

  // Per-row log-sum-exp at the given temperature, then a softmax over the row
  // lses gives p(l); row-wise softmax gives p(c|l); their product is p(c,l).
  std::vector<double> row_lse(static_cast<size_t>(T));
  double inv_tau = 1.0 / temperature;
  for (int i = 0; i < T; ++i) {
    double mx = -1e300;
    for (int j = 0; j < V; ++j) {
      double x = masked_logits.at(i, j);
      if (x <= masked_threshold) continue;
      if (!std::isfinite(x)) throw std::invalid_argument("joint_distribution: non-finite logit");
      mx = std::max(mx, x * inv_tau);
    }
    if (mx == -1e300) throw std::invalid_argument("joint_distribution: fully masked slot row");
    double z = 0.0;
    for (int j = 0; j < V; ++j) {
      double x = masked_logits.at(i, j);
      if (x <= masked_threshold) continue;
      double e = std::exp(x * inv_tau - mx);
      jd.content_given_slot.at(i, j) = e;
      z += e;
    }
    for (int j = 0; j < V; ++j) jd.content_given_slot.at(i, j) /= z;
    row_lse[static_cast<size_t>(i)] = mx + std::log(z);
  }

  double lse_max = -1e300;
  for (double v : row_lse) lse_max = std::max(lse_max, v);
  double zl = 0.0;
  for (int i = 0; i < T; ++i) {
    jd.slot_marginal[static_cast<size_t>(i)] = std::exp(row_lse[static_cast<size_t>(i)] - lse_max);
    zl += jd.slot_marginal[static_cast<size_t>(i)];
  }
  for (int i = 0; i < T; ++i) {
    jd.slot_marginal[static_cast<size_t>(i)] /= zl;
    for (int j = 0; j < V; ++j)
      jd.joint.at(i, j) = jd.slot_marginal[static_cast<size_t>(i)] * jd.content_given_slot.at(i, j);
  }
  return jd;
}

}  // namespace mglm
