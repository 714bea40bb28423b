// Command-line front end: corpus generation, vocabulary building, training,
// decoding, joint sampling and the evaluation drivers. All randomness comes
// from config seeds; identical invocations produce identical outputs.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mglm/bleu.hpp"
#include "mglm/canvas.hpp"
#include "mglm/checkpoint.hpp"
#include "mglm/corpus.hpp"
#include "mglm/decode.hpp"
#include "mglm/eval.hpp"
#include "mglm/model.hpp"
#include "mglm/run_config.hpp"
#include "mglm/trainer.hpp"
#include "mglm/vocab.hpp"

namespace {

using namespace mglm;

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) lines.push_back(line);
  return lines;
}

CorpusSpec corpus_spec_from(const RunConfig& cfg) {
  CorpusSpec spec;
  spec.k = static_cast<int>(cfg.get_int("corpus.k", 3));
  spec.lexicon_size = static_cast<int>(cfg.get_int("corpus.lexicon_size", 50));
  spec.min_len = static_cast<int>(cfg.get_int("corpus.min_len", 3));
  spec.max_len = static_cast<int>(cfg.get_int("corpus.max_len", 12));
  spec.seed = cfg.get_u64("corpus.seed", 1);
  spec.n_examples = static_cast<int>(cfg.get_int("corpus.n", 1000));
  std::string def_transforms = "identity";
  for (int c = 1; c < spec.k; ++c)
    def_transforms += std::string(",") + transform_to_string(CorpusSpec::defaults(spec.k).transforms[static_cast<size_t>(c)]);
  spec.transforms.clear();
  for (const std::string& t : cfg.get_list("corpus.transforms", def_transforms))
    spec.transforms.push_back(transform_from_string(t));
  spec.validate();
  return spec;
}

ModelConfig model_config_from(const RunConfig& cfg, int vocab_size, int k) {
  ModelConfig mc;
  mc.layers = static_cast<int>(cfg.get_int("model.layers", 2));
  mc.dim = static_cast<int>(cfg.get_int("model.dim", 64));
  mc.heads = static_cast<int>(cfg.get_int("model.heads", 4));
  mc.ffn = static_cast<int>(cfg.get_int("model.ffn", 256));
  mc.max_pos = static_cast<int>(cfg.get_int("model.max_pos", 128));
  mc.seed = cfg.get_u64("model.seed", 1);
  mc.vocab_size = vocab_size;
  mc.channels = k;
  mc.validate();
  return mc;
}

TrainConfig train_config_from(const RunConfig& cfg, int k) {
  TrainConfig tc;
  tc.regime = regime_from_string(cfg.get_string("train.regime", "joint"),
                                 static_cast<int>(cfg.get_int("train.src", 0)),
                                 static_cast<int>(cfg.get_int("train.tgt", 1)));
  std::string prior = cfg.get_string("train.prior", "uniform");
  if (prior == "uniform") tc.prior.kind = PriorKind::Uniform;
  else if (prior == "tree") tc.prior.kind = PriorKind::BinaryTree;
  else throw ConfigError("config key 'train.prior': expected uniform|tree, got '" + prior + "'");
  tc.prior.tree_tau = cfg.get_double("train.tree_tau", 1.0);
  tc.lr = cfg.get_double("train.lr", 1e-4);
  tc.total_iters = static_cast<int>(cfg.get_int("train.iters", 1000));
  tc.warmup_frac = cfg.get_double("train.warmup_frac", 0.10);
  tc.batch_size = static_cast<int>(cfg.get_int("train.batch", 32));
  tc.seed = cfg.get_u64("train.seed", 1);
  tc.eval_every = static_cast<int>(cfg.get_int("train.eval_every", 25));
  tc.threads = static_cast<int>(cfg.get_int("train.threads", 2));
  std::string mm = cfg.get_string("train.mask_mode", "per_channel");
  if (mm == "per_channel") tc.mask_mode = MaskMode::PerChannel;
  else if (mm == "global") tc.mask_mode = MaskMode::Global;
  else throw ConfigError("config key 'train.mask_mode': expected per_channel|global, got '" + mm + "'");
  tc.span_mass_weights = cfg.get_int("train.span_mass_weights", 0) != 0;
  if (cfg.has("train.mix_weights")) cfg.get_string("train.mix_weights", "");
  tc.validate(k);
  return tc;
}

DecodeMode decode_mode_from(const std::string& s) {
  if (s == "serial_greedy") return DecodeMode::SerialGreedy;
  if (s == "serial_sample") return DecodeMode::SerialSample;
  if (s == "parallel_greedy") return DecodeMode::ParallelGreedy;
  throw ConfigError("decode.mode: expected serial_greedy|serial_sample|parallel_greedy, got '" + s + "'");
}

std::vector<std::string> split_csv(const std::string& raw) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : raw) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string join_tabs(const std::vector<std::string>& fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out += '\t';
    out += fields[i];
  }
  return out;
}

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_file, "key = value config file");
  cmd->add_option("--set", opts.overrides, "config override key=value (repeatable)");
}

int cmd_gen_corpus(const CommonOpts& common, const std::string& out_path) {
  RunConfig cfg = RunConfig::load(common.config_file, common.overrides);
  CorpusSpec spec = corpus_spec_from(cfg);
  std::vector<ParallelExample> corpus = gen_corpus(spec);
  save_corpus(out_path, corpus);
  cfg.write_resolved(out_path + ".config");
  std::cout << "wrote " << corpus.size() << " examples to " << out_path << "\n";
  return 0;
}

int cmd_build_vocab(const std::string& corpus_path, const std::string& out_path) {
  std::vector<std::string> lines;
  for (const std::string& line : read_lines(corpus_path)) {
    std::string flat = line;
    for (char& c : flat)
      if (c == '\t') c = ' ';
    lines.push_back(flat);
  }
  Vocabulary vocab = Vocabulary::build(lines);
  vocab.save(out_path);
  std::cout << "vocabulary of " << vocab.size() << " ids (4 reserved) -> " << out_path << "\n";
  return 0;
}

int cmd_train(const CommonOpts& common, const std::string& corpus_path, const std::string& vocab_path,
              const std::string& out_path, std::string loss_log_path) {
  RunConfig cfg = RunConfig::load(common.config_file, common.overrides);
  int k = static_cast<int>(cfg.get_int("corpus.k", 3));
  std::vector<ParallelExample> corpus = load_corpus(corpus_path, k);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  ModelConfig mc = model_config_from(cfg, vocab.size(), k);
  TrainConfig tc = train_config_from(cfg, k);
  if (loss_log_path.empty()) loss_log_path = out_path + ".loss.csv";
  tc.checkpoint_path = out_path;
  tc.loss_log_path = loss_log_path;

  ModelParams mp = ModelParams::init(mc);
  std::cout << "training " << regime_to_string(tc.regime) << " model (" << mp.value_count()
            << " parameters) for " << tc.total_iters << " steps\n";
  TrainResult res = train(tc, mp, corpus, vocab);
  cfg.write_resolved(out_path + ".config");
  std::cout << "final loss " << res.loss_history.back() << "; checkpoint -> " << out_path << "\n";
  return 0;
}

int cmd_decode(const CommonOpts& common, const std::string& ckpt_path, const std::string& vocab_path,
               int src_channel, const std::string& input_file, const std::string& infill_spec,
               const std::string& out_path, const std::string& trace_path) {
  RunConfig cfg = RunConfig::load(common.config_file, common.overrides);
  ModelParams mp = load_checkpoint(ckpt_path);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  int k = mp.config.channels;

  DecodeConfig dc;
  dc.mode = decode_mode_from(cfg.get_string("decode.mode", "parallel_greedy"));
  dc.temperature = cfg.get_double("decode.temperature", 1.0);
  dc.max_iters = static_cast<int>(cfg.get_int("decode.max_iters", 256));
  dc.seed = cfg.get_u64("decode.seed", 0);
  double max_trunc_frac = cfg.get_double("decode.max_truncated_frac", 1.0);

  if (input_file.empty() == infill_spec.empty())
    throw ConfigError("decode: exactly one of --input-file or --infill-spec is required");

  std::vector<Canvas> canvases;
  if (!input_file.empty()) {
    if (src_channel < 0 || src_channel >= k) throw ConfigError("decode: --src-channel out of range");
    for (const std::string& line : read_lines(input_file)) {
      std::vector<std::vector<int>> seed(static_cast<size_t>(k));
      seed[static_cast<size_t>(src_channel)] = vocab.encode(line);
      canvases.push_back(init_canvas(k, seed));
    }
    dc.allowed_channels.clear();
    for (int c = 0; c < k; ++c)
      if (c != src_channel) dc.allowed_channels.push_back(c);
  } else {
    std::vector<ParallelExample> fragments = load_corpus(infill_spec, k);
    for (const ParallelExample& ex : fragments) {
      std::vector<std::vector<int>> seed(static_cast<size_t>(k));
      for (int c = 0; c < k; ++c) seed[static_cast<size_t>(c)] = vocab.encode(ex.channels[static_cast<size_t>(c)]);
      canvases.push_back(init_canvas(k, seed));
    }
    dc.allowed_channels.clear();  // infilling may insert in any channel
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("decode: cannot open " + out_path);
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path, std::ios::binary);
    if (!trace) throw std::runtime_error("decode: cannot open " + trace_path);
    trace << "example_id,mode,k,total_output_len,iterations,wall_ms\n";
  }

  long truncated = 0;
  for (size_t e = 0; e < canvases.size(); ++e) {
    DecodeConfig per = dc;
    if (dc.mode == DecodeMode::SerialSample) per.seed = Rng(dc.seed).fork(e).seed();
    DecodeResult d = decode(per, canvases[e], mp);
    if (d.trace.truncated) ++truncated;
    std::vector<std::string> fields;
    long total_len = 0;
    for (int c = 0; c < k; ++c) {
      fields.push_back(vocab.decode_ids(d.channel_tokens[static_cast<size_t>(c)]));
      total_len += static_cast<long>(d.channel_tokens[static_cast<size_t>(c)].size());
    }
    out << join_tabs(fields) << '\n';
    if (trace.is_open()) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%zu,%s,%d,%ld,%d,%.3f\n", e,
                    cfg.get_string("decode.mode", "parallel_greedy").c_str(), k, total_len,
                    d.trace.iteration_count, d.trace.wall_ms);
      trace << buf;
    }
  }
  cfg.write_resolved(out_path + ".config");
  std::cout << "decoded " << canvases.size() << " inputs (" << truncated << " truncated) -> "
            << out_path << "\n";
  if (!canvases.empty() &&
      static_cast<double>(truncated) / static_cast<double>(canvases.size()) > max_trunc_frac)
    throw std::runtime_error("decode: truncated fraction exceeds decode.max_truncated_frac");
  return 0;
}

int cmd_sample_joint(const CommonOpts& common, const std::string& ckpt_path,
                     const std::string& vocab_path, const std::string& scheme, int n,
                     const std::string& order_csv, int root, const std::string& out_path) {
  RunConfig cfg = RunConfig::load(common.config_file, common.overrides);
  ModelParams mp = load_checkpoint(ckpt_path);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  int k = mp.config.channels;

  JointSampleConfig jc;
  jc.scheme = joint_scheme_from_string(scheme);
  jc.temperature = cfg.get_double("decode.temperature", 1.0);
  jc.max_iters = static_cast<int>(cfg.get_int("decode.max_iters", 256));
  jc.root = root;
  if (!order_csv.empty())
    for (const std::string& s : split_csv(order_csv)) jc.chain_order.push_back(std::stoi(s));
  uint64_t seed = cfg.get_u64("decode.seed", 0);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("sample-joint: cannot open " + out_path);
  long truncated = 0;
  for (int i = 0; i < n; ++i) {
    jc.seed = Rng(seed).fork(static_cast<uint64_t>(i)).seed();
    JointSampleResult s = sample_joint(jc, mp);
    if (s.truncated) ++truncated;
    std::vector<std::string> fields;
    for (int c = 0; c < k; ++c) fields.push_back(vocab.decode_ids(s.channel_tokens[static_cast<size_t>(c)]));
    out << join_tabs(fields) << '\n';
  }
  cfg.write_resolved(out_path + ".config");
  std::cout << "sampled " << n << " joint examples (" << truncated << " truncated) -> " << out_path
            << "\n";
  return 0;
}

int cmd_eval_bleu(const CommonOpts& common, const std::string& ckpt_path, const std::string& vocab_path,
                  const std::string& corpus_path, int src_channel, const std::string& out_path) {
  RunConfig cfg = RunConfig::load(common.config_file, common.overrides);
  ModelParams mp = load_checkpoint(ckpt_path);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  std::vector<ParallelExample> corpus = load_corpus(corpus_path, mp.config.channels);
  TranslationEval eval = translation_bleu(mp, corpus, vocab, src_channel,
                                          static_cast<int>(cfg.get_int("eval.max_iters", 256)),
                                          static_cast<int>(cfg.get_int("eval.threads", 2)));
  write_translation_csv(out_path, eval);
  cfg.write_resolved(out_path + ".config");
  for (const auto& d : eval.directions)
    std::cout << "BLEU " << d.src << "->" << d.tgt << ": " << d.bleu.score << "\n";
  if (eval.truncated) std::cout << eval.truncated << " truncated decodes\n";
  return 0;
}

int cmd_eval_qd(const CommonOpts& common, const std::string& ckpt_path, const std::string& vocab_path,
                const std::string& corpus_path, int src_channel, int tgt_channel,
                const std::string& out_path) {
  RunConfig cfg = RunConfig::load(common.config_file, common.overrides);
  ModelParams mp = load_checkpoint(ckpt_path);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  std::vector<ParallelExample> corpus = load_corpus(corpus_path, mp.config.channels);
  QdConfig qc;
  qc.src_channel = src_channel;
  qc.tgt_channel = tgt_channel;
  qc.temperatures = cfg.get_double_list("eval.temps", "0.1,0.5,1.0");
  qc.samples_per_source = static_cast<int>(cfg.get_int("eval.samples", 16));
  qc.max_sources = static_cast<int>(cfg.get_int("eval.sources", 100));
  qc.seed = cfg.get_u64("eval.seed", 0);
  qc.max_iters = static_cast<int>(cfg.get_int("eval.max_iters", 256));
  qc.threads = static_cast<int>(cfg.get_int("eval.threads", 2));
  std::vector<QdPoint> points = qd_sweep(mp, corpus, vocab, qc);
  write_qd_csv(out_path, points, src_channel, tgt_channel);
  cfg.write_resolved(out_path + ".config");
  for (const QdPoint& p : points)
    std::cout << "tau " << p.temperature << ": quality " << p.quality_bleu << ", self-BLEU "
              << p.self_bleu << "\n";
  return 0;
}

int cmd_eval_iters(const CommonOpts& common, const std::string& ckpt_path, const std::string& vocab_path,
                   const std::string& corpus_path, int src_channel, const std::string& out_path) {
  RunConfig cfg = RunConfig::load(common.config_file, common.overrides);
  ModelParams mp = load_checkpoint(ckpt_path);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  std::vector<ParallelExample> corpus = load_corpus(corpus_path, mp.config.channels);
  IterationConfig ic;
  ic.src_channel = src_channel;
  ic.max_iters = static_cast<int>(cfg.get_int("eval.max_iters", 256));
  ic.threads = static_cast<int>(cfg.get_int("eval.threads", 2));
  IterationStats stats = iteration_experiment(mp, corpus, vocab, ic);
  write_iteration_csv(out_path, stats);
  cfg.write_resolved(out_path + ".config");
  std::cout << "examples: " << stats.rows.size() << " (" << stats.truncated_excluded
            << " truncated excluded, " << stats.degenerate_excluded << " degenerate excluded)\n"
            << "median serial iters:   " << stats.median_serial << "\n"
            << "median parallel iters: " << stats.median_parallel << "\n"
            << "median serial/parallel ratio: " << stats.median_ratio << "\n";
  return 0;
}

int cmd_eval_consistency(const CommonOpts& common, const std::string& ckpt_path,
                         const std::string& vocab_path, const std::string& schemes_csv, int n,
                         int root, const std::string& out_path) {
  RunConfig cfg = RunConfig::load(common.config_file, common.overrides);
  ModelParams mp = load_checkpoint(ckpt_path);
  Vocabulary vocab = Vocabulary::load(vocab_path);
  CorpusSpec spec = corpus_spec_from(cfg);
  if (spec.k != mp.config.channels)
    throw ConfigError("eval-consistency: corpus.k does not match the checkpoint's channel count");
  double temperature = cfg.get_double("decode.temperature", 1.0);
  int max_iters = static_cast<int>(cfg.get_int("decode.max_iters", 256));
  uint64_t seed = cfg.get_u64("eval.seed", 0);
  int threads = static_cast<int>(cfg.get_int("eval.threads", 2));

  bool first = true;
  std::string schemes = schemes_csv.empty() ? "unrestricted,chain,common_cause" : schemes_csv;
  for (const std::string& name : split_csv(schemes)) {
    JointSampleConfig jc;
    jc.scheme = joint_scheme_from_string(name);
    jc.temperature = temperature;
    jc.max_iters = max_iters;
    jc.root = root;
    std::vector<std::vector<TokenSeq>> samples(static_cast<size_t>(n));
    std::vector<uint8_t> truncated(static_cast<size_t>(n), 0);
    parallel_for(n, threads, [&](int i) {
      JointSampleConfig per = jc;
      per.seed = Rng(seed).fork(static_cast<uint64_t>(i)).seed();
      JointSampleResult s = sample_joint(per, mp);
      truncated[static_cast<size_t>(i)] = s.truncated ? 1 : 0;
      std::vector<TokenSeq> chans;
      for (const auto& ids : s.channel_tokens) chans.push_back(vocab.decode_tokens(ids));
      samples[static_cast<size_t>(i)] = std::move(chans);
    });
    ConsistencyResult res = pseudo_target_consistency(samples, spec);
    write_consistency_csv(out_path, name, res, !first);
    first = false;
    long trunc_count = 0;
    for (uint8_t t : truncated) trunc_count += t;
    std::cout << name << ": mean pseudo-target BLEU " << res.mean_bleu << " over " << res.cells.size()
              << " directions (" << trunc_count << " truncated samples)\n";
  }
  cfg.write_resolved(out_path + ".config");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multichannel insertion language model"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string out_path, corpus_path, vocab_path, ckpt_path, loss_log, input_file, infill_spec,
      trace_path, scheme, order_csv;
  int src_channel = 0, tgt_channel = 1, n = 16, root = 0;

  CLI::App* gen = app.add_subcommand("gen-corpus", "generate a synthetic parallel corpus (TSV)");
  add_common(gen, common);
  gen->add_option("--out", out_path, "output corpus TSV")->required();

  CLI::App* bv = app.add_subcommand("build-vocab", "build a shared vocabulary from a corpus TSV");
  bv->add_option("--corpus", corpus_path, "corpus TSV")->required();
  bv->add_option("--out", out_path, "output vocab file")->required();

  CLI::App* tr = app.add_subcommand("train", "train a model");
  add_common(tr, common);
  tr->add_option("--corpus", corpus_path, "training corpus TSV")->required();
  tr->add_option("--vocab", vocab_path, "vocab file")->required();
  tr->add_option("--out", out_path, "output checkpoint")->required();
  tr->add_option("--loss-log", loss_log, "loss CSV (default <out>.loss.csv)");

  CLI::App* de = app.add_subcommand("decode", "decode inputs with a trained model");
  add_common(de, common);
  de->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  de->add_option("--vocab", vocab_path, "vocab file")->required();
  de->add_option("--src-channel", src_channel, "fully observed source channel (with --input-file)");
  de->add_option("--input-file", input_file, "one source sentence per line");
  de->add_option("--infill-spec", infill_spec, "TSV of per-channel fragments to infill around");
  de->add_option("--out", out_path, "output file (k tab-separated channels per line)")->required();
  de->add_option("--trace", trace_path, "optional decode trace CSV");

  CLI::App* sj = app.add_subcommand("sample-joint", "unconditional joint sampling");
  add_common(sj, common);
  sj->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  sj->add_option("--vocab", vocab_path, "vocab file")->required();
  sj->add_option("--scheme", scheme, "unrestricted|chain|common_cause")->required();
  sj->add_option("--n", n, "number of samples")->required();
  sj->add_option("--order", order_csv, "chain order, comma separated channel ids");
  sj->add_option("--root", root, "common-cause root channel");
  sj->add_option("--out", out_path, "output TSV")->required();

  CLI::App* eb = app.add_subcommand("eval-bleu", "translation BLEU against oracle references");
  add_common(eb, common);
  eb->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  eb->add_option("--vocab", vocab_path, "vocab file")->required();
  eb->add_option("--corpus", corpus_path, "held-out corpus TSV")->required();
  eb->add_option("--src-channel", src_channel, "source channel");
  eb->add_option("--out", out_path, "output CSV")->required();

  CLI::App* eq = app.add_subcommand("eval-qd", "quality-diversity sweep over temperatures");
  add_common(eq, common);
  eq->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  eq->add_option("--vocab", vocab_path, "vocab file")->required();
  eq->add_option("--corpus", corpus_path, "held-out corpus TSV")->required();
  eq->add_option("--src-channel", src_channel, "source channel");
  eq->add_option("--tgt-channel", tgt_channel, "target channel");
  eq->add_option("--out", out_path, "output CSV")->required();

  CLI::App* ei = app.add_subcommand("eval-iters", "serial vs parallel decoding iteration counts");
  add_common(ei, common);
  ei->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  ei->add_option("--vocab", vocab_path, "vocab file")->required();
  ei->add_option("--corpus", corpus_path, "held-out corpus TSV")->required();
  ei->add_option("--src-channel", src_channel, "source channel");
  ei->add_option("--out", out_path, "output CSV")->required();

  CLI::App* ec = app.add_subcommand("eval-consistency", "pseudo-target BLEU of joint samples");
  add_common(ec, common);
  ec->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  ec->add_option("--vocab", vocab_path, "vocab file")->required();
  ec->add_option("--schemes", scheme, "comma list (default all three)");
  ec->add_option("--n", n, "samples per scheme");
  ec->add_option("--root", root, "common-cause root channel");
  ec->add_option("--out", out_path, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_corpus(common, out_path);
    if (bv->parsed()) return cmd_build_vocab(corpus_path, out_path);
    if (tr->parsed()) return cmd_train(common, corpus_path, vocab_path, out_path, loss_log);
    if (de->parsed())
      return cmd_decode(common, ckpt_path, vocab_path, src_channel, input_file, infill_spec,
                        out_path, trace_path);
    if (sj->parsed())
      return cmd_sample_joint(common, ckpt_path, vocab_path, scheme, n, order_csv, root, out_path);
    if (eb->parsed()) return cmd_eval_bleu(common, ckpt_path, vocab_path, corpus_path, src_channel, out_path);
    if (eq->parsed())
      return cmd_eval_qd(common, ckpt_path, vocab_path, corpus_path, src_channel, tgt_channel, out_path);
    if (ei->parsed()) return cmd_eval_iters(common, ckpt_path, vocab_path, corpus_path, src_channel, out_path);
    if (ec->parsed()) return cmd_eval_consistency(common, ckpt_path, vocab_path, scheme, n, root, out_path);
  } catch (const mglm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
