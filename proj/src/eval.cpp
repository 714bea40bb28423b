#include "mglm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>

namespace mglm {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<int> target_channels(int k, int src) {
  std::vector<int> t;
  for (int c = 0; c < k; ++c)
    if (c != src) t.push_back(c);
  return t;
}

Canvas source_seeded_canvas(const std::vector<std::vector<int>>& encoded, int k, int src) {
  std::vector<std::vector<int>> seed(static_cast<size_t>(k));
  seed[static_cast<size_t>(src)] = encoded[static_cast<size_t>(src)];
  return init_canvas(k, seed);
}

}  // namespace

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  for (std::thread& t : pool) t.join();
}

std::vector<QdPoint> qd_sweep(ModelParams& mp, const std::vector<ParallelExample>& test_corpus,
                              const Vocabulary& vocab, const QdConfig& config) {
  int k = mp.config.channels;
  if (config.src_channel < 0 || config.src_channel >= k || config.tgt_channel < 0 ||
      config.tgt_channel >= k || config.src_channel == config.tgt_channel)
    throw std::invalid_argument("qd_sweep: bad channel pair");
  if (config.samples_per_source < 2) throw std::invalid_argument("qd_sweep: need >= 2 samples per source");
  int n_sources = std::min<int>(config.max_sources, static_cast<int>(test_corpus.size()));
  if (n_sources < 1) throw std::invalid_argument("qd_sweep: empty test corpus");

  Rng base = Rng::stream(config.seed, "qd");
  std::vector<QdPoint> points;
  for (size_t ti = 0; ti < config.temperatures.size(); ++ti) {
    double tau = config.temperatures[ti];
    int S = config.samples_per_source;
    std::vector<std::vector<TokenSeq>> per_source(static_cast<size_t>(n_sources));

    parallel_for(n_sources, config.threads, [&](int e) {
      std::vector<std::vector<int>> encoded;
      for (const std::string& ch : test_corpus[static_cast<size_t>(e)].channels)
        encoded.push_back(vocab.encode(ch));
      Canvas init = source_seeded_canvas(encoded, k, config.src_channel);
      std::vector<TokenSeq>& samples = per_source[static_cast<size_t>(e)];
      samples.resize(static_cast<size_t>(S));
      for (int s = 0; s < S; ++s) {
        DecodeConfig dc;
        dc.mode = DecodeMode::SerialSample;
        dc.temperature = tau;
        dc.max_iters = config.max_iters;
        dc.seed = base.fork(ti).fork(static_cast<uint64_t>(e)).fork(static_cast<uint64_t>(s)).seed();
        dc.allowed_channels = {config.tgt_channel};
        DecodeResult d = decode(dc, init, mp);
        samples[static_cast<size_t>(s)] =
            vocab.decode_tokens(d.channel_tokens[static_cast<size_t>(config.tgt_channel)]);
      }
    });

    std::vector<TokenSeq> all_candidates;
    std::vector<std::vector<TokenSeq>> all_refs;
    double self_sum = 0.0;
    for (int e = 0; e < n_sources; ++e) {
      TokenSeq ref = split_ws(test_corpus[static_cast<size_t>(e)].channels[static_cast<size_t>(config.tgt_channel)]);
      for (const TokenSeq& s : per_source[static_cast<size_t>(e)]) {
        all_candidates.push_back(s);
        all_refs.push_back({ref});
      }
      self_sum += self_bleu(per_source[static_cast<size_t>(e)]);
    }
    QdPoint p;
    p.temperature = tau;
    p.samples = S;
    p.quality_bleu = corpus_bleu(all_candidates, all_refs).score;
    p.self_bleu = self_sum / n_sources;
    points.push_back(p);
  }
  return points;
}

void write_qd_csv(const std::string& path, const std::vector<QdPoint>& points, int src, int tgt) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_qd_csv: cannot open " + path);
  f << "direction,temperature,quality_bleu,self_bleu,samples\n";
  char buf[128];
  for (const QdPoint& p : points) {
    std::snprintf(buf, sizeof(buf), "%d->%d,%.12g,%.12g,%.12g,%d\n", src, tgt, p.temperature,
                  p.quality_bleu, p.self_bleu, p.samples);
    f << buf;
  }
}

IterationStats iteration_experiment(ModelParams& mp, const std::vector<ParallelExample>& test_corpus,
                                    const Vocabulary& vocab, const IterationConfig& config) {
  int k = mp.config.channels;
  if (config.src_channel < 0 || config.src_channel >= k)
    throw std::invalid_argument("iteration_experiment: source channel out of range");
  std::vector<int> targets = target_channels(k, config.src_channel);
  if (targets.empty()) throw std::invalid_argument("iteration_experiment: no target channels");
  int n = static_cast<int>(test_corpus.size());
  if (config.max_examples > 0) n = std::min(n, config.max_examples);

  struct RawRow {
    long iters_serial = 0, iters_parallel = 0, n_tokens = 0;
    bool truncated = false;
  };
  std::vector<RawRow> raw(static_cast<size_t>(n));

  parallel_for(n, config.threads, [&](int e) {
    std::vector<std::vector<int>> encoded;
    for (const std::string& ch : test_corpus[static_cast<size_t>(e)].channels)
      encoded.push_back(vocab.encode(ch));
    Canvas init = source_seeded_canvas(encoded, k, config.src_channel);
    RawRow& row = raw[static_cast<size_t>(e)];

    // (a) serial over targets: one restricted decode per target channel.
    for (int t : targets) {
      DecodeConfig dc;
      dc.mode = DecodeMode::ParallelGreedy;
      dc.max_iters = config.max_iters;
      dc.allowed_channels = {t};
      DecodeResult d = decode(dc, init, mp);
      row.iters_serial += d.trace.iteration_count;
      row.truncated = row.truncated || d.trace.truncated;
    }
    // (b) all targets in parallel.
    DecodeConfig dc;
    dc.mode = DecodeMode::ParallelGreedy;
    dc.max_iters = config.max_iters;
    dc.allowed_channels = targets;
    DecodeResult d = decode(dc, init, mp);
    row.iters_parallel = d.trace.iteration_count;
    row.truncated = row.truncated || d.trace.truncated;
    for (int t : targets) row.n_tokens += static_cast<long>(d.channel_tokens[static_cast<size_t>(t)].size());
  });

  IterationStats stats;
  std::vector<double> serials, parallels, ratios;
  for (int e = 0; e < n; ++e) {
    const RawRow& row = raw[static_cast<size_t>(e)];
    if (row.truncated) {
      ++stats.truncated_excluded;
      continue;
    }
    if (row.n_tokens < static_cast<long>(targets.size())) {
      ++stats.degenerate_excluded;
      continue;
    }
    IterationRow out;
    out.example_id = e;
    out.total_output_len = row.n_tokens;
    out.parallel_channels = static_cast<int>(targets.size());
    out.iters_serial = row.iters_serial;
    out.iters_parallel = row.iters_parallel;
    out.bounds = iteration_bounds(row.n_tokens, static_cast<long>(targets.size()));
    stats.rows.push_back(out);
    serials.push_back(static_cast<double>(row.iters_serial));
    parallels.push_back(static_cast<double>(row.iters_parallel));
    ratios.push_back(static_cast<double>(row.iters_serial) / static_cast<double>(row.iters_parallel));
  }
  stats.median_serial = median(serials);
  stats.median_parallel = median(parallels);
  stats.median_ratio = median(ratios);
  return stats;
}

void write_iteration_csv(const std::string& path, const IterationStats& stats) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_iteration_csv: cannot open " + path);
  f << "example_id,N,k,iters_serial,iters_parallel,bound_serial,bound_pcp,bound_mcp,bound_single\n";
  for (const IterationRow& r : stats.rows)
    f << r.example_id << ',' << r.total_output_len << ',' << r.parallel_channels << ','
      << r.iters_serial << ',' << r.iters_parallel << ',' << r.bounds.serial << ','
      << r.bounds.per_channel_parallel << ',' << r.bounds.multi_channel_parallel << ','
      << r.bounds.single_sequence << '\n';
}

TranslationEval translation_bleu(ModelParams& mp, const std::vector<ParallelExample>& test_corpus,
                                 const Vocabulary& vocab, int src_channel, int max_iters,
                                 int threads) {
  int k = mp.config.channels;
  if (src_channel < 0 || src_channel >= k)
    throw std::invalid_argument("translation_bleu: source channel out of range");
  std::vector<int> targets = target_channels(k, src_channel);
  int n = static_cast<int>(test_corpus.size());
  if (n == 0) throw std::invalid_argument("translation_bleu: empty test corpus");

  std::vector<std::vector<TokenSeq>> outputs(static_cast<size_t>(n));
  std::vector<uint8_t> truncated(static_cast<size_t>(n), 0);
  parallel_for(n, threads, [&](int e) {
    std::vector<std::vector<int>> encoded;
    for (const std::string& ch : test_corpus[static_cast<size_t>(e)].channels)
      encoded.push_back(vocab.encode(ch));
    DecodeConfig dc;
    dc.mode = DecodeMode::ParallelGreedy;
    dc.max_iters = max_iters;
    dc.allowed_channels = targets;
    DecodeResult d = decode(dc, source_seeded_canvas(encoded, k, src_channel), mp);
    truncated[static_cast<size_t>(e)] = d.trace.truncated ? 1 : 0;
    outputs[static_cast<size_t>(e)].resize(static_cast<size_t>(k));
    for (int t : targets)
      outputs[static_cast<size_t>(e)][static_cast<size_t>(t)] =
          vocab.decode_tokens(d.channel_tokens[static_cast<size_t>(t)]);
  });

  TranslationEval eval;
  for (uint8_t t : truncated) eval.truncated += t;
  for (int t : targets) {
    std::vector<TokenSeq> cands;
    std::vector<std::vector<TokenSeq>> refs;
    for (int e = 0; e < n; ++e) {
      cands.push_back(outputs[static_cast<size_t>(e)][static_cast<size_t>(t)]);
      refs.push_back({split_ws(test_corpus[static_cast<size_t>(e)].channels[static_cast<size_t>(t)])});
    }
    eval.directions.push_back({src_channel, t, corpus_bleu(cands, refs)});
  }
  return eval;
}

void write_translation_csv(const std::string& path, const TranslationEval& eval) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_translation_csv: cannot open " + path);
  f << "src,tgt,bleu,brevity_penalty\n";
  char buf[128];
  for (const auto& d : eval.directions) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.12g,%.12g\n", d.src, d.tgt, d.bleu.score,
                  d.bleu.brevity_penalty);
    f << buf;
  }
}

ConsistencyResult pseudo_target_consistency(const std::vector<std::vector<TokenSeq>>& samples,
                                            const CorpusSpec& spec) {
  if (samples.empty()) throw std::invalid_argument("pseudo_target_consistency: no samples");
  int k = spec.k;
  for (const auto& s : samples)
    if (static_cast<int>(s.size()) != k)
      throw std::invalid_argument("pseudo_target_consistency: sample does not have k channels");

  ConsistencyResult res;
  double sum = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (a == b) continue;
      long oov = 0;
      std::vector<TokenSeq> cands;
      std::vector<std::vector<TokenSeq>> refs;
      for (const auto& s : samples) {
        cands.push_back(s[static_cast<size_t>(b)]);
        refs.push_back({oracle_translate_lenient(s[static_cast<size_t>(a)], a, b, spec, &oov)});
      }
      ConsistencyCell cell{a, b, corpus_bleu(cands, refs).score, oov};
      sum += cell.bleu;
      res.cells.push_back(cell);
    }
  }
  res.mean_bleu = sum / static_cast<double>(res.cells.size());
  return res;
}

void write_consistency_csv(const std::string& path, const std::string& scheme,
                           const ConsistencyResult& result, bool append) {
  std::ofstream f(path, append ? std::ios::binary | std::ios::app : std::ios::binary);
  if (!f) throw std::runtime_error("write_consistency_csv: cannot open " + path);
  if (!append) f << "scheme,src,tgt,bleu\n";
  char buf[128];
  for (const ConsistencyCell& c : result.cells) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.12g\n", scheme.c_str(), c.src, c.tgt, c.bleu);
    f << buf;
  }
}

}  // namespace mglm
