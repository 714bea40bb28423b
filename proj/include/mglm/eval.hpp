#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mglm/bleu.hpp"
#include "mglm/corpus.hpp"
#include "mglm/decode.hpp"
#include "mglm/model.hpp"
#include "mglm/vocab.hpp"

namespace mglm {

// Quality-diversity point at one sampling temperature: pooled corpus BLEU of
// all samples against the oracle references, mean per-source Self-BLEU.
struct QdPoint {
  double temperature = 0.0;
  double quality_bleu = 0.0;
  double self_bleu = 0.0;
  int samples = 0;
};

struct QdConfig {
  int src_channel = 0;
  int tgt_channel = 1;
  std::vector<double> temperatures = {0.1, 0.5, 1.0};
  int samples_per_source = 16;
  int max_sources = 100;
  uint64_t seed = 0;
  int max_iters = 256;
  int threads = 1;
};

std::vector<QdPoint> qd_sweep(ModelParams& mp, const std::vector<ParallelExample>& test_corpus,
                              const Vocabulary& vocab, const QdConfig& config);

void write_qd_csv(const std::string& path, const std::vector<QdPoint>& points, int src, int tgt);

// Iteration-count experiment: per example, (a) one channel-restricted
// parallel-greedy decode per target, iterations summed, and (b) one
// multi-channel parallel-greedy decode over all targets at once, against the
// theoretical bounds.
struct IterationRow {
  int example_id = 0;
  long total_output_len = 0;  // N: generated tokens across target channels
  int parallel_channels = 0;  // k: number of target channels decoded together
  long iters_serial = 0;
  long iters_parallel = 0;
  IterationBounds bounds{};
};

struct IterationStats {
  std::vector<IterationRow> rows;
  int truncated_excluded = 0;
  int degenerate_excluded = 0;  // decodes that produced fewer tokens than channels
  double median_serial = 0.0;
  double median_parallel = 0.0;
  double median_ratio = 0.0;  // median over rows of iters_serial / iters_parallel
};

struct IterationConfig {
  int src_channel = 0;
  int max_iters = 256;
  int max_examples = 0;  // 0 = all
  int threads = 1;
};

IterationStats iteration_experiment(ModelParams& mp, const std::vector<ParallelExample>& test_corpus,
                                    const Vocabulary& vocab, const IterationConfig& config);

void write_iteration_csv(const std::string& path, const IterationStats& stats);

// Conditional translation quality: parallel-greedy decode from the source
// channel, corpus BLEU per target channel against the corpus references.
struct TranslationEval {
  struct Direction {
    int src, tgt;
    BleuResult bleu;
  };
  std::vector<Direction> directions;
  int truncated = 0;
};

TranslationEval translation_bleu(ModelParams& mp, const std::vector<ParallelExample>& test_corpus,
                                 const Vocabulary& vocab, int src_channel, int max_iters = 256,
                                 int threads = 1);

void write_translation_csv(const std::string& path, const TranslationEval& eval);

// Cross-channel self-consistency of joint samples: for each ordered channel
// pair (a,b), score sampled channel b against the exact oracle translation of
// sampled channel a. Out-of-lexicon sample tokens become mismatch markers and
// are counted, never errors.
struct ConsistencyCell {
  int src, tgt;
  double bleu;
  long oov_tokens;
};

struct ConsistencyResult {
  std::vector<ConsistencyCell> cells;  // all ordered pairs, k*(k-1)
  double mean_bleu = 0.0;
};

ConsistencyResult pseudo_target_consistency(const std::vector<std::vector<TokenSeq>>& samples,
                                            const CorpusSpec& spec);

void write_consistency_csv(const std::string& path, const std::string& scheme,
                           const ConsistencyResult& result, bool append = false);

// Deterministic parallel map: runs fn(i) for i in [0,n) on `threads` workers;
// each index's work must be independent and write only to its own slot.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace mglm
