#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mglm {

// One meaning expressed through k channels; channels[c] is a whitespace
// delimited token string. Every channel is that channel's transform of
// channel 0, so exact oracle translation exists in every direction.
struct ParallelExample {
  std::vector<std::string> channels;
};

// Sequence-level transform tying a channel to the pivot (channel 0).
// All transforms are bijections on sequences:
//   Identity        pivot itself (channel 0 only)
//   DictMap         per-token bijective relabeling into the channel's lexicon
//   ReverseDictMap  DictMap, then reverse token order
//   RotDictMap      DictMap, then rotate the sequence left by one
enum class TransformKind { Identity, DictMap, ReverseDictMap, RotDictMap };

TransformKind transform_from_string(const std::string& s);
std::string transform_to_string(TransformKind t);

struct CorpusSpec {
  int k = 3;
  int lexicon_size = 50;
  int min_len = 3;
  int max_len = 12;
  std::vector<TransformKind> transforms;  // size k, transforms[0] == Identity
  uint64_t seed = 1;
  int n_examples = 0;

  void validate() const;
  static CorpusSpec defaults(int k = 3);  // identity, reverse, rot, dict, ...
};

// Surface form of word `index` in channel `channel`'s lexicon. Lexicons are
// pairwise disjoint across channels (distinct letter prefixes).
std::string lexicon_word(int channel, int index);

// Deterministic generation: channel 0 i.i.d. uniform over the lexicon with
// length uniform in [min_len, max_len], drawn from the SplitMix64 "corpus"
// stream of spec.seed with one forked stream per example; other channels are
// derived by their transforms. Bit-reproducible.
std::vector<ParallelExample> gen_corpus(const CorpusSpec& spec);

// Exact translation: inverse of from-channel's transform, then to-channel's.
// Throws std::invalid_argument when a token is outside the source lexicon.
std::vector<std::string> oracle_translate(const std::vector<std::string>& tokens, int from_channel,
                                          int to_channel, const CorpusSpec& spec);

// Lenient variant for scoring model samples: out-of-lexicon tokens map to a
// mismatch marker instead of throwing; *oov_count is incremented per token.
std::vector<std::string> oracle_translate_lenient(const std::vector<std::string>& tokens,
                                                  int from_channel, int to_channel,
                                                  const CorpusSpec& spec, long* oov_count);

// TSV persistence: one example per line, k tab-separated fields, tokens
// separated by single spaces, UTF-8, LF endings.
void save_corpus(const std::string& path, const std::vector<ParallelExample>& examples);
std::vector<ParallelExample> load_corpus(const std::string& path, int k);

}  // namespace mglm
