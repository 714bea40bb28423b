#include "mglm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mglm/rng.hpp"
#include "mglm/vocab.hpp"

namespace mglm {

namespace {

char channel_prefix(int channel) { return static_cast<char>('a' + channel); }

// Parses "b17" -> 17 for channel 1; returns -1 when the token is not in the
// channel's lexicon.
int parse_word(const std::string& tok, int channel, int lexicon_size) {
  if (tok.size() < 2 || tok[0] != channel_prefix(channel)) return -1;
  int idx = 0;
  for (size_t i = 1; i < tok.size(); ++i) {
    if (tok[i] < '0' || tok[i] > '9') return -1;
    idx = idx * 10 + (tok[i] - '0');
    if (idx >= 1000000) return -1;
  }
  if (tok.size() > 2 && tok[1] == '0') return -1;  // no leading zeros
  return idx < lexicon_size ? idx : -1;
}

void rotate_left(std::vector<int>& v) {
  if (v.size() > 1) std::rotate(v.begin(), v.begin() + 1, v.end());
}

void rotate_right(std::vector<int>& v) {
  if (v.size() > 1) std::rotate(v.begin(), v.end() - 1, v.end());
}

// Pivot word indices -> channel surface sequence under the channel transform.
std::vector<std::string> render(std::vector<int> indices, int channel, TransformKind t) {
  switch (t) {
    case TransformKind::Identity:
    case TransformKind::DictMap:
      break;
    case TransformKind::ReverseDictMap:
      std::reverse(indices.begin(), indices.end());
      break;
    case TransformKind::RotDictMap:
      rotate_left(indices);
      break;
  }
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (int idx : indices) out.push_back(lexicon_word(channel, idx));
  return out;
}

// Channel surface sequence -> pivot word indices (inverse of render).
std::vector<int> unrender(const std::vector<std::string>& tokens, int channel, TransformKind t,
                          int lexicon_size, long* oov_count) {
  std::vector<int> indices;
  indices.reserve(tokens.size());
  for (const std::string& tok : tokens) {
    int idx = parse_word(tok, channel, lexicon_size);
    if (idx < 0) {
      if (!oov_count)
        throw std::invalid_argument("oracle_translate: token '" + tok + "' is not in channel " +
                                    std::to_string(channel) + "'s lexicon");
      ++*oov_count;
      idx = -1;
    }
    indices.push_back(idx);
  }
  switch (t) {
    case TransformKind::Identity:
    case TransformKind::DictMap:
      break;
    case TransformKind::ReverseDictMap:
      std::reverse(indices.begin(), indices.end());
      break;
    case TransformKind::RotDictMap:
      rotate_right(indices);
      break;
  }
  return indices;
}

std::string join(const std::vector<std::string>& toks) {
  std::string out;
  for (const std::string& t : toks) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

TransformKind transform_from_string(const std::string& s) {
  if (s == "identity") return TransformKind::Identity;
  if (s == "dict") return TransformKind::DictMap;
  if (s == "reverse") return TransformKind::ReverseDictMap;
  if (s == "rot") return TransformKind::RotDictMap;
  throw std::invalid_argument("unknown channel transform '" + s + "' (identity|dict|reverse|rot)");
}

std::string transform_to_string(TransformKind t) {
  switch (t) {
    case TransformKind::Identity: return "identity";
    case TransformKind::DictMap: return "dict";
    case TransformKind::ReverseDictMap: return "reverse";
    case TransformKind::RotDictMap: return "rot";
  }
  return "?";
}

void CorpusSpec::validate() const {
  if (k < 2 || k > 8) throw std::invalid_argument("CorpusSpec: k must be in [2,8]");
  if (lexicon_size < 2) throw std::invalid_argument("CorpusSpec: lexicon_size must be >= 2");
  if (min_len < 1 || max_len < min_len)
    throw std::invalid_argument("CorpusSpec: need 1 <= min_len <= max_len");
  if (static_cast<int>(transforms.size()) != k)
    throw std::invalid_argument("CorpusSpec: need one transform per channel");
  if (transforms[0] != TransformKind::Identity)
    throw std::invalid_argument("CorpusSpec: channel 0 transform must be identity");
  for (int c = 1; c < k; ++c)
    if (transforms[static_cast<size_t>(c)] == TransformKind::Identity)
      throw std::invalid_argument("CorpusSpec: identity transform is reserved for channel 0");
  if (n_examples < 0) throw std::invalid_argument("CorpusSpec: n_examples must be >= 0");
}

CorpusSpec CorpusSpec::defaults(int k) {
  CorpusSpec s;
  s.k = k;
  s.transforms = {TransformKind::Identity};
  const TransformKind cycle[3] = {TransformKind::ReverseDictMap, TransformKind::RotDictMap,
                                  TransformKind::DictMap};
  for (int c = 1; c < k; ++c) s.transforms.push_back(cycle[(c - 1) % 3]);
  return s;
}

std::string lexicon_word(int channel, int index) {
  return std::string(1, channel_prefix(channel)) + std::to_string(index);
}

std::vector<ParallelExample> gen_corpus(const CorpusSpec& spec) {
  spec.validate();
  Rng stream = Rng::stream(spec.seed, "corpus");
  std::vector<ParallelExample> out;
  out.reserve(static_cast<size_t>(spec.n_examples));
  for (int i = 0; i < spec.n_examples; ++i) {
    Rng rng = stream.fork(static_cast<uint64_t>(i));
    int len = static_cast<int>(rng.uniform_int(spec.min_len, spec.max_len));
    std::vector<int> indices(static_cast<size_t>(len));
    for (int& idx : indices) idx = static_cast<int>(rng.next_below(static_cast<uint64_t>(spec.lexicon_size)));
    ParallelExample ex;
    for (int c = 0; c < spec.k; ++c)
      ex.channels.push_back(join(render(indices, c, spec.transforms[static_cast<size_t>(c)])));
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::string> oracle_translate(const std::vector<std::string>& tokens, int from_channel,
                                          int to_channel, const CorpusSpec& spec) {
  spec.validate();
  if (from_channel < 0 || from_channel >= spec.k || to_channel < 0 || to_channel >= spec.k)
    throw std::invalid_argument("oracle_translate: channel out of range");
  std::vector<int> pivot = unrender(tokens, from_channel,
                                    spec.transforms[static_cast<size_t>(from_channel)],
                                    spec.lexicon_size, nullptr);
  return render(std::move(pivot), to_channel, spec.transforms[static_cast<size_t>(to_channel)]);
}

std::vector<std::string> oracle_translate_lenient(const std::vector<std::string>& tokens,
                                                  int from_channel, int to_channel,
                                                  const CorpusSpec& spec, long* oov_count) {
  spec.validate();
  if (from_channel < 0 || from_channel >= spec.k || to_channel < 0 || to_channel >= spec.k)
    throw std::invalid_argument("oracle_translate: channel out of range");
  long oov = 0;
  std::vector<int> pivot = unrender(tokens, from_channel,
                                    spec.transforms[static_cast<size_t>(from_channel)],
                                    spec.lexicon_size, &oov);
  if (oov_count) *oov_count += oov;
  std::vector<int> indices = std::move(pivot);
  switch (spec.transforms[static_cast<size_t>(to_channel)]) {
    case TransformKind::Identity:
    case TransformKind::DictMap:
      break;
    case TransformKind::ReverseDictMap:
      std::reverse(indices.begin(), indices.end());
      break;
    case TransformKind::RotDictMap:
      rotate_left(indices);
      break;
  }
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (int idx : indices)
    out.push_back(idx < 0 ? std::string("<oov>") : lexicon_word(to_channel, idx));
  return out;
}

void save_corpus(const std::string& path, const std::vector<ParallelExample>& examples) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_corpus: cannot open " + path);
  for (const ParallelExample& ex : examples) {
    for (size_t c = 0; c < ex.channels.size(); ++c) {
      if (c) f << '\t';
      f << ex.channels[c];
    }
    f << '\n';
  }
  if (!f) throw std::runtime_error("save_corpus: write failed for " + path);
}

std::vector<ParallelExample> load_corpus(const std::string& path, int k) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_corpus: cannot open " + path);
  std::vector<ParallelExample> out;
  std::string line;
  long line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    ParallelExample ex;
    size_t start = 0;
    for (;;) {
      size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        ex.channels.push_back(line.substr(start));
        break;
      }
      ex.channels.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (static_cast<int>(ex.channels.size()) != k)
      throw std::runtime_error("load_corpus: line " + std::to_string(line_no) + ": expected " +
                               std::to_string(k) + " tab-separated fields, got " +
                               std::to_string(ex.channels.size()));
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace mglm
