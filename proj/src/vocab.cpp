#include "mglm/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

namespace mglm {

namespace {
const char* kReserved[Vocabulary::kNumSpecials] = {"PAD", "UNK", "[SEP]", "[EOS_SLOT]"};
}

std::vector<std::string> split_ws(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus_lines) {
  if (corpus_lines.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  std::map<std::string, long> freq;
  for (const std::string& line : corpus_lines)
    for (const std::string& tok : split_ws(line)) freq[tok] += 1;
  if (freq.empty()) throw std::invalid_argument("build_vocab: corpus contains no tokens");

  std::set<std::string> reserved(std::begin(kReserved), std::end(kReserved));
  for (const auto& [tok, n] : freq)
    if (reserved.count(tok))
      throw std::invalid_argument("build_vocab: corpus token collides with reserved surface form '" + tok + "'");

  std::vector<std::pair<std::string, long>> by_freq(freq.begin(), freq.end());
  std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  for (const char* s : kReserved) v.id_to_token.emplace_back(s);
  for (const auto& [tok, n] : by_freq) v.id_to_token.push_back(tok);
  for (int i = 0; i < v.size(); ++i) v.token_to_id[v.id_to_token[static_cast<size_t>(i)]] = i;
  return v;
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const std::string& tok : split_ws(text)) {
    auto it = token_to_id.find(tok);
    ids.push_back(it == token_to_id.end() ? kUnk : it->second);
  }
  return ids;
}

std::vector<std::string> Vocabulary::decode_tokens(const std::vector<int>& ids) const {
  std::vector<std::string> toks;
  toks.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || id >= size()) throw std::invalid_argument("decode_ids: id out of range: " + std::to_string(id));
    toks.push_back(id_to_token[static_cast<size_t>(id)]);
  }
  return toks;
}

std::string Vocabulary::decode_ids(const std::vector<int>& ids) const {
  std::string out;
  for (const std::string& t : decode_tokens(ids)) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("vocab save: cannot open " + path);
  for (const std::string& t : id_to_token) f << t << '\n';
  if (!f) throw std::runtime_error("vocab save: write failed for " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("vocab load: cannot open " + path);
  Vocabulary v;
  std::string line;
  while (std::getline(f, line)) v.id_to_token.push_back(line);
  if (v.size() < kNumSpecials) throw std::runtime_error("vocab load: missing reserved lines in " + path);
  for (int i = 0; i < kNumSpecials; ++i)
    if (v.id_to_token[static_cast<size_t>(i)] != kReserved[i])
      throw std::runtime_error("vocab load: reserved line " + std::to_string(i) + " must read '" +
                               kReserved[i] + "' in " + path);
  for (int i = 0; i < v.size(); ++i) v.token_to_id[v.id_to_token[static_cast<size_t>(i)]] = i;
  if (static_cast<int>(v.token_to_id.size()) != v.size())
    throw std::runtime_error("vocab load: duplicate token in " + path);
  return v;
}

ChannelSpec ChannelSpec::make(int k) {
  ChannelSpec s;
  s.k = k;
  for (int i = 0; i < k; ++i) s.names.push_back("ch" + std::to_string(i));
  s.validate();
  return s;
}

void ChannelSpec::validate() const {
  if (k < 2 || k > 8) throw std::invalid_argument("ChannelSpec: k must be in [2,8]");
  if (static_cast<int>(names.size()) != k) throw std::invalid_argument("ChannelSpec: need k names");
  std::set<std::string> uniq(names.begin(), names.end());
  if (static_cast<int>(uniq.size()) != k) throw std::invalid_argument("ChannelSpec: names must be distinct");
}

}  // namespace mglm
