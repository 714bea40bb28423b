#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace mglm {

std::vector<std::string> split_ws(const std::string& text);

// Shared vocabulary over all channels. Ids 0..3 are reserved:
// PAD, UNK, [SEP] (channel terminator) and [EOS_SLOT] (the "nothing left to
// insert here" prediction).
struct Vocabulary {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSep = 2;
  static constexpr int kEosSlot = 3;
  static constexpr int kNumSpecials = 4;

  std::vector<std::string> id_to_token;
  std::unordered_map<std::string, int> token_to_id;

  int size() const { return static_cast<int>(id_to_token.size()); }

  // Tokens appearing in the corpus get ids >= 4, ordered by descending
  // frequency then lexicographically, so ids are stable across runs.
  // Corpus tokens that collide with a reserved surface form are rejected.
  static Vocabulary build(const std::vector<std::string>& corpus_lines);

  std::vector<int> encode(const std::string& text) const;  // unknown -> UNK
  std::string decode_ids(const std::vector<int>& ids) const;
  std::vector<std::string> decode_tokens(const std::vector<int>& ids) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
};

// Channel naming; k is fixed for a trained model.
struct ChannelSpec {
  int k = 0;
  std::vector<std::string> names;

  static ChannelSpec make(int k);  // names "ch0".."ch{k-1}"
  void validate() const;           // 2 <= k <= 8, distinct names
};

}  // namespace mglm
