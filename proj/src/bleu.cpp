#include "mglm/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace mglm {

namespace {

// n-grams keyed by tokens joined with an unlikely separator byte.
void count_ngrams(const TokenSeq& toks, int n, std::unordered_map<std::string, long>& out) {
  if (static_cast<int>(toks.size()) < n) return;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key;
    for (int j = 0; j < n; ++j) {
      if (j) key += '\x1f';
      key += toks[i + static_cast<size_t>(j)];
    }
    out[key] += 1;
  }
}

}  // namespace

BleuResult corpus_bleu(const std::vector<TokenSeq>& candidates,
                       const std::vector<std::vector<TokenSeq>>& references, int max_n,
                       double zero_precision_floor) {
  if (candidates.empty()) throw std::invalid_argument("corpus_bleu: empty candidate list");
  if (references.size() != candidates.size())
    throw std::invalid_argument("corpus_bleu: candidates and references differ in length");
  if (max_n < 1 || max_n > 4) throw std::invalid_argument("corpus_bleu: max_n must be in [1,4]");

  BleuResult res;
  std::array<long, 4> matched{};
  std::array<long, 4> total{};

  for (size_t i = 0; i < candidates.size(); ++i) {
    const TokenSeq& cand = candidates[i];
    const std::vector<TokenSeq>& refs = references[i];
    if (refs.empty()) throw std::invalid_argument("corpus_bleu: empty reference set");

    long c = static_cast<long>(cand.size());
    res.candidate_length += c;
    long best_r = static_cast<long>(refs[0].size());
    for (const TokenSeq& r : refs) {
      long rl = static_cast<long>(r.size());
      long d_new = std::labs(rl - c), d_old = std::labs(best_r - c);
      if (d_new < d_old || (d_new == d_old && rl < best_r)) best_r = rl;
    }
    res.reference_length += best_r;

    for (int n = 1; n <= max_n; ++n) {
      std::unordered_map<std::string, long> cand_counts;
      count_ngrams(cand, n, cand_counts);
      if (cand_counts.empty()) continue;
      std::unordered_map<std::string, long> ref_max;
      for (const TokenSeq& r : refs) {
        std::unordered_map<std::string, long> rc;
        count_ngrams(r, n, rc);
        for (const auto& [key, cnt] : rc) {
          long& m = ref_max[key];
          m = std::max(m, cnt);
        }
      }
      for (const auto& [key, cnt] : cand_counts) {
        total[static_cast<size_t>(n - 1)] += cnt;
        auto it = ref_max.find(key);
        if (it != ref_max.end()) matched[static_cast<size_t>(n - 1)] += std::min(cnt, it->second);
      }
    }
  }

  if (res.candidate_length == 0) {
    res.brevity_penalty = 0.0;
    res.score = 0.0;
    return res;
  }
  res.brevity_penalty =
      res.candidate_length >= res.reference_length
          ? 1.0
          : std::exp(1.0 - static_cast<double>(res.reference_length) / res.candidate_length);

  double log_sum = 0.0;
  int n_available = 0;
  bool zero_precision = false;
  for (int n = 1; n <= max_n; ++n) {
    size_t idx = static_cast<size_t>(n - 1);
    if (total[idx] == 0) continue;  // order unusable (all candidates shorter than n)
    res.available[idx] = true;
    double p = static_cast<double>(matched[idx]) / static_cast<double>(total[idx]);
    res.precisions[idx] = p;
    if (p == 0.0) {
      if (zero_precision_floor > 0.0)
        p = zero_precision_floor;
      else
        zero_precision = true;
    }
    if (!zero_precision) log_sum += std::log(p);
    ++n_available;
  }
  if (n_available == 0 || zero_precision) {
    res.score = 0.0;
    return res;
  }
  res.score = 100.0 * res.brevity_penalty * std::exp(log_sum / n_available);
  return res;
}

double self_bleu(const std::vector<TokenSeq>& samples, int max_n) {
  if (samples.size() < 2) throw std::invalid_argument("self_bleu: need at least two samples");
  double sum = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    std::vector<TokenSeq> others;
    others.reserve(samples.size() - 1);
    for (size_t j = 0; j < samples.size(); ++j)
      if (j != i) others.push_back(samples[j]);
    sum += corpus_bleu({samples[i]}, {others}, max_n).score;
  }
  return sum / static_cast<double>(samples.size());
}

}  // namespace mglm
