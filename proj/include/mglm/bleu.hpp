#pragma once

#include <array>
#include <string>
#include <vector>

namespace mglm {

using TokenSeq = std::vector<std::string>;

struct BleuResult {
  std::array<double, 4> precisions{};  // p_1..p_4; entries beyond the usable order are 0
  std::array<bool, 4> available{};     // order had a nonzero candidate n-gram count
  double brevity_penalty = 0.0;
  double score = 0.0;  // in [0, 100]
  long candidate_length = 0;
  long reference_length = 0;
};

// Corpus-level BLEU: modified n-gram precision with reference clipping pooled
// across the corpus, brevity penalty from closest reference lengths (ties
// broken toward the shorter reference). Orders with no candidate n-grams are
// dropped from the geometric mean; by default any zero precision zeroes the
// score (no smoothing). zero_precision_floor > 0 substitutes that value for
// zero precisions instead.
BleuResult corpus_bleu(const std::vector<TokenSeq>& candidates,
                       const std::vector<std::vector<TokenSeq>>& references, int max_n = 4,
                       double zero_precision_floor = 0.0);

// Mean over samples of sentence-level BLEU of each sample against all the
// others as references. 100 when all samples are identical; low when samples
// are diverse. Requires at least two samples.
double self_bleu(const std::vector<TokenSeq>& samples, int max_n = 4);

}  // namespace mglm
