#pragma once

#include <string>
#include <vector>

namespace fitb {

using TokenSeq = std::vector<std::string>;

// Renders a local person ID as the token used in caption scoring.
std::string id_token(int local_id);
// Parses "[P<k>]" back to k; returns 0 for non-ID tokens.
int parse_id_token(const std::string& token);

// BLEU@4 for a single candidate/reference pair: geometric mean of modified
// n-gram precisions (n = 1..4, zero counts smoothed with eps = 1e-9) times
// the brevity penalty exp(1 - r/c) when c < r. Empty candidate scores 0.
double bleu4(const TokenSeq& candidate, const TokenSeq& reference);

// Corpus-style BLEU@4 over aligned sentence pairs: clipped match and total
// counts are pooled over all pairs, as are the candidate/reference lengths.
double bleu4_corpus(const std::vector<TokenSeq>& candidates,
                    const std::vector<TokenSeq>& references);

struct PermutationScore {
  double best_score = 0.0;
  double identity_score = 0.0;
  // Relabeling of the reference's distinct IDs that achieves best_score;
  // parallel arrays from -> to. `to` values of 0 mean "mapped to a label
  // absent from the prediction" (cannot match any prediction ID token).
  std::vector<int> from;
  std::vector<int> to;
  bool exhaustive = true;  // false when the greedy fallback was used
};

// Caption scoring protocol: the reference's person-ID tokens are relabeled
// by every injective assignment of its distinct IDs onto the prediction's
// distinct IDs (plus "unmatchable"), and the assignment with the highest
// set-level BLEU@4 wins. Exhaustive for up to `exact_limit` distinct
// reference IDs; beyond that a greedy assignment maximizing unigram
// ID-token overlap is used and flagged.
PermutationScore permutation_max_score(const std::vector<TokenSeq>& pred_sentences,
                                       const std::vector<TokenSeq>& ref_sentences,
                                       std::size_t exact_limit = 7);

}  // namespace fitb
