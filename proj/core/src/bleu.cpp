#include "fitb/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fitb/error.hpp"

namespace fitb {

namespace {

constexpr int kMaxOrder = 4;
constexpr double kEps = 1e-9;

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenSeq& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

struct BleuTally {
  std::size_t match[kMaxOrder] = {0, 0, 0, 0};
  std::size_t total[kMaxOrder] = {0, 0, 0, 0};
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;

  void accumulate(const TokenSeq& cand, const TokenSeq& ref) {
    cand_len += cand.size();
    ref_len += ref.size();
    for (int n = 1; n <= kMaxOrder; ++n) {
      const NgramCounts cc = count_ngrams(cand, n);
      const NgramCounts rc = count_ngrams(ref, n);
      for (const auto& [gram, count] : cc) {
        total[n - 1] += count;
        auto it = rc.find(gram);
        if (it != rc.end()) match[n - 1] += std::min(count, it->second);
      }
    }
  }

  double score() const {
    if (cand_len == 0) return 0.0;
    double log_prec = 0.0;
    for (int n = 0; n < kMaxOrder; ++n) {
      const double num = match[n] > 0 ? static_cast<double>(match[n]) : kEps;
      const double den = total[n] > 0 ? static_cast<double>(total[n]) : 1.0;
      log_prec += std::log(num / den);
    }
    double bp = 1.0;
    if (cand_len < ref_len)
      bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
    return bp * std::exp(log_prec / kMaxOrder);
  }
};

}  // namespace

std::string id_token(int local_id) { return "[P" + std::to_string(local_id) + "]"; }

int parse_id_token(const std::string& token) {
  if (token.size() < 4 || token[0] != '[' || token[1] != 'P' || token.back() != ']') return 0;
  int value = 0;
  for (std::size_t i = 2; i + 1 < token.size(); ++i) {
    if (token[i] < '0' || token[i] > '9') return 0;
    value = value * 10 + (token[i] - '0');
  }
  return value;
}

double bleu4(const TokenSeq& candidate, const TokenSeq& reference) {
  BleuTally t;
  t.accumulate(candidate, reference);
  return t.score();
}

double bleu4_corpus(const std::vector<TokenSeq>& candidates,
                    const std::vector<TokenSeq>& references) {
  if (candidates.size() != references.size())
    throw DataError("bleu4_corpus: candidate/reference sentence counts disagree");
  BleuTally t;
  for (std::size_t i = 0; i < candidates.size(); ++i) t.accumulate(candidates[i], references[i]);
  return t.score();
}

namespace {

std::vector<int> distinct_ids_in_order(const std::vector<TokenSeq>& sentences) {
  std::vector<int> out;
  std::set<int> seen;
  for (const auto& s : sentences)
    for (const auto& tok : s) {
      const int id = parse_id_token(tok);
      if (id > 0 && seen.insert(id).second) out.push_back(id);
    }
  return out;
}

std::vector<TokenSeq> relabel_reference(const std::vector<TokenSeq>& refs,
                                        const std::map<int, int>& mapping) {
  std::vector<TokenSeq> out = refs;
  for (auto& sentence : out)
    for (auto& tok : sentence) {
      const int id = parse_id_token(tok);
      if (id == 0) continue;
      auto it = mapping.find(id);
      if (it == mapping.end()) continue;
      // Mapped-to-0 IDs are rendered as tokens that can never occur in a
      // prediction, one distinct token per source ID to keep injectivity.
      tok = it->second > 0 ? id_token(it->second) : "[UNMATCHED" + std::to_string(id) + "]";
    }
  return out;
}

std::size_t count_id_token(const std::vector<TokenSeq>& sentences, int id) {
  std::size_t n = 0;
  const std::string tok = id_token(id);
  for (const auto& s : sentences) n += static_cast<std::size_t>(std::count(s.begin(), s.end(), tok));
  return n;
}

}  // namespace

PermutationScore permutation_max_score(const std::vector<TokenSeq>& pred_sentences,
                                       const std::vector<TokenSeq>& ref_sentences,
                                       std::size_t exact_limit) {
  const std::vector<int> ref_ids = distinct_ids_in_order(ref_sentences);
  const std::vector<int> pred_ids = distinct_ids_in_order(pred_sentences);
  const std::size_t m = ref_ids.size();

  PermutationScore result;
  result.identity_score = bleu4_corpus(pred_sentences, ref_sentences);

  // The identity relabeling is always a candidate, so best >= plain BLEU.
  std::map<int, int> best_map;
  for (int rid : ref_ids) best_map[rid] = rid;
  result.best_score = result.identity_score;

  if (m <= exact_limit && pred_ids.size() <= 10) {
    // Exhaustive search over injective assignments of reference IDs onto
    // prediction IDs, with "unmatchable" as the remaining option.
    std::map<int, int> current;
    std::vector<std::uint8_t> used(pred_ids.size(), 0);
    auto recurse = [&](auto&& self, std::size_t i) -> void {
      if (i == m) {
        const double score = bleu4_corpus(pred_sentences, relabel_reference(ref_sentences, current));
        if (score > result.best_score) {
          result.best_score = score;
          best_map = current;
        }
        return;
      }
      const int rid = ref_ids[i];
      for (std::size_t q = 0; q < pred_ids.size(); ++q) {
        if (used[q]) continue;
        used[q] = 1;
        current[rid] = pred_ids[q];
        self(self, i + 1);
        used[q] = 0;
      }
      current[rid] = 0;
      self(self, i + 1);
      current.erase(rid);
    };
    recurse(recurse, 0);
    result.exhaustive = true;
  } else {
    // Greedy: assign reference IDs (most frequent first) to the unused
    // prediction ID with the largest unigram ID-token overlap.
    std::vector<std::pair<std::size_t, int>> by_freq;
    for (int rid : ref_ids) by_freq.emplace_back(count_id_token(ref_sentences, rid), rid);
    std::sort(by_freq.rbegin(), by_freq.rend());
    std::set<int> used;
    std::map<int, int> greedy;
    for (const auto& [rcount, rid] : by_freq) {
      int best_q = 0;
      std::size_t best_gain = 0;
      for (int q : pred_ids) {
        if (used.count(q)) continue;
        const std::size_t gain = std::min(rcount, count_id_token(pred_sentences, q));
        if (gain > best_gain || (gain == best_gain && best_q == 0)) {
          best_gain = gain;
          best_q = q;
        }
      }
      greedy[rid] = best_q;
      if (best_q > 0) used.insert(best_q);
    }
    const double score = bleu4_corpus(pred_sentences, relabel_reference(ref_sentences, greedy));
    if (score > result.best_score) {
      result.best_score = score;
      best_map = greedy;
    }
    result.exhaustive = false;
  }

  for (int rid : ref_ids) {
    result.from.push_back(rid);
    result.to.push_back(best_map.count(rid) ? best_map[rid] : 0);
  }
  return result;
}

}  // namespace fitb
