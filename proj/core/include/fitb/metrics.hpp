#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fitb/corpus.hpp"

namespace fitb {

// Per-set pairwise tallies over all C(B,2) unordered blank pairs. A pair is
// in class Same iff the ground-truth IDs are equal; it is correct iff the
// prediction agrees on same/different.
struct PairTally {
  std::size_t same_correct = 0;
  std::size_t same_total = 0;
  std::size_t diff_correct = 0;
  std::size_t diff_total = 0;

  std::size_t total() const { return same_total + diff_total; }
  std::size_t correct() const { return same_correct + diff_correct; }
};

PairTally pairwise_accuracy(const std::vector<int>& gt, const std::vector<int>& pred);

enum class Averaging {
  macro,  // per-set accuracies averaged over scorable sets (default)
  micro   // pairs pooled over all sets before dividing
};

struct AccuracyReport {
  double same_acc = 0.0;   // percentages in [0, 100]
  double diff_acc = 0.0;
  double class_acc = 0.0;  // harmonic mean of same/diff, 0 if either is 0
  double inst_acc = 0.0;
  std::optional<double> gender_acc;
  std::size_t n_sets = 0;        // sets with at least one pair
  std::size_t n_pairs_same = 0;
  std::size_t n_pairs_diff = 0;
  std::vector<std::size_t> id_histogram;  // predicted blanks per ID rank
  struct PerSet {
    std::string movie_id;
    std::size_t window_index = 0;
    PairTally tally;
  };
  std::vector<PerSet> per_set;
};

double harmonic_class_acc(double same_acc, double diff_acc);

// Averages per-set tallies into a report. Sets without pairs contribute to
// no average; sets without same (diff) pairs are excluded from the same
// (diff) average. Throws DataError when no set has a pair.
AccuracyReport aggregate(const std::vector<PairTally>& per_set,
                         Averaging averaging = Averaging::macro);

double gender_accuracy(const std::vector<Gender>& gt, const std::vector<Gender>& pred);

// Counts blanks per predicted ID rank (index 0 = ID 1).
std::vector<std::size_t> id_histogram(const std::vector<std::vector<int>>& predictions);

// Table-2-style fixed-width table (Same/Diff/Class/Inst/Gen columns).
std::string format_report_table(const AccuracyReport& report, const std::string& method);

std::string report_to_json(const AccuracyReport& report, const std::string& method,
                           bool include_per_set = false);

}  // namespace fitb
