#include "fitb/metrics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "fitb/error.hpp"

namespace fitb {

PairTally pairwise_accuracy(const std::vector<int>& gt, const std::vector<int>& pred) {
  if (gt.size() != pred.size())
    throw DataError("pairwise_accuracy: gt length " + std::to_string(gt.size()) +
                    " != pred length " + std::to_string(pred.size()));
  PairTally t;
  const std::size_t b = gt.size();
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j) {
      const bool gt_same = gt[i] == gt[j];
      const bool pred_same = pred[i] == pred[j];
      if (gt_same) {
        ++t.same_total;
        if (pred_same) ++t.same_correct;
      } else {
        ++t.diff_total;
        if (!pred_same) ++t.diff_correct;
      }
    }
  }
  return t;
}

double harmonic_class_acc(double same_acc, double diff_acc) {
  if (same_acc + diff_acc <= 0.0) return 0.0;
  return 2.0 * same_acc * diff_acc / (same_acc + diff_acc);
}

AccuracyReport aggregate(const std::vector<PairTally>& per_set, Averaging averaging) {
  AccuracyReport r;
  double same_sum = 0.0, diff_sum = 0.0, inst_sum = 0.0;
  std::size_t same_sets = 0, diff_sets = 0, inst_sets = 0;
  std::size_t same_c = 0, same_t = 0, diff_c = 0, diff_t = 0;
  for (const auto& t : per_set) {
    if (t.total() == 0) continue;
    ++inst_sets;
    inst_sum += static_cast<double>(t.correct()) / static_cast<double>(t.total());
    if (t.same_total > 0) {
      ++same_sets;
      same_sum += static_cast<double>(t.same_correct) / static_cast<double>(t.same_total);
    }
    if (t.diff_total > 0) {
      ++diff_sets;
      diff_sum += static_cast<double>(t.diff_correct) / static_cast<double>(t.diff_total);
    }
    same_c += t.same_correct;
    same_t += t.same_total;
    diff_c += t.diff_correct;
    diff_t += t.diff_total;
  }
  if (inst_sets == 0) throw DataError("aggregate: no set with at least one blank pair");
  r.n_sets = inst_sets;
  r.n_pairs_same = same_t;
  r.n_pairs_diff = diff_t;
  if (averaging == Averaging::macro) {
    r.inst_acc = 100.0 * inst_sum / static_cast<double>(inst_sets);
    r.same_acc = same_sets ? 100.0 * same_sum / static_cast<double>(same_sets) : 0.0;
    r.diff_acc = diff_sets ? 100.0 * diff_sum / static_cast<double>(diff_sets) : 0.0;
  } else {
    r.inst_acc = 100.0 * static_cast<double>(same_c + diff_c) / static_cast<double>(same_t + diff_t);
    r.same_acc = same_t ? 100.0 * static_cast<double>(same_c) / static_cast<double>(same_t) : 0.0;
    r.diff_acc = diff_t ? 100.0 * static_cast<double>(diff_c) / static_cast<double>(diff_t) : 0.0;
  }
  r.class_acc = harmonic_class_acc(r.same_acc, r.diff_acc);
  return r;
}

double gender_accuracy(const std::vector<Gender>& gt, const std::vector<Gender>& pred) {
  if (gt.size() != pred.size()) throw DataError("gender_accuracy: length mismatch");
  if (gt.empty()) throw DataError("gender_accuracy: no blanks");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (gt[i] == pred[i]) ++correct;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(gt.size());
}

std::vector<std::size_t> id_histogram(const std::vector<std::vector<int>>& predictions) {
  std::vector<std::size_t> counts;
  for (const auto& seq : predictions) {
    for (int id : seq) {
      if (id < 1) throw DataError("id_histogram: IDs must be positive");
      if (static_cast<std::size_t>(id) > counts.size()) counts.resize(static_cast<std::size_t>(id), 0);
      ++counts[static_cast<std::size_t>(id) - 1];
    }
  }
  return counts;
}

std::string format_report_table(const AccuracyReport& report, const std::string& method) {
  std::ostringstream os;
  auto cell = [&os](double v) {
    os.width(9);
    os.precision(1);
    os.setf(std::ios::fixed);
    os << v;
  };
  os << "Method                                        Same Acc  Diff Acc Class Acc  Inst Acc   Gen Acc\n";
  os.width(45);
  os.setf(std::ios::left);
  os << method;
  os.unsetf(std::ios::left);
  cell(report.same_acc);
  cell(report.diff_acc);
  cell(report.class_acc);
  cell(report.inst_acc);
  if (report.gender_acc)
    cell(*report.gender_acc);
  else {
    os.width(10);
    os << "-";
  }
  os << "\n";
  return os.str();
}

std::string report_to_json(const AccuracyReport& report, const std::string& method,
                           bool include_per_set) {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["same_acc"] = report.same_acc;
  j["diff_acc"] = report.diff_acc;
  j["class_acc"] = report.class_acc;
  j["inst_acc"] = report.inst_acc;
  if (report.gender_acc) j["gender_acc"] = *report.gender_acc;
  j["n_sets"] = report.n_sets;
  j["n_pairs_same"] = report.n_pairs_same;
  j["n_pairs_diff"] = report.n_pairs_diff;
  j["id_histogram"] = report.id_histogram;
  if (include_per_set) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& ps : report.per_set) {
      arr.push_back({{"movie_id", ps.movie_id},
                     {"window_index", ps.window_index},
                     {"same_correct", ps.tally.same_correct},
                     {"same_total", ps.tally.same_total},
                     {"diff_correct", ps.tally.diff_correct},
                     {"diff_total", ps.tally.diff_total}});
    }
    j["per_set"] = std::move(arr);
  }
  return j.dump(2);
}

}  // namespace fitb
