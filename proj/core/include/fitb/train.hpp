#pragma once

#include <string>
#include <vector>

#include "fitb/fillin.hpp"
#include "fitb/metrics.hpp"

namespace fitb {

struct SetPrediction {
  std::string movie_id;
  std::size_t window_index = 0;
  std::vector<int> ids;
  std::vector<Gender> genders;  // empty for policies that predict no gender
  std::vector<std::vector<double>> attention;
  std::vector<std::vector<std::size_t>> chosen_frames;
  std::vector<std::vector<std::string>> filled_sentences;
};
using Predictions = std::vector<SetPrediction>;

// Replaces the set's blank tokens with "[P<k>]" ID tokens in blank order.
std::vector<std::vector<std::string>> fill_sentences(const ClipSet& cs,
                                                     const std::vector<int>& ids);

void save_predictions(const std::string& path, const Predictions& preds,
                      const std::string& provenance_json = "");
Predictions load_predictions(const std::string& path, std::string* provenance_json_out = nullptr);

// Joins predictions with the dataset's ground truth by set order and
// aggregates the pairwise metrics; gender accuracy is included when both
// sides carry genders.
AccuracyReport evaluate_predictions(const Dataset& ds, const Predictions& preds,
                                    Averaging averaging = Averaging::macro);

Predictions predict_dataset(const FillInModel<float>& model, ParameterStore<float>& ps,
                            const Vocabulary& vocab, const Dataset& ds, const DecodeConfig& dc);

struct TrainResult {
  ParameterStore<float> best_params;  // highest validation Class-Acc
  Vocabulary vocab;
  double best_val_class_acc = 0.0;
  std::size_t best_epoch = 0;
  double train_seconds = 0.0;
  std::vector<std::string> log_lines;  // one JSON object per line
};

// Two-phase training: the text encoder is first pretrained on blank gender
// classification, then the whole model is trained end-to-end with Adam and
// teacher forcing. Training movies are expanded to all overlapping windows
// unless cfg.ablation.no_aug. Deterministic given cfg.seed.
TrainResult train_fillin(const Dataset& train_ds, const Dataset& val_ds, const FillInConfig& cfg);

// Clears optimizer moments (used at the pretrain/joint phase boundary).
template <class S>
void reset_adam(ParameterStore<S>& store);

}  // namespace fitb
