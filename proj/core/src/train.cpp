#include "fitb/train.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fitb/bleu.hpp"
#include "fitb/error.hpp"

namespace fitb {

std::vector<std::vector<std::string>> fill_sentences(const ClipSet& cs,
                                                     const std::vector<int>& ids) {
  if (ids.size() != cs.blanks.size()) throw DataError("fill_sentences: ID count mismatch");
  std::vector<std::vector<std::string>> out;
  for (const auto& clip : cs.clips) out.push_back(clip.sentence);
  for (std::size_t i = 0; i < cs.blanks.size(); ++i) {
    const auto& b = cs.blanks[i];
    out[b.sentence_index][b.token_position] = id_token(ids[i]);
  }
  return out;
}

namespace {

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out << text;
    if (!out) throw IoError("short write: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void save_predictions(const std::string& path, const Predictions& preds,
                      const std::string& provenance_json) {
  nlohmann::ordered_json doc;
  doc["kind"] = "fitb-predictions";
  doc["format_version"] = 1;
  if (!provenance_json.empty())
    doc["provenance"] = nlohmann::ordered_json::parse(provenance_json);
  auto sets = nlohmann::ordered_json::array();
  for (const auto& p : preds) {
    nlohmann::ordered_json sj;
    sj["movie_id"] = p.movie_id;
    sj["window_index"] = p.window_index;
    sj["ids"] = p.ids;
    if (!p.genders.empty()) {
      auto g = nlohmann::ordered_json::array();
      for (Gender gen : p.genders) g.push_back(to_string(gen));
      sj["genders"] = std::move(g);
    }
    if (!p.attention.empty()) sj["attention"] = p.attention;
    if (!p.chosen_frames.empty()) sj["chosen_frames"] = p.chosen_frames;
    if (!p.filled_sentences.empty()) sj["filled_sentences"] = p.filled_sentences;
    sets.push_back(std::move(sj));
  }
  doc["sets"] = std::move(sets);
  write_text_atomic(path, doc.dump(2) + "\n");
}

Predictions load_predictions(const std::string& path, std::string* provenance_json_out) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed predictions " + path + ": " + e.what());
  }
  if (doc.value("kind", "") != "fitb-predictions")
    throw DataError(path + ": not a fitb-predictions document");
  if (doc.value("format_version", -1) != 1)
    throw VersionError(path + ": unsupported predictions format_version");
  Predictions preds;
  for (const auto& sj : doc.at("sets")) {
    SetPrediction p;
    p.movie_id = sj.at("movie_id").get<std::string>();
    p.window_index = sj.at("window_index").get<std::size_t>();
    p.ids = sj.at("ids").get<std::vector<int>>();
    if (sj.contains("genders"))
      for (const auto& g : sj.at("genders"))
        p.genders.push_back(gender_from_string(g.get<std::string>()));
    if (sj.contains("attention")) p.attention = sj.at("attention").get<std::vector<std::vector<double>>>();
    if (sj.contains("chosen_frames"))
      p.chosen_frames = sj.at("chosen_frames").get<std::vector<std::vector<std::size_t>>>();
    if (sj.contains("filled_sentences"))
      p.filled_sentences = sj.at("filled_sentences").get<std::vector<std::vector<std::string>>>();
    preds.push_back(std::move(p));
  }
  if (provenance_json_out)
    *provenance_json_out = doc.contains("provenance") ? doc["provenance"].dump() : "null";
  return preds;
}

AccuracyReport evaluate_predictions(const Dataset& ds, const Predictions& preds,
                                    Averaging averaging) {
  if (preds.size() != ds.sets.size())
    throw DataError("evaluate_predictions: prediction count " + std::to_string(preds.size()) +
                    " does not match dataset set count " + std::to_string(ds.sets.size()));
  std::vector<PairTally> tallies;
  std::vector<AccuracyReport::PerSet> per_set;
  std::vector<Gender> gt_genders, pred_genders;
  std::vector<std::vector<int>> pred_ids;
  bool genders_available = true;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const ClipSet& cs = ds.sets[i];
    const SetPrediction& p = preds[i];
    if (p.movie_id != cs.movie_id || p.window_index != cs.window_index)
      throw DataError("evaluate_predictions: set order mismatch at index " + std::to_string(i));
    if (!cs.has_ground_truth())
      throw DataError("evaluate_predictions: dataset has no ground-truth IDs for set " +
                      std::to_string(i));
    PairTally t = pairwise_accuracy(cs.gt_local_ids, p.ids);
    tallies.push_back(t);
    per_set.push_back({cs.movie_id, cs.window_index, t});
    pred_ids.push_back(p.ids);
    if (p.genders.size() == cs.gt_genders.size() && !p.genders.empty()) {
      gt_genders.insert(gt_genders.end(), cs.gt_genders.begin(), cs.gt_genders.end());
      pred_genders.insert(pred_genders.end(), p.genders.begin(), p.genders.end());
    } else {
      genders_available = false;
    }
  }
  AccuracyReport report = aggregate(tallies, averaging);
  if (genders_available && !gt_genders.empty())
    report.gender_acc = gender_accuracy(gt_genders, pred_genders);
  report.id_histogram = id_histogram(pred_ids);
  report.per_set = std::move(per_set);
  return report;
}

Predictions predict_dataset(const FillInModel<float>& model, ParameterStore<float>& ps,
                            const Vocabulary& vocab, const Dataset& ds, const DecodeConfig& dc) {
  Predictions preds;
  for (const auto& cs : ds.sets) {
    SetPrediction p;
    p.movie_id = cs.movie_id;
    p.window_index = cs.window_index;
    if (!cs.blanks.empty()) {
      PreparedSet prepared = model.prepare(cs, ds.dims, vocab);
      auto decoded = model.decode(ps, prepared, dc);
      p.ids = std::move(decoded.ids);
      p.genders = std::move(decoded.genders);
      p.attention = std::move(decoded.attention);
      p.chosen_frames = std::move(decoded.chosen_frames);
      p.filled_sentences = fill_sentences(cs, p.ids);
    }
    preds.push_back(std::move(p));
  }
  return preds;
}

template <class S>
void reset_adam(ParameterStore<S>& store) {
  for (const auto& name : store.names()) {
    auto& e = store.entry(name);
    e.adam_m = Tensor<S>();
    e.adam_v = Tensor<S>();
  }
}

template void reset_adam<float>(ParameterStore<float>&);
template void reset_adam<double>(ParameterStore<double>&);

namespace {

double param_norm(const ParameterStore<float>& store) {
  double s = 0.0;
  for (const auto& name : store.names())
    for (float x : store.entry(name).value.raw()) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

// Gradients of parameters a batch never referenced are exactly zero; mark
// them valid so the optimizer's populated-gradient precondition holds.
template <class S>
void mark_untouched_grads_zero(ParameterStore<S>& store) {
  for (const auto& name : store.names()) {
    auto& e = store.entry(name);
    if (e.trainable && !e.grad_populated) e.grad_populated = true;
  }
}

struct ValScore {
  double class_acc = 0.0;
  double inst_acc = 0.0;
  double gender_acc = -1.0;
};

ValScore evaluate_val(const FillInModel<float>& model, ParameterStore<float>& ps,
                      const std::vector<PreparedSet>& val_sets) {
  std::vector<PairTally> tallies;
  std::vector<Gender> gt_g, pr_g;
  for (const auto& set : val_sets) {
    if (set.blanks.empty()) continue;
    auto decoded = model.decode(ps, set, DecodeConfig{});
    tallies.push_back(pairwise_accuracy(set.gt_ids, decoded.ids));
    for (std::size_t i = 0; i < set.gt_genders.size(); ++i) {
      gt_g.push_back(set.gt_genders[i]);
      pr_g.push_back(decoded.genders[i]);
    }
  }
  ValScore score;
  if (!tallies.empty()) {
    AccuracyReport report = aggregate(tallies);
    score.class_acc = report.class_acc;
    score.inst_acc = report.inst_acc;
  }
  if (!gt_g.empty()) score.gender_acc = gender_accuracy(gt_g, pr_g);
  return score;
}

}  // namespace

TrainResult train_fillin(const Dataset& train_ds, const Dataset& val_ds, const FillInConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  std::vector<std::vector<std::string>> train_sentences;
  for (const auto& movie : train_ds.movies)
    for (const auto& clip : movie.clips) train_sentences.push_back(clip.sentence);
  Vocabulary vocab = Vocabulary::build(train_sentences);

  FillInModel<float> model(cfg, vocab.size());
  ParameterStore<float> store;
  Rng init_rng(split_seed(cfg.seed, "init"));
  model.register_params(store, init_rng);
  store.set_rng_seed(cfg.seed);

  // Training windows: all overlapping stride-1 windows per movie (the
  // augmentation path), or the dataset's own segmentation under no_aug.
  std::vector<ClipSet> train_windows;
  if (cfg.ablation.no_aug) {
    train_windows = train_ds.sets;
  } else {
    for (const auto& movie : train_ds.movies) {
      auto windows = split_windows(movie, train_ds.window_length, /*overlapping=*/true);
      for (auto& w : windows) train_windows.push_back(std::move(w));
    }
  }

  std::vector<PreparedSet> train_sets;
  train_sets.reserve(train_windows.size());
  for (const auto& cs : train_windows) {
    if (cs.blanks.empty()) continue;
    if (!cs.has_ground_truth()) throw DataError("train: training set without ground truth");
    train_sets.push_back(model.prepare(cs, train_ds.dims, vocab));
  }
  std::vector<PreparedSet> val_sets;
  val_sets.reserve(val_ds.sets.size());
  for (const auto& cs : val_ds.sets) {
    if (cs.blanks.empty()) continue;
    val_sets.push_back(model.prepare(cs, val_ds.dims, vocab));
  }
  if (train_sets.empty()) throw DataError("train: no training sets with blanks");

  TrainResult result;
  result.vocab = vocab;
  result.best_params = store;
  result.best_val_class_acc = -1.0;

  Rng shuffle_rng(split_seed(cfg.seed, "shuffle"));
  std::vector<std::size_t> order(train_sets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto log_line = [&result](const nlohmann::ordered_json& j) {
    result.log_lines.push_back(j.dump());
  };
  auto elapsed_ms = [&t_start]() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 t_start)
        .count();
  };

  std::uint64_t dropout_counter = 0;

  // Phase 1: gender pretraining of the text encoder. Only txt.* updates.
  for (const auto& name : store.names())
    if (name.rfind("fill.", 0) == 0) store.entry(name).trainable = false;
  std::int64_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_sets) {
      const std::size_t end = std::min(begin + cfg.batch_sets, order.size());
      const float inv = 1.0f / static_cast<float>(end - begin);
      double batch_loss = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const PreparedSet& set = train_sets[order[i]];
        Graph<float> g;
        ForwardOptions fwd;
        fwd.train_mode = true;
        fwd.dropout_seed = split_seed(cfg.seed, "dropout", dropout_counter++);
        auto enc = model.text_encoder().encode_set(g, store, set.tokens, fwd);
        std::vector<std::size_t> targets(set.gt_genders.size());
        for (std::size_t b = 0; b < targets.size(); ++b)
          targets[b] = set.gt_genders[b] == Gender::male ? 0 : 1;
        Value logits = model.text_encoder().gender_logits(g, store, enc.blanks);
        Value loss = g.cross_entropy_from_logits(logits, targets);
        const double loss_value = static_cast<double>(g.value(loss)[0]);
        if (!std::isfinite(loss_value))
          throw NumericError("pretrain: non-finite loss at epoch " + std::to_string(epoch) +
                             " batch " + std::to_string(batches) +
                             ", parameter norm = " + std::to_string(param_norm(store)));
        batch_loss += loss_value * inv;
        g.backward(g.scale(loss, inv));
      }
      mark_untouched_grads_zero(store);
      AdamConfig ac;
      ac.lr = cfg.pretrain_lr;
      adam_update(store, ac, ++step);
      epoch_loss += batch_loss;
      ++batches;
    }
    log_line({{"phase", "pretrain"},
              {"epoch", epoch + 1},
              {"train_loss", epoch_loss / static_cast<double>(batches)},
              {"wall_ms", elapsed_ms()}});
  }
  for (const auto& name : store.names()) store.entry(name).trainable = true;
  reset_adam(store);

  // Phase 2: end-to-end training with teacher forcing.
  step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_sets) {
      const std::size_t end = std::min(begin + cfg.batch_sets, order.size());
      const float inv = 1.0f / static_cast<float>(end - begin);
      double batch_loss = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const PreparedSet& set = train_sets[order[i]];
        Graph<float> g;
        ForwardOptions fwd;
        fwd.train_mode = true;
        fwd.dropout_seed = split_seed(cfg.seed, "dropout", dropout_counter++);
        auto forward = model.forward_set(g, store, set, set.gt_ids, fwd);
        Value loss = model.total_loss(g, forward, set.gt_ids, set.gt_genders);
        const double loss_value = static_cast<double>(g.value(loss)[0]);
        if (!std::isfinite(loss_value))
          throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                             " batch " + std::to_string(batches) +
                             ", parameter norm = " + std::to_string(param_norm(store)));
        batch_loss += loss_value * inv;
        g.backward(g.scale(loss, inv));
      }
      mark_untouched_grads_zero(store);
      AdamConfig ac;
      ac.lr = cfg.lr;
      adam_update(store, ac, ++step);
      epoch_loss += batch_loss;
      ++batches;
    }

    ValScore val = evaluate_val(model, store, val_sets);
    nlohmann::ordered_json j{{"phase", "joint"},
                             {"epoch", epoch + 1},
                             {"train_loss", epoch_loss / static_cast<double>(batches)},
                             {"val_class_acc", val.class_acc},
                             {"val_inst_acc", val.inst_acc},
                             {"wall_ms", elapsed_ms()}};
    if (val.gender_acc >= 0.0) j["val_gender_acc"] = val.gender_acc;
    log_line(j);
    if (val.class_acc > result.best_val_class_acc) {
      result.best_val_class_acc = val.class_acc;
      result.best_epoch = epoch + 1;
      result.best_params = store;
    }
  }

  if (cfg.epochs == 0) result.best_params = store;
  result.train_seconds = static_cast<double>(elapsed_ms()) / 1000.0;
  return result;
}

}  // namespace fitb
