#include "fitb/config_json.hpp"

#include <set>

#include <json.hpp>

#include "fitb/error.hpp"

namespace fitb {

namespace {

using Json = nlohmann::ordered_json;

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& what) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError(what + ": unknown key \"" + it.key() + "\"");
}

template <class T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string world_config_to_json(const WorldConfig& cfg) {
  Json j;
  j["n_movies"] = cfg.n_movies;
  j["clips_per_movie"] = cfg.clips_per_movie;
  j["window_length"] = cfg.window_length;
  j["d_face"] = cfg.d_face;
  j["d_vid"] = cfg.d_vid;
  j["t_segments"] = cfg.t_segments;
  j["num_frames"] = cfg.num_frames;
  j["face_noise_sigma"] = cfg.face_noise_sigma;
  j["gender_cue_prob"] = cfg.gender_cue_prob;
  j["distractor_face_rate"] = cfg.distractor_face_rate;
  j["characters_min"] = cfg.characters_min;
  j["characters_max"] = cfg.characters_max;
  j["id_prior"] = cfg.id_prior;
  j["seed"] = cfg.seed;
  j["split"] = to_string(cfg.split);
  j["gender_axis_strength"] = cfg.gender_axis_strength;
  j["n_action_types"] = cfg.n_action_types;
  j["action_slot_prob"] = cfg.action_slot_prob;
  j["blanks_per_clip_probs"] = cfg.blanks_per_clip_probs;
  j["faces_per_character_min"] = cfg.faces_per_character_min;
  j["faces_per_character_max"] = cfg.faces_per_character_max;
  j["segment_noise_sigma"] = cfg.segment_noise_sigma;
  j["extra_character_prob"] = cfg.extra_character_prob;
  return j.dump(2);
}

WorldConfig world_config_from_json(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("world config: malformed JSON: ") + e.what());
  }
  reject_unknown(j, {"n_movies", "clips_per_movie", "window_length", "d_face", "d_vid",
                     "t_segments", "num_frames", "face_noise_sigma", "gender_cue_prob",
                     "distractor_face_rate", "characters_min", "characters_max", "id_prior",
                     "seed", "split", "gender_axis_strength", "n_action_types",
                     "action_slot_prob", "blanks_per_clip_probs", "faces_per_character_min",
                     "faces_per_character_max", "segment_noise_sigma", "extra_character_prob"},
                 "world config");
  WorldConfig cfg;
  get_if(j, "n_movies", cfg.n_movies);
  get_if(j, "clips_per_movie", cfg.clips_per_movie);
  get_if(j, "window_length", cfg.window_length);
  get_if(j, "d_face", cfg.d_face);
  get_if(j, "d_vid", cfg.d_vid);
  get_if(j, "t_segments", cfg.t_segments);
  get_if(j, "num_frames", cfg.num_frames);
  get_if(j, "face_noise_sigma", cfg.face_noise_sigma);
  get_if(j, "gender_cue_prob", cfg.gender_cue_prob);
  get_if(j, "distractor_face_rate", cfg.distractor_face_rate);
  get_if(j, "characters_min", cfg.characters_min);
  get_if(j, "characters_max", cfg.characters_max);
  get_if(j, "id_prior", cfg.id_prior);
  get_if(j, "seed", cfg.seed);
  if (j.contains("split")) cfg.split = split_from_string(j.at("split").get<std::string>());
  get_if(j, "gender_axis_strength", cfg.gender_axis_strength);
  get_if(j, "n_action_types", cfg.n_action_types);
  get_if(j, "action_slot_prob", cfg.action_slot_prob);
  get_if(j, "blanks_per_clip_probs", cfg.blanks_per_clip_probs);
  get_if(j, "faces_per_character_min", cfg.faces_per_character_min);
  get_if(j, "faces_per_character_max", cfg.faces_per_character_max);
  get_if(j, "segment_noise_sigma", cfg.segment_noise_sigma);
  get_if(j, "extra_character_prob", cfg.extra_character_prob);
  cfg.validate();
  return cfg;
}

std::string fillin_config_to_json(const FillInConfig& cfg) {
  Json j;
  j["max_local_ids"] = cfg.max_local_ids;
  j["layers"] = cfg.layers;
  j["heads"] = cfg.heads;
  j["ff"] = cfg.ff;
  j["attn_hidden"] = cfg.attn_hidden;
  j["lambda_gender"] = cfg.lambda_gender;
  j["lr"] = cfg.lr;
  j["epochs"] = cfg.epochs;
  j["batch_sets"] = cfg.batch_sets;
  j["max_blanks"] = cfg.max_blanks;
  j["dropout"] = cfg.dropout;
  j["pretrain_epochs"] = cfg.pretrain_epochs;
  j["pretrain_lr"] = cfg.pretrain_lr;
  j["decode"] = cfg.decode.kind == DecodeKind::greedy ? "greedy" : "beam";
  j["beam_width"] = cfg.decode.beam_width;
  j["text_layers"] = cfg.text.layers;
  j["text_width"] = cfg.text.width;
  j["text_heads"] = cfg.text.heads;
  j["text_ff"] = cfg.text.ff;
  j["text_max_positions"] = cfg.text.max_positions;
  j["eps"] = cfg.clustering.eps;
  j["min_pts"] = cfg.clustering.min_pts;
  j["no_face"] = cfg.ablation.no_face;
  j["no_video"] = cfg.ablation.no_video;
  j["no_aug"] = cfg.ablation.no_aug;
  j["no_gender_loss"] = cfg.ablation.no_gender_loss;
  j["seed"] = cfg.seed;
  j["d_face"] = cfg.d_face;
  j["d_vid"] = cfg.d_vid;
  return j.dump(2);
}

FillInConfig fillin_config_from_json(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("fillin config: malformed JSON: ") + e.what());
  }
  reject_unknown(j, {"max_local_ids", "layers", "heads", "ff", "attn_hidden", "lambda_gender",
                     "lr", "epochs", "batch_sets", "max_blanks", "dropout", "pretrain_epochs",
                     "pretrain_lr", "decode", "beam_width", "text_layers", "text_width",
                     "text_heads", "text_ff", "text_max_positions", "eps", "min_pts", "no_face",
                     "no_video", "no_aug", "no_gender_loss", "seed", "d_face", "d_vid",
                     "preset"},
                 "fillin config");
  FillInConfig cfg;
  if (j.contains("preset")) {
    const std::string preset = j.at("preset").get<std::string>();
    if (preset == "paper")
      cfg = FillInConfig::paper_scale();
    else if (preset != "desk")
      throw ConfigError("fillin config: unknown preset \"" + preset + "\"");
  }
  get_if(j, "max_local_ids", cfg.max_local_ids);
  get_if(j, "layers", cfg.layers);
  get_if(j, "heads", cfg.heads);
  get_if(j, "ff", cfg.ff);
  get_if(j, "attn_hidden", cfg.attn_hidden);
  get_if(j, "lambda_gender", cfg.lambda_gender);
  get_if(j, "lr", cfg.lr);
  get_if(j, "epochs", cfg.epochs);
  get_if(j, "batch_sets", cfg.batch_sets);
  get_if(j, "max_blanks", cfg.max_blanks);
  get_if(j, "dropout", cfg.dropout);
  get_if(j, "pretrain_epochs", cfg.pretrain_epochs);
  get_if(j, "pretrain_lr", cfg.pretrain_lr);
  if (j.contains("decode")) {
    const std::string d = j.at("decode").get<std::string>();
    if (d == "greedy")
      cfg.decode.kind = DecodeKind::greedy;
    else if (d == "beam")
      cfg.decode.kind = DecodeKind::beam;
    else
      throw ConfigError("fillin config: unknown decode mode \"" + d + "\"");
  }
  get_if(j, "beam_width", cfg.decode.beam_width);
  get_if(j, "text_layers", cfg.text.layers);
  get_if(j, "text_width", cfg.text.width);
  get_if(j, "text_heads", cfg.text.heads);
  get_if(j, "text_ff", cfg.text.ff);
  get_if(j, "text_max_positions", cfg.text.max_positions);
  get_if(j, "eps", cfg.clustering.eps);
  get_if(j, "min_pts", cfg.clustering.min_pts);
  get_if(j, "no_face", cfg.ablation.no_face);
  get_if(j, "no_video", cfg.ablation.no_video);
  get_if(j, "no_aug", cfg.ablation.no_aug);
  get_if(j, "no_gender_loss", cfg.ablation.no_gender_loss);
  get_if(j, "seed", cfg.seed);
  get_if(j, "d_face", cfg.d_face);
  get_if(j, "d_vid", cfg.d_vid);
  cfg.validate();
  return cfg;
}

std::string checkpoint_extras_json(const FillInConfig& cfg, const Vocabulary& vocab,
                                   const std::string& provenance_json) {
  Json j;
  j["fillin_config"] = Json::parse(fillin_config_to_json(cfg));
  j["vocab"] = vocab.tokens();
  if (!provenance_json.empty()) j["provenance"] = Json::parse(provenance_json);
  return j.dump();
}

void parse_checkpoint_extras(const std::string& extras_json, FillInConfig* cfg,
                             Vocabulary* vocab) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(extras_json);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint extras: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("fillin_config") || !j.contains("vocab"))
    throw DataError("checkpoint extras: missing fillin_config/vocab");
  if (cfg) *cfg = fillin_config_from_json(j.at("fillin_config").dump());
  if (vocab) *vocab = Vocabulary::from_tokens(j.at("vocab").get<std::vector<std::string>>());
}

}  // namespace fitb
