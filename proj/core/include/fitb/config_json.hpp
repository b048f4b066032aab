#pragma once

#include <string>

#include "fitb/fillin.hpp"
#include "fitb/synthgen.hpp"
#include "fitb/vocab.hpp"

namespace fitb {

// JSON bridges for run configuration and checkpoint extras. Unknown keys
// are rejected so that typos in config files fail loudly.

std::string world_config_to_json(const WorldConfig& cfg);
WorldConfig world_config_from_json(const std::string& json);

std::string fillin_config_to_json(const FillInConfig& cfg);
FillInConfig fillin_config_from_json(const std::string& json);

// Checkpoint extras: fill-in config + vocabulary (+ free-form provenance).
std::string checkpoint_extras_json(const FillInConfig& cfg, const Vocabulary& vocab,
                                   const std::string& provenance_json = "");
void parse_checkpoint_extras(const std::string& extras_json, FillInConfig* cfg, Vocabulary* vocab);

}  // namespace fitb
