#pragma once

#include <string>

#include "fitb/corpus.hpp"

namespace fitb {

inline constexpr int kDatasetVersion = 1;

// Dataset on disk = one JSON document (movies -> clips -> sentences,
// blanks, face index records) plus two sidecar binary feature packs
// (magic "FITB", version u16, dim u16, count u32, then count little-endian
// f32 vectors): one for face embeddings, one for segment features. Pack
// paths are stored relative to the JSON document.
//
// `provenance_json`, when non-empty, is embedded verbatim as the
// document's "provenance" object.
void save_dataset(const Dataset& ds, const std::string& json_path,
                  const std::string& provenance_json = "");

// Validates while loading; throws DataError/IoError/VersionError with
// location context on malformed input. Non-null provenance_json_out
// receives the embedded provenance ("null" when absent).
Dataset load_dataset(const std::string& json_path, std::string* provenance_json_out = nullptr);

}  // namespace fitb
