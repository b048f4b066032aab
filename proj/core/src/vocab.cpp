#include "fitb/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "fitb/corpus.hpp"
#include "fitb/error.hpp"

namespace fitb {

namespace {
const char* kSpecials[4] = {"[SUMMARY]", "[BLANK]", "[PAD]", "[UNK]"};
}

Vocabulary::Vocabulary() {
  for (const char* s : kSpecials) add_token(s);
}

std::string Vocabulary::lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void Vocabulary::add_token(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sentences) {
  Vocabulary v;
  for (const auto& sentence : sentences)
    for (const auto& tok : sentence) {
      if (tok == kBlankToken) continue;
      v.add_token(lowercase(tok));
    }
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  if (tokens.size() < 4) throw DataError("vocabulary: missing special tokens");
  for (std::size_t i = 0; i < 4; ++i)
    if (tokens[i] != kSpecials[i])
      throw DataError("vocabulary: reserved token " + std::to_string(i) + " is not " + kSpecials[i]);
  Vocabulary v;
  for (std::size_t i = 4; i < tokens.size(); ++i) v.add_token(tokens[i]);
  return v;
}

std::size_t Vocabulary::index(const std::string& token) const {
  if (token == kBlankToken) return kBlank;
  auto it = index_.find(lowercase(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocabulary::tokenize(const std::vector<std::string>& sentence) const {
  std::vector<std::size_t> out;
  out.reserve(sentence.size());
  for (const auto& tok : sentence) out.push_back(index(tok));
  return out;
}

std::vector<std::size_t> Vocabulary::tokenize(const std::string& sentence) const {
  std::vector<std::string> parts;
  std::istringstream is(sentence);
  std::string tok;
  while (is >> tok) parts.push_back(tok);
  return tokenize(parts);
}

}  // namespace fitb
