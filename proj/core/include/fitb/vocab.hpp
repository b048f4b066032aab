#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace fitb {

// Token vocabulary with four reserved specials at fixed indices. Built
// from whitespace-tokenized, lowercased corpus sentences; unseen tokens
// map to UNK and blank slots to BLANK.
class Vocabulary {
 public:
  static constexpr std::size_t kSummary = 0;  // [CLS]-like set summary token
  static constexpr std::size_t kBlank = 1;
  static constexpr std::size_t kPad = 2;
  static constexpr std::size_t kUnk = 3;

  Vocabulary();

  static Vocabulary build(const std::vector<std::vector<std::string>>& sentences);
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::size_t index(const std::string& token) const;
  std::vector<std::size_t> tokenize(const std::vector<std::string>& sentence) const;
  std::vector<std::size_t> tokenize(const std::string& sentence) const;

  static std::string lowercase(const std::string& s);

 private:
  void add_token(const std::string& token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace fitb
