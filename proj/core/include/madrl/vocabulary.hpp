#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "madrl/tokens.hpp"

namespace madrl {

// Bijection between surface tokens and ids. Ids 0..3 are always
// <pad>, <s>, </s>, <unk>; content tokens follow in rank order.
class Vocabulary {
 public:
  Vocabulary();

  // Builds from content tokens in rank order. Duplicates and reserved names are rejected.
  static Vocabulary from_tokens(const std::vector<std::string>& content);

  // One token per line, rank order, reserved tokens omitted.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }

  // Whitespace tokenization; out-of-vocabulary words map to <unk>.
  TokenSeq encode(std::string_view text) const;
  // Space-joined surface form; a trailing terminator is dropped.
  std::string decode(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Frequency-ranked whitespace vocabulary over one or more text files. Ties
// break by first appearance. max_size counts content tokens only.
Vocabulary build_vocab(const std::vector<std::filesystem::path>& corpus_paths, std::size_t max_size);

}  // namespace madrl
