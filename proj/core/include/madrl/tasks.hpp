#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "madrl/tokens.hpp"
#include "madrl/vocabulary.hpp"

namespace madrl {

struct SentencePair {
  TokenSeq source;
  TokenSeq target;  // no terminator; the policy appends </s> when training
  bool operator==(const SentencePair&) const = default;
};

struct ParallelCorpus {
  std::vector<SentencePair> train;
  std::vector<SentencePair> dev;
  std::vector<SentencePair> test;
  bool operator==(const ParallelCorpus&) const = default;
};

enum class SyntheticKind { kCopy, kReverse, kCipher, kCipherReverse };

SyntheticKind parse_synthetic_kind(const std::string& name);
std::string to_string(SyntheticKind kind);

struct SyntheticTaskSpec {
  SyntheticKind kind = SyntheticKind::kCipherReverse;
  int vocab_size = 50;  // content tokens
  int min_length = 5;
  int max_length = 20;
  std::uint64_t seed = 1;  // drives sentence sampling
  std::uint64_t cipher_seed = 7;  // drives the permutation
  std::size_t train_size = 10000;
  std::size_t dev_size = 500;
  std::size_t test_size = 500;
};

// Content tokens of a synthetic task: two-letter words, id order.
Vocabulary synthetic_vocabulary(const SyntheticTaskSpec& spec);

// The substitution table over content ids used by the cipher kinds.
std::vector<TokenId> cipher_permutation(const SyntheticTaskSpec& spec);

// The exact mapping the synthetic corpus encodes. Useful as a perfect translator.
TokenSeq oracle_translate(const SyntheticTaskSpec& spec, const TokenSeq& source);

// Deterministic in spec. Dev and test sources never occur in train.
ParallelCorpus generate_synthetic(const SyntheticTaskSpec& spec);

// Line-aligned parallel text files. Lines are whitespace-tokenized through vocab.
std::vector<SentencePair> load_corpus(const std::filesystem::path& source_path,
                                      const std::filesystem::path& target_path, const Vocabulary& vocab);

void write_corpus(const std::vector<SentencePair>& pairs, const Vocabulary& vocab,
                  const std::filesystem::path& source_path, const std::filesystem::path& target_path);

const SentencePair& sample_training_pair(const ParallelCorpus& corpus, std::mt19937_64& rng);

}  // namespace madrl
