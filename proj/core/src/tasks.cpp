#include "madrl/tasks.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

namespace madrl {
namespace {

bool valid_utf8(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    if (c < 0x80) {
      extra = 0;
    } else if ((c >> 5) == 0x6) {
      extra = 1;
      if (c < 0xC2) return false;
    } else if ((c >> 4) == 0xE) {
      extra = 2;
    } else if ((c >> 3) == 0x1E && c <= 0xF4) {
      extra = 3;
    } else {
      return false;
    }
    if (i + extra >= s.size() && extra > 0) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += extra + 1;
  }
  return true;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!valid_utf8(line)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lines.size() + 1) + ": malformed UTF-8");
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

SyntheticKind parse_synthetic_kind(const std::string& name) {
  if (name == "copy") return SyntheticKind::kCopy;
  if (name == "reverse") return SyntheticKind::kReverse;
  if (name == "cipher") return SyntheticKind::kCipher;
  if (name == "cipher-reverse") return SyntheticKind::kCipherReverse;
  throw std::invalid_argument("unknown synthetic task kind '" + name + "'");
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kCopy: return "copy";
    case SyntheticKind::kReverse: return "reverse";
    case SyntheticKind::kCipher: return "cipher";
    case SyntheticKind::kCipherReverse: return "cipher-reverse";
  }
  return "unknown";
}

Vocabulary synthetic_vocabulary(const SyntheticTaskSpec& spec) {
  if (spec.vocab_size < 1 || spec.vocab_size > 26 * 26) {
    throw std::invalid_argument("synthetic vocab_size must be in [1, 676]");
  }
  std::vector<std::string> words;
  words.reserve(static_cast<std::size_t>(spec.vocab_size));
  for (int i = 0; i < spec.vocab_size; ++i) {
    words.push_back(std::string{static_cast<char>('a' + i / 26), static_cast<char>('a' + i % 26)});
  }
  return Vocabulary::from_tokens(words);
}

std::vector<TokenId> cipher_permutation(const SyntheticTaskSpec& spec) {
  std::vector<TokenId> perm(static_cast<std::size_t>(spec.vocab_size));
  std::iota(perm.begin(), perm.end(), kNumReserved);
  std::mt19937_64 rng(spec.cipher_seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

TokenSeq oracle_translate(const SyntheticTaskSpec& spec, const TokenSeq& source) {
  TokenSeq out = source;
  if (spec.kind == SyntheticKind::kCipher || spec.kind == SyntheticKind::kCipherReverse) {
    const auto perm = cipher_permutation(spec);
    for (auto& t : out) {
      if (t >= kNumReserved && t < kNumReserved + spec.vocab_size) t = perm[static_cast<std::size_t>(t - kNumReserved)];
    }
  }
  if (spec.kind == SyntheticKind::kReverse || spec.kind == SyntheticKind::kCipherReverse) {
    std::reverse(out.begin(), out.end());
  }
  return out;
}

ParallelCorpus generate_synthetic(const SyntheticTaskSpec& spec) {
  if (spec.min_length < 1 || spec.max_length < spec.min_length) {
    throw std::invalid_argument("synthetic length range [" + std::to_string(spec.min_length) + ", " +
                                std::to_string(spec.max_length) + "] is empty");
  }
  if (spec.vocab_size < 1) throw std::invalid_argument("synthetic vocab_size must be positive");
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> length_dist(spec.min_length, spec.max_length);
  std::uniform_int_distribution<TokenId> token_dist(kNumReserved, kNumReserved + spec.vocab_size - 1);
  const auto perm = cipher_permutation(spec);

  auto make_pair = [&]() {
    SentencePair pair;
    const int len = length_dist(rng);
    pair.source.resize(static_cast<std::size_t>(len));
    for (auto& t : pair.source) t = token_dist(rng);
    pair.target = pair.source;
    if (spec.kind == SyntheticKind::kCipher || spec.kind == SyntheticKind::kCipherReverse) {
      for (auto& t : pair.target) t = perm[static_cast<std::size_t>(t - kNumReserved)];
    }
    if (spec.kind == SyntheticKind::kReverse || spec.kind == SyntheticKind::kCipherReverse) {
      std::reverse(pair.target.begin(), pair.target.end());
    }
    return pair;
  };

  ParallelCorpus corpus;
  std::set<TokenSeq> train_sources;
  corpus.train.reserve(spec.train_size);
  for (std::size_t i = 0; i < spec.train_size; ++i) {
    corpus.train.push_back(make_pair());
    train_sources.insert(corpus.train.back().source);
  }
  // Held-out splits skip anything seen in train. Bounded retries keep tiny spaces from spinning.
  auto fill = [&](std::vector<SentencePair>& split, std::size_t n) {
    std::size_t attempts = 0;
    const std::size_t max_attempts = 100 * (n + 1);
    while (split.size() < n && attempts++ < max_attempts) {
      auto pair = make_pair();
      if (train_sources.count(pair.source) == 0) split.push_back(std::move(pair));
    }
  };
  fill(corpus.dev, spec.dev_size);
  fill(corpus.test, spec.test_size);
  return corpus;
}

std::vector<SentencePair> load_corpus(const std::filesystem::path& source_path,
                                      const std::filesystem::path& target_path, const Vocabulary& vocab) {
  const auto src = read_lines(source_path);
  const auto tgt = read_lines(target_path);
  if (src.size() != tgt.size()) {
    throw std::runtime_error("line count mismatch: " + source_path.string() + " has " + std::to_string(src.size()) +
                             " lines, " + target_path.string() + " has " + std::to_string(tgt.size()));
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    SentencePair pair{vocab.encode(src[i]), vocab.encode(tgt[i])};
    if (pair.source.empty() || pair.target.empty()) {
      throw std::runtime_error("empty sentence at line " + std::to_string(i + 1));
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void write_corpus(const std::vector<SentencePair>& pairs, const Vocabulary& vocab,
                  const std::filesystem::path& source_path, const std::filesystem::path& target_path) {
  std::ofstream src(source_path), tgt(target_path);
  if (!src || !tgt) throw std::runtime_error("cannot write corpus files");
  for (const auto& p : pairs) {
    src << vocab.decode(p.source) << '\n';
    tgt << vocab.decode(p.target) << '\n';
  }
}

const SentencePair& sample_training_pair(const ParallelCorpus& corpus, std::mt19937_64& rng) {
  if (corpus.train.empty()) throw std::invalid_argument("training split is empty");
  std::uniform_int_distribution<std::size_t> pick(0, corpus.train.size() - 1);
  return corpus.train[pick(rng)];
}

}  // namespace madrl
