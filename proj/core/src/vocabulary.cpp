#include "madrl/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace madrl {
namespace {

const std::vector<std::string>& reserved_names() {
  static const std::vector<std::string> names = {"<pad>", "<s>", "</s>", "<unk>"};
  return names;
}

}  // namespace

Vocabulary::Vocabulary() : tokens_(reserved_names()) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<TokenId>(i));
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& content) {
  Vocabulary vocab;
  for (const auto& tok : content) {
    if (tok.empty() || tok.find_first_of(" \t\r\n") != std::string::npos) {
      throw std::invalid_argument("vocabulary token must be non-empty and whitespace-free: '" + tok + "'");
    }
    auto [it, inserted] = vocab.index_.emplace(tok, static_cast<TokenId>(vocab.tokens_.size()));
    if (!inserted) throw std::invalid_argument("duplicate vocabulary token '" + tok + "'");
    vocab.tokens_.push_back(tok);
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file " + path.string());
  std::vector<std::string> content;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    content.push_back(line);
  }
  return from_tokens(content);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file " + path.string());
  for (std::size_t i = kNumReserved; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }

TokenSeq Vocabulary::encode(std::string_view text) const {
  TokenSeq out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) out.push_back(id(word));
  return out;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId t : strip_eos(ids)) {
    if (!out.empty()) out.push_back(' ');
    out += token(t);
  }
  return out;
}

Vocabulary build_vocab(const std::vector<std::filesystem::path>& corpus_paths, std::size_t max_size) {
  struct Entry {
    std::size_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> freq;
  std::size_t order = 0;
  for (const auto& path : corpus_paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file " + path.string());
    std::string word;
    while (in >> word) {
      auto [it, inserted] = freq.try_emplace(word, Entry{0, order});
      if (inserted) ++order;
      ++it->second.count;
    }
  }
  const auto& reserved = reserved_names();
  std::vector<std::pair<std::string, Entry>> ranked;
  ranked.reserve(freq.size());
  for (auto& [word, entry] : freq) {
    if (std::find(reserved.begin(), reserved.end(), word) != reserved.end()) continue;
    ranked.emplace_back(word, entry);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first_seen < b.second.first_seen;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> content;
  content.reserve(ranked.size());
  for (auto& [word, entry] : ranked) content.push_back(word);
  return Vocabulary::from_tokens(content);
}

}  // namespace madrl
