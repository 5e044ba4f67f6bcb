#include "madrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace madrl {
namespace {

template <class T>
using Ngram = std::span<const T>;

template <class T>
std::vector<Ngram<T>> sorted_ngrams(std::span<const T> seq, int n) {
  std::vector<Ngram<T>> out;
  const auto len = static_cast<int>(seq.size());
  if (n <= 0 || len < n) return out;
  out.reserve(static_cast<std::size_t>(len - n + 1));
  for (int i = 0; i + n <= len; ++i) out.push_back(seq.subspan(static_cast<std::size_t>(i), static_cast<std::size_t>(n)));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  });
  return out;
}

// Size of the multiset intersection of two sorted n-gram lists.
template <class T>
std::size_t clipped_matches(const std::vector<Ngram<T>>& a, const std::vector<Ngram<T>>& b) {
  std::size_t i = 0, j = 0, matches = 0;
  auto less = [](const Ngram<T>& x, const Ngram<T>& y) {
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  };
  while (i < a.size() && j < b.size()) {
    if (less(a[i], b[j])) {
      ++i;
    } else if (less(b[j], a[i])) {
      ++j;
    } else {
      ++matches;
      ++i;
      ++j;
    }
  }
  return matches;
}

struct NgramStats {
  std::vector<std::size_t> matches;
  std::vector<std::size_t> hyp_totals;
  std::vector<std::size_t> ref_totals;
};

NgramStats ngram_stats(std::span<const TokenId> hyp, std::span<const TokenId> ref, int max_order) {
  NgramStats st;
  for (int n = 1; n <= max_order; ++n) {
    const auto h = sorted_ngrams(hyp, n);
    const auto r = sorted_ngrams(ref, n);
    st.matches.push_back(clipped_matches(h, r));
    st.hyp_totals.push_back(h.size());
    st.ref_totals.push_back(r.size());
  }
  return st;
}

void require_reference(std::size_t ref_size, const char* metric) {
  if (ref_size == 0) throw std::invalid_argument(std::string(metric) + ": empty reference");
}

std::u32string to_codepoints_without_space(std::string_view s, bool keep_whitespace) {
  std::u32string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    char32_t cp;
    std::size_t extra;
    if (c < 0x80) {
      cp = c;
      extra = 0;
    } else if ((c >> 5) == 0x6) {
      cp = c & 0x1F;
      extra = 1;
    } else if ((c >> 4) == 0xE) {
      cp = c & 0x0F;
      extra = 2;
    } else {
      cp = c & 0x07;
      extra = 3;
    }
    for (std::size_t k = 1; k <= extra && i + k < s.size(); ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    i += extra + 1;
    if (!keep_whitespace && (cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r')) continue;
    out.push_back(cp);
  }
  return out;
}

double ter_edits_with_shifts(std::vector<TokenId> hyp, std::span<const TokenId> ref, const MetricConfig& cfg) {
  int current = edit_distance(hyp, ref);
  int shifts = 0;
  const auto n = static_cast<int>(hyp.size());
  std::vector<TokenId> candidate(hyp.size());
  while (cfg.ter_shifts && shifts < cfg.ter_max_shifts && current > 0) {
    int best_delta = 0;
    std::vector<TokenId> best;
    for (int start = 0; start < n; ++start) {
      for (int len = 1; len <= cfg.ter_max_shift_size && start + len <= n; ++len) {
        auto phrase = std::span<const TokenId>(hyp).subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(len));
        // Only phrases that occur in the reference are worth moving.
        if (std::search(ref.begin(), ref.end(), phrase.begin(), phrase.end()) == ref.end()) break;
        std::vector<TokenId> remaining;
        remaining.reserve(hyp.size());
        remaining.insert(remaining.end(), hyp.begin(), hyp.begin() + start);
        remaining.insert(remaining.end(), hyp.begin() + start + len, hyp.end());
        for (int dest = 0; dest + len <= n; ++dest) {
          if (dest == start) continue;
          auto out = std::copy(remaining.begin(), remaining.begin() + dest, candidate.begin());
          out = std::copy(phrase.begin(), phrase.end(), out);
          std::copy(remaining.begin() + dest, remaining.end(), out);
          const int delta = current - edit_distance(candidate, ref);
          if (delta > best_delta) {
            best_delta = delta;
            best = candidate;
          }
        }
      }
    }
    if (best_delta <= 0) break;
    hyp = std::move(best);
    current -= best_delta;
    ++shifts;
  }
  return static_cast<double>(shifts + current);
}

}  // namespace

void MetricConfig::validate() const {
  if (bleu_max_order < 1 || gleu_max_order < 1 || chrf_order < 1) {
    throw std::invalid_argument("metric n-gram orders must be >= 1");
  }
  if (!(chrf_beta > 0.0)) throw std::invalid_argument("chrf beta must be > 0");
  if (ter_max_shifts < 0 || ter_max_shift_size < 1) throw std::invalid_argument("invalid TER shift limits");
}

double sentence_bleu(std::span<const TokenId> hyp_in, std::span<const TokenId> ref_in, const MetricConfig& cfg) {
  const auto hyp = strip_eos(hyp_in);
  const auto ref = strip_eos(ref_in);
  require_reference(ref.size(), "sentence_bleu");
  if (hyp.empty()) return 0.0;
  const auto st = ngram_stats(hyp, ref, cfg.bleu_max_order);

  double log_sum = 0.0;
  int effective_order = 0;
  double smooth = 1.0;
  for (int n = 0; n < cfg.bleu_max_order; ++n) {
    const auto total = st.hyp_totals[static_cast<std::size_t>(n)];
    if (total == 0) break;
    effective_order = n + 1;
    const auto matches = st.matches[static_cast<std::size_t>(n)];
    double precision;
    if (matches == 0) {
      if (cfg.smoothing != BleuSmoothing::kExp) return 0.0;
      smooth *= 2.0;
      precision = 1.0 / (smooth * static_cast<double>(total));
    } else {
      precision = static_cast<double>(matches) / static_cast<double>(total);
    }
    log_sum += std::log(precision);
  }
  const double hyp_len = static_cast<double>(hyp.size());
  const double ref_len = static_cast<double>(ref.size());
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_sum / effective_order);
}

double sentence_gleu(std::span<const TokenId> hyp_in, std::span<const TokenId> ref_in, const MetricConfig& cfg) {
  const auto hyp = strip_eos(hyp_in);
  const auto ref = strip_eos(ref_in);
  require_reference(ref.size(), "sentence_gleu");
  if (hyp.empty()) return 0.0;
  const auto st = ngram_stats(hyp, ref, cfg.gleu_max_order);
  std::size_t matches = 0, hyp_total = 0, ref_total = 0;
  for (int n = 0; n < cfg.gleu_max_order; ++n) {
    matches += st.matches[static_cast<std::size_t>(n)];
    hyp_total += st.hyp_totals[static_cast<std::size_t>(n)];
    ref_total += st.ref_totals[static_cast<std::size_t>(n)];
  }
  const double m = static_cast<double>(matches);
  return 100.0 * std::min(m / static_cast<double>(hyp_total), m / static_cast<double>(ref_total));
}

double sentence_chrf(std::string_view hyp_text, std::string_view ref_text, const MetricConfig& cfg) {
  const auto hyp = to_codepoints_without_space(hyp_text, cfg.chrf_whitespace);
  const auto ref = to_codepoints_without_space(ref_text, cfg.chrf_whitespace);
  require_reference(ref.size(), "sentence_chrf");
  if (hyp.empty()) return 0.0;
  const std::span<const char32_t> h(hyp), r(ref);
  double precision_sum = 0.0, recall_sum = 0.0;
  int effective = 0;
  for (int n = 1; n <= cfg.chrf_order; ++n) {
    const auto hn = sorted_ngrams(h, n);
    const auto rn = sorted_ngrams(r, n);
    if (hn.empty() || rn.empty()) continue;
    const auto m = static_cast<double>(clipped_matches(hn, rn));
    precision_sum += m / static_cast<double>(hn.size());
    recall_sum += m / static_cast<double>(rn.size());
    ++effective;
  }
  if (effective == 0) return 0.0;
  const double p = precision_sum / effective;
  const double rc = recall_sum / effective;
  if (p <= 0.0 && rc <= 0.0) return 0.0;
  const double b2 = cfg.chrf_beta * cfg.chrf_beta;
  return 100.0 * (1.0 + b2) * p * rc / (b2 * p + rc);
}

int edit_distance(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double sentence_ter(std::span<const TokenId> hyp_in, std::span<const TokenId> ref_in, const MetricConfig& cfg) {
  const auto hyp = strip_eos(hyp_in);
  const auto ref = strip_eos(ref_in);
  require_reference(ref.size(), "sentence_ter");
  const double edits = ter_edits_with_shifts(std::vector<TokenId>(hyp.begin(), hyp.end()), ref, cfg);
  return edits / static_cast<double>(ref.size());
}

double token_f1(std::span<const TokenId> hyp_in, std::span<const TokenId> ref_in) {
  const auto hyp = strip_eos(hyp_in);
  const auto ref = strip_eos(ref_in);
  require_reference(ref.size(), "token_f1");
  if (hyp.empty()) return 0.0;
  const auto common = static_cast<double>(clipped_matches(sorted_ngrams(hyp, 1), sorted_ngrams(ref, 1)));
  if (common == 0.0) return 0.0;
  const double p = common / static_cast<double>(hyp.size());
  const double r = common / static_cast<double>(ref.size());
  return 100.0 * 2.0 * p * r / (p + r);
}

double corpus_bleu(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs, const MetricConfig& cfg) {
  if (hyps.size() != refs.size()) {
    throw std::invalid_argument("corpus_bleu: " + std::to_string(hyps.size()) + " hypotheses vs " +
                                std::to_string(refs.size()) + " references");
  }
  if (hyps.empty()) throw std::invalid_argument("corpus_bleu: empty corpus");
  const auto order = static_cast<std::size_t>(cfg.bleu_max_order);
  std::vector<double> matches(order, 0.0), totals(order, 0.0);
  double hyp_len = 0.0, ref_len = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const auto h = strip_eos(hyps[i]);
    const auto r = strip_eos(refs[i]);
    require_reference(r.size(), "corpus_bleu");
    hyp_len += static_cast<double>(h.size());
    ref_len += static_cast<double>(r.size());
    const auto st = ngram_stats(h, r, cfg.bleu_max_order);
    for (std::size_t n = 0; n < order; ++n) {
      matches[n] += static_cast<double>(st.matches[n]);
      totals[n] += static_cast<double>(st.hyp_totals[n]);
    }
  }
  double log_sum = 0.0;
  for (std::size_t n = 0; n < order; ++n) {
    if (matches[n] == 0.0 || totals[n] == 0.0) return 0.0;
    log_sum += std::log(matches[n] / totals[n]);
  }
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_sum / static_cast<double>(order));
}

RewardSpec RewardSpec::single(const std::string& metric) {
  RewardSpec spec{{{metric, 1.0}}, true};
  spec.validate();
  return spec;
}

RewardSpec RewardSpec::all() {
  const double w = 1.0 / 5.0;
  return RewardSpec{{{"bleu", w}, {"gleu", w}, {"chrf", w}, {"token_f1", w}, {"ter", w}}, true};
}

RewardSpec RewardSpec::parse(const std::string& text) {
  if (text == "all") return all();
  RewardSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    RewardComponent c;
    c.metric = item.substr(0, colon);
    if (colon != std::string::npos) {
      try {
        c.weight = std::stod(item.substr(colon + 1));
      } catch (const std::exception&) {
        throw std::invalid_argument("bad reward weight in '" + item + "'");
      }
    }
    spec.components.push_back(c);
  }
  spec.validate();
  return spec;
}

std::string RewardSpec::to_string() const {
  if (*this == all()) return "all";
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (i) out << ',';
    out << components[i].metric;
    if (components[i].weight != 1.0 || components.size() > 1) out << ':' << components[i].weight;
  }
  return out.str();
}

bool RewardSpec::uses(const std::string& metric) const {
  return std::any_of(components.begin(), components.end(), [&](const auto& c) { return c.metric == metric; });
}

void RewardSpec::validate() const {
  if (components.empty()) throw std::invalid_argument("reward spec needs at least one component");
  for (const auto& c : components) {
    if (c.metric != "bleu" && c.metric != "gleu" && c.metric != "chrf" && c.metric != "ter" &&
        c.metric != "token_f1") {
      throw std::invalid_argument("unknown reward metric '" + c.metric + "'");
    }
    if (!std::isfinite(c.weight)) throw std::invalid_argument("reward weight for '" + c.metric + "' is not finite");
  }
}

double composite_reward(std::span<const TokenId> hyp, std::span<const TokenId> ref, const RewardSpec& spec,
                        const Vocabulary& vocab, const MetricConfig& cfg) {
  spec.validate();
  double total = 0.0;
  for (const auto& c : spec.components) {
    double value = 0.0;
    if (c.metric == "bleu") {
      value = sentence_bleu(hyp, ref, cfg);
    } else if (c.metric == "gleu") {
      value = sentence_gleu(hyp, ref, cfg);
    } else if (c.metric == "chrf") {
      value = sentence_chrf(vocab.decode(hyp), vocab.decode(ref), cfg);
    } else if (c.metric == "token_f1") {
      value = token_f1(hyp, ref);
    } else {
      value = 100.0 * sentence_ter(hyp, ref, cfg);
      if (spec.negate_ter) value = -value;
    }
    total += c.weight * value;
  }
  return total;
}

RewardFunction::RewardFunction(RewardSpec spec, const Vocabulary& vocab, MetricConfig cfg)
    : spec_(std::move(spec)), vocab_(&vocab), cfg_(cfg) {
  spec_.validate();
  cfg_.validate();
}

double RewardFunction::operator()(std::span<const TokenId> hyp, std::span<const TokenId> ref) const {
  return composite_reward(hyp, ref, spec_, *vocab_, cfg_);
}

}  // namespace madrl
