#include "madrl/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace madrl {

void BeamConfig::validate() const {
  if (beams < 1) throw std::invalid_argument("beam size must be >= 1");
  if (max_len < 1) throw std::invalid_argument("beam max_len must be >= 1");
  if (alpha && !std::isfinite(*alpha)) throw std::invalid_argument("beam alpha must be finite");
}

double beam_score(const Hypothesis& h, const std::optional<double>& alpha) {
  if (!alpha) return h.log_prob;
  const double len = std::max<std::size_t>(h.tokens.size(), 1);
  return h.log_prob / std::pow(len, *alpha);
}

std::vector<Hypothesis> greedy_search(DecodeSession& session, int max_len) {
  const int rows = session.rows();
  std::vector<Hypothesis> out(static_cast<std::size_t>(rows));
  std::vector<TokenId> prev(static_cast<std::size_t>(rows), kBosId);
  int alive = rows;
  for (int t = 0; t < max_len && alive > 0; ++t) {
    const Matrix lp = session.next_log_probs(prev);
    for (int r = 0; r < rows; ++r) {
      auto& h = out[static_cast<std::size_t>(r)];
      if (h.finished) {
        prev[static_cast<std::size_t>(r)] = kPadId;
        continue;
      }
      Eigen::Index best;
      const double v = lp.row(r).maxCoeff(&best);
      h.tokens.push_back(static_cast<TokenId>(best));
      h.log_prob += v;
      prev[static_cast<std::size_t>(r)] = static_cast<TokenId>(best);
      if (best == kEosId) {
        h.finished = true;
        --alive;
      }
    }
  }
  return out;
}

Hypothesis beam_search(DecodeSession& session, const BeamConfig& cfg) {
  cfg.validate();
  if (session.rows() != 1) throw std::invalid_argument("beam_search expects a single-row session");
  const int k = cfg.beams;
  const int vocab = session.vocab_size();

  std::vector<Hypothesis> alive(1);
  std::vector<Hypothesis> finished;
  std::vector<TokenId> prev = {kBosId};

  struct Candidate {
    double log_prob;
    int parent;
    TokenId token;
  };
  std::vector<Candidate> cands;

  for (int t = 0; t < cfg.max_len && !alive.empty(); ++t) {
    const Matrix lp = session.next_log_probs(prev);
    cands.clear();
    for (int r = 0; r < static_cast<int>(alive.size()); ++r) {
      for (int v = 0; v < vocab; ++v) {
        cands.push_back({alive[static_cast<std::size_t>(r)].log_prob + lp(r, v), r, static_cast<TokenId>(v)});
      }
    }
    const auto keep = std::min<std::size_t>(cands.size(), static_cast<std::size_t>(2 * k));
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Hypothesis> next;
    std::vector<int> parents;
    for (std::size_t i = 0; i < keep && static_cast<int>(next.size()) < k; ++i) {
      const auto& c = cands[i];
      Hypothesis h = alive[static_cast<std::size_t>(c.parent)];
      h.tokens.push_back(c.token);
      h.log_prob = c.log_prob;
      if (c.token == kEosId) {
        // Only top-k ranked terminations are finalized.
        if (i < static_cast<std::size_t>(k)) {
          h.finished = true;
          finished.push_back(std::move(h));
        }
        continue;
      }
      next.push_back(std::move(h));
      parents.push_back(c.parent);
    }
    if (static_cast<int>(finished.size()) >= k) break;
    if (!cfg.alpha && !finished.empty() && !next.empty()) {
      // Raw log-probs only decrease, so no alive row can beat the best finished one.
      double best_finished = -INFINITY;
      for (const auto& f : finished) best_finished = std::max(best_finished, f.log_prob);
      double best_alive = -INFINITY;
      for (const auto& a : next) best_alive = std::max(best_alive, a.log_prob);
      if (best_finished >= best_alive) break;
    }
    alive = std::move(next);
    if (alive.empty()) break;
    session.reorder(parents);
    prev.resize(alive.size());
    for (std::size_t r = 0; r < alive.size(); ++r) prev[r] = alive[r].tokens.back();
  }

  const auto& pool = finished.empty() ? alive : finished;
  if (pool.empty()) return Hypothesis{};
  const Hypothesis* best = &pool.front();
  for (const auto& h : pool) {
    if (beam_score(h, cfg.alpha) > beam_score(*best, cfg.alpha)) best = &h;
  }
  return *best;
}

std::vector<SampledSequence> sample_search(DecodeSession& session, std::span<const double> temperatures,
                                           int max_len, std::mt19937_64& rng) {
  const int rows = session.rows();
  if (static_cast<std::size_t>(rows) != temperatures.size()) {
    throw std::invalid_argument("sample_search: one temperature per session row required");
  }
  for (double temp : temperatures) {
    if (!(temp > 0.0)) throw std::invalid_argument("sampling temperature must be > 0");
  }
  std::vector<SampledSequence> out(static_cast<std::size_t>(rows));
  std::vector<char> done(static_cast<std::size_t>(rows), 0);
  std::vector<TokenId> prev(static_cast<std::size_t>(rows), kBosId);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> probs;
  int alive = rows;
  for (int t = 0; t < max_len && alive > 0; ++t) {
    const Matrix lp = session.next_log_probs(prev);
    probs.resize(static_cast<std::size_t>(lp.cols()));
    for (int r = 0; r < rows; ++r) {
      const auto ri = static_cast<std::size_t>(r);
      if (done[ri]) {
        prev[ri] = kPadId;
        continue;
      }
      const double temp = temperatures[ri];
      const double mx = lp.row(r).maxCoeff();
      double z = 0.0;
      for (Eigen::Index v = 0; v < lp.cols(); ++v) {
        probs[static_cast<std::size_t>(v)] = std::exp((lp(r, v) - mx) / temp);
        z += probs[static_cast<std::size_t>(v)];
      }
      const double u = unit(rng) * z;
      double acc = 0.0;
      TokenId choice = static_cast<TokenId>(lp.cols() - 1);
      for (Eigen::Index v = 0; v < lp.cols(); ++v) {
        acc += probs[static_cast<std::size_t>(v)];
        if (u < acc) {
          choice = static_cast<TokenId>(v);
          break;
        }
      }
      // Guard against landing on a zero-probability tail through rounding.
      while (probs[static_cast<std::size_t>(choice)] == 0.0 && choice > 0) --choice;
      auto& s = out[ri];
      s.tokens.push_back(choice);
      s.log_prob += lp(r, choice);
      prev[ri] = choice;
      if (choice == kEosId) {
        done[ri] = 1;
        --alive;
      }
    }
  }
  for (int r = 0; r < rows; ++r) {
    if (!done[static_cast<std::size_t>(r)]) out[static_cast<std::size_t>(r)].truncated = true;
  }
  return out;
}

}  // namespace madrl
