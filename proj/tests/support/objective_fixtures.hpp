#pragma once

#include <random>
#include <vector>

#include "madrl/sampler.hpp"
#include "support/tiny_models.hpp"

namespace testutil {

// Trajectories with behavior log-probs from a perturbed copy of the policy,
// so staleness ratios spread around 1.
inline std::vector<madrl::Trajectory> stale_batch(const madrl::PolicyParams& p, std::mt19937_64& rng, int size,
                                                  double staleness = 0.3) {
  std::normal_distribution<double> noise(0.0, staleness);
  std::uniform_real_distribution<double> reward(0.0, 100.0);
  std::uniform_real_distribution<double> vdist(0.05, 1.0);
  std::vector<madrl::Trajectory> out;
  const int content = p.config.vocab_size - madrl::kNumReserved;
  for (int i = 0; i < size; ++i) {
    madrl::Trajectory t;
    t.source = random_content(rng, content, 1, 4);
    t.target = random_content(rng, content, 0, 3);
    if (i % 4 != 3) t.target.push_back(madrl::kEosId);
    t.q = madrl::sequence_log_prob(p, t.source, t.target) + noise(rng);
    t.reward = reward(rng);
    t.r_bar = (t.reward - 50.0) / 30.0;
    t.v = vdist(rng);
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<madrl::CandidateSet> candidate_sets(std::mt19937_64& rng, int content, int sets, int per_set) {
  std::uniform_real_distribution<double> reward(0.0, 100.0);
  std::vector<madrl::CandidateSet> out;
  for (int s = 0; s < sets; ++s) {
    madrl::CandidateSet cs;
    cs.source = random_content(rng, content, 1, 4);
    while (static_cast<int>(cs.candidates.size()) < per_set) {
      auto y = terminated(random_content(rng, content, 0, 3));
      if (std::find(cs.candidates.begin(), cs.candidates.end(), y) != cs.candidates.end()) continue;
      cs.candidates.push_back(y);
      cs.rewards.push_back(reward(rng));
      cs.q.push_back(0.0);
      cs.truncated.push_back(0);
    }
    out.push_back(std::move(cs));
  }
  return out;
}

}  // namespace testutil
