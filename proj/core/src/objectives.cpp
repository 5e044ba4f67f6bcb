#include "madrl/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace madrl {
namespace {

std::vector<WeightedExample> examples_for(const std::vector<Trajectory>& batch) {
  std::vector<WeightedExample> ex;
  ex.reserve(batch.size());
  for (const auto& t : batch) ex.push_back({&t.source, &t.target, 0.0});
  return ex;
}

StepResult finish(const PolicyParams& params, std::vector<WeightedExample>& ex, double normalizer, bool dropout,
                  std::mt19937_64& rng, ObjectiveStats stats) {
  StepResult out;
  if (ex.empty()) {
    out.gradient = Gradient::zeros_like(params);
  } else {
    out.gradient = weighted_nll_grad(params, ex, normalizer, dropout, rng).gradient;
  }
  out.stats = stats;
  return out;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::vector<double> raw_rewards(const std::vector<Trajectory>& batch) {
  std::vector<double> r;
  r.reserve(batch.size());
  for (const auto& t : batch) r.push_back(t.reward);
  return r;
}

}  // namespace

double staleness_ratio(double p, double q) {
  const double d = p - q;
  if (d >= std::log(kStalenessCap)) return kStalenessCap;
  return std::exp(d);
}

double mad_loss_weight(double u, double v) { return std::min(u * v, kMadWeightCap); }

void PpoConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("ppo epsilon must be in (0, 1)");
}

void MrtConfig::validate() const {
  if (sample_count < 2) throw std::invalid_argument("mrt sample_count must be >= 2");
}

StepResult mad_step(const PolicyParams& params, const std::vector<Trajectory>& batch, const MadOptions& opts,
                    bool dropout, std::mt19937_64& rng) {
  auto ex = examples_for(batch);
  const auto p = batch_log_prob(params, ex);
  const auto raw = raw_rewards(batch);
  std::vector<double> r(batch.size());
  if (opts.batch_norm) {
    r = batch_zscore(raw);
  } else {
    for (std::size_t i = 0; i < batch.size(); ++i) r[i] = batch[i].r_bar;
  }
  std::vector<double> us, vs, ws;
  std::size_t truncated = 0;
  double objective = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double u = staleness_ratio(p[i], batch[i].q);
    const double v = opts.mad_weights ? batch[i].v : 1.0;
    const double w = mad_loss_weight(u, v);
    if (u * v > kMadWeightCap) ++truncated;
    us.push_back(u);
    vs.push_back(v);
    ws.push_back(w);
    ex[i].weight = w * r[i];
    objective += ex[i].weight * p[i];
  }
  ObjectiveStats s;
  s.count = batch.size();
  s.objective = batch.empty() ? 0.0 : objective / static_cast<double>(batch.size());
  s.mean_reward = mean(raw);
  s.mean_rbar = mean(r);
  s.mean_u = mean(us);
  s.mean_v = mean(vs);
  s.mean_w = mean(ws);
  s.max_w = ws.empty() ? 0.0 : *std::max_element(ws.begin(), ws.end());
  s.clip_frac = batch.empty() ? 0.0 : static_cast<double>(truncated) / static_cast<double>(batch.size());
  return finish(params, ex, static_cast<double>(std::max<std::size_t>(batch.size(), 1)), dropout, rng, s);
}

StepResult ppo_step(const PolicyParams& params, const std::vector<Trajectory>& batch, const PpoConfig& cfg,
                    bool dropout, std::mt19937_64& rng) {
  cfg.validate();
  auto ex = examples_for(batch);
  const auto p = batch_log_prob(params, ex);
  const auto raw = raw_rewards(batch);
  const auto r = batch_zscore(raw);
  std::vector<double> us;
  std::size_t clipped = 0;
  double objective = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double u = staleness_ratio(p[i], batch[i].q);
    const double unclipped = u * r[i];
    const double clipped_term = std::clamp(u, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon) * r[i];
    // d(u r)/d(theta) = u r d(log p)/d(theta) on the unclipped branch; the
    // clipped branch is constant in theta.
    if (unclipped <= clipped_term) {
      ex[i].weight = unclipped;
    } else {
      ex[i].weight = 0.0;
      ++clipped;
    }
    objective += std::min(unclipped, clipped_term);
    us.push_back(u);
  }
  ObjectiveStats s;
  s.count = batch.size();
  s.objective = batch.empty() ? 0.0 : objective / static_cast<double>(batch.size());
  s.mean_reward = mean(raw);
  s.mean_rbar = mean(r);
  s.mean_u = mean(us);
  s.mean_v = 1.0;
  s.mean_w = s.mean_u;
  s.max_w = us.empty() ? 0.0 : *std::max_element(us.begin(), us.end());
  s.clip_frac = batch.empty() ? 0.0 : static_cast<double>(clipped) / static_cast<double>(batch.size());
  return finish(params, ex, static_cast<double>(std::max<std::size_t>(batch.size(), 1)), dropout, rng, s);
}

StepResult mrt_step(const PolicyParams& params, const std::vector<CandidateSet>& sets, const MrtConfig& cfg,
                    bool dropout, std::mt19937_64& rng) {
  cfg.validate();
  std::vector<WeightedExample> ex;
  std::vector<std::size_t> set_of;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (sets[s].candidates.size() < 2) continue;
    for (const auto& c : sets[s].candidates) {
      ex.push_back({&sets[s].source, &c, 0.0});
      set_of.push_back(s);
    }
  }
  ObjectiveStats st;
  const auto p = batch_log_prob(params, ex);
  std::size_t used = 0;
  double objective = 0.0;
  std::vector<double> all_rewards;
  std::size_t k = 0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const auto& cs = sets[s];
    if (cs.candidates.size() < 2) {
      ++st.skipped;
      continue;
    }
    const std::size_t n = cs.candidates.size();
    const double top = *std::max_element(p.begin() + static_cast<std::ptrdiff_t>(k),
                                         p.begin() + static_cast<std::ptrdiff_t>(k + n));
    std::vector<double> pi(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += (pi[i] = std::exp(p[k + i] - top));
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pi[i] /= z;
      expected += pi[i] * cs.rewards[i];
      all_rewards.push_back(cs.rewards[i]);
    }
    for (std::size_t i = 0; i < n; ++i) ex[k + i].weight = pi[i] * (cs.rewards[i] - expected);
    objective += expected;
    ++used;
    k += n;
  }
  st.count = used;
  st.objective = used ? objective / static_cast<double>(used) : 0.0;
  st.mean_reward = mean(all_rewards);
  st.mean_u = st.mean_v = st.mean_w = 1.0;
  return finish(params, ex, static_cast<double>(std::max<std::size_t>(used, 1)), dropout, rng, st);
}

StepResult reinforce_step(const PolicyParams& params, const std::vector<Trajectory>& batch,
                          BaselineState& baseline, bool dropout, std::mt19937_64& rng) {
  auto ex = examples_for(batch);
  std::vector<double> adv;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto upd = baseline_update(baseline, batch[i].reward);
    baseline = upd.state;
    ex[i].weight = upd.advantage;
    adv.push_back(upd.advantage);
  }
  ObjectiveStats s;
  s.count = batch.size();
  s.mean_reward = mean(raw_rewards(batch));
  s.mean_rbar = mean(adv);
  s.mean_u = s.mean_v = s.mean_w = 1.0;
  return finish(params, ex, static_cast<double>(std::max<std::size_t>(batch.size(), 1)), dropout, rng, s);
}

}  // namespace madrl
