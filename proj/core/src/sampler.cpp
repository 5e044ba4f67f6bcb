#include "madrl/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "madrl/shaping.hpp"

namespace madrl {

TemperatureGrid::TemperatureGrid(double t_min, double t_max, int n) {
  if (n < 2) throw std::invalid_argument("temperature grid needs n >= 2");
  if (!(t_min > 0.0)) throw std::invalid_argument("temperature grid t_min must be > 0");
  if (!(t_max >= t_min) || !std::isfinite(t_max)) throw std::invalid_argument("temperature grid needs t_max >= t_min");
  values_.resize(static_cast<std::size_t>(n));
  const double step = (t_max - t_min) / (n - 1);
  for (int i = 0; i < n; ++i) values_[static_cast<std::size_t>(i)] = t_min + i * step;
  values_.back() = t_max;
}

TemperatureGrid TemperatureGrid::constant(double t, int n) {
  if (n < 1) throw std::invalid_argument("temperature grid needs n >= 1");
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("temperature must be > 0");
  TemperatureGrid g;
  g.values_.assign(static_cast<std::size_t>(n), t);
  return g;
}

CandidateSet generate_candidates(const PolicyParams& params, const TokenSeq& source, const TokenSeq& reference,
                                 const TemperatureGrid& grid, const RewardFunction& reward, std::mt19937_64& rng,
                                 std::uint64_t version) {
  if (reference.empty()) throw std::invalid_argument("generate_candidates: empty reference");
  CandidateSet cs;
  cs.source = source;
  cs.reference = reference;
  cs.version = version;
  auto samples = sample_temperatures(params, source, grid.values(), rng);
  cs.samples_drawn = static_cast<int>(samples.size());
  for (auto& s : samples) {
    if (std::find(cs.candidates.begin(), cs.candidates.end(), s.tokens) != cs.candidates.end()) continue;
    cs.rewards.push_back(reward(s.tokens, reference));
    cs.q.push_back(s.log_prob);
    cs.truncated.push_back(s.truncated ? 1 : 0);
    cs.candidates.push_back(std::move(s.tokens));
  }
  return cs;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty vector");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<double> mad_factors(std::span<const double> q) {
  if (q.empty()) throw std::invalid_argument("mad_factors: empty input");
  const double med = median(std::vector<double>(q.begin(), q.end()));
  std::vector<double> dev(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) dev[i] = std::abs(q[i] - med);
  const double mad = median(dev);
  std::vector<double> v(q.size(), 1.0);
  if (mad < kMadEpsilon) return v;
  // Far outliers would underflow to 0; keep them strictly positive.
  for (std::size_t i = 0; i < q.size(); ++i) v[i] = std::max(std::exp(-dev[i] / mad), kMinMadFactor);
  return v;
}

std::vector<Trajectory> build_trajectories(const CandidateSet& cs, const TrajectoryOptions& opts) {
  std::vector<double> r_bar = cs.rewards;
  if (opts.conditional_norm) {
    auto standardized = conditional_standardize(cs.rewards);
    if (!standardized) return {};
    r_bar = std::move(*standardized);
  }
  if (cs.candidates.empty()) return {};
  const auto v = opts.mad_weights ? mad_factors(cs.q) : std::vector<double>(cs.q.size(), 1.0);
  std::vector<Trajectory> out;
  out.reserve(cs.candidates.size());
  for (std::size_t i = 0; i < cs.candidates.size(); ++i) {
    Trajectory t;
    t.source = cs.source;
    t.target = cs.candidates[i];
    t.q = cs.q[i];
    t.r_bar = r_bar[i];
    t.v = v[i];
    t.reward = cs.rewards[i];
    t.version = cs.version;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace madrl
