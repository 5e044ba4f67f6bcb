#include "madrl/runtime/trainer.hpp"

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace madrl {
namespace {

using Clock = std::chrono::steady_clock;

class StatsWindow {
 public:
  void add(const ObjectiveStats& s) {
    ++n_;
    reward_ += s.mean_reward;
    rbar_ += s.mean_rbar;
    u_ += s.mean_u;
    v_ += s.mean_v;
    w_ += s.mean_w;
    clip_ += s.clip_frac;
  }
  void fill(MetricsRow& row) {
    if (n_ > 0) {
      const double n = static_cast<double>(n_);
      row.mean_reward = reward_ / n;
      row.mean_rbar = rbar_ / n;
      row.mean_u = u_ / n;
      row.mean_v = v_ / n;
      row.mean_w = w_ / n;
      row.clip_frac = clip_ / n;
    }
    *this = {};
  }

 private:
  std::uint64_t n_ = 0;
  double reward_ = 0, rbar_ = 0, u_ = 0, v_ = 0, w_ = 0, clip_ = 0;
};

LearnerConfig learner_config(const TrainConfig& cfg) {
  LearnerConfig l;
  l.algorithm = cfg.algorithm;
  l.mad.batch_norm = cfg.reward_norm == RewardNorm::kBatch;
  l.mad.mad_weights = cfg.mad_weights;
  l.ppo = cfg.ppo;
  l.mrt = cfg.mrt;
  l.optimizer = cfg.optimizer;
  l.dropout = cfg.dropout;
  l.publish_period = cfg.publish_period;
  l.seed = cfg.seed;
  return l;
}

WorkerConfig worker_config(const TrainConfig& cfg) {
  WorkerConfig w;
  w.grid = cfg.grid();
  // PPO normalizes over the batch on the learner; MAD's batch ablation does the same.
  w.trajectory.conditional_norm = cfg.algorithm == Algorithm::kMad && cfg.reward_norm == RewardNorm::kConditional;
  w.trajectory.mad_weights = cfg.algorithm == Algorithm::kMad && cfg.mad_weights;
  w.seed = cfg.seed;
  return w;
}

// Shared bookkeeping for evaluation rows, best-checkpoint tracking and stop.
struct Recorder {
  const TrainConfig& cfg;
  const TrainHooks& hooks;
  Evaluator evaluator;
  TrainResult& result;
  Clock::time_point t0 = Clock::now();
  StatsWindow window;
  double unique_mean = 0.0;
  std::mutex mu;

  Recorder(const TrainConfig& c, const TrainHooks& h, const ParallelCorpus& corpus, const Vocabulary& vocab,
           TrainResult& r)
      : cfg(c), hooks(h), evaluator(corpus.dev, c.evaluator), result(r) {
    // Keep the checkpoint that is best on the metric being optimized.
    if (cfg.reward != RewardSpec::single("bleu")) evaluator.select_on(RewardFunction(cfg.reward, vocab));
  }

  // Evaluates params and appends a metrics row. Thread-safe.
  void evaluate(const PolicyParams& params, std::uint64_t step, std::uint64_t version, std::uint64_t queue_size,
                const ProducerStats& producer_window) {
    const EvalPoint point = evaluator.evaluate(params, step, version);
    std::lock_guard lock(mu);
    if (result.run.record(point, cfg.evaluator.patience)) result.best_params = params;
    MetricsRow row;
    row.step = step;
    row.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
    row.dev_bleu = point.dev_bleu;
    row.greedy_beam_gap = point.greedy_beam_gap;
    window.fill(row);
    if (producer_window.sources > 0) unique_mean = producer_window.mean_unique();
    row.unique_samples = unique_mean;
    row.queue_size = queue_size;
    row.ckpt_version = version;
    result.rows.push_back(row);
    if (hooks.on_row) hooks.on_row(row);
  }

  void add_step(const LearnerStepInfo& info) {
    std::lock_guard lock(mu);
    window.add(info.stats);
  }

  bool should_stop() {
    std::lock_guard lock(mu);
    return result.run.stop;
  }
};

void finish(TrainResult& result, const Learner& learner, const Recorder& rec) {
  result.final_params = learner.params();
  result.steps_done = learner.steps();
  result.skipped_steps = learner.skipped_steps();
  result.failed = learner.steps() > 0 &&
                  static_cast<double>(learner.skipped_steps()) > 0.01 * static_cast<double>(learner.steps());
  result.wall_s = std::chrono::duration<double>(Clock::now() - rec.t0).count();
}

void train_off_policy_deterministic(const PolicyParams& init, const ParallelCorpus& corpus,
                                    const RewardFunction& reward, const TrainConfig& cfg, Recorder& rec,
                                    TrainResult& result) {
  CheckpointBus bus;
  TrajectoryQueue queue(cfg.queue, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  ProducerStatsAccumulator producer;
  Learner learner(init, bus, learner_config(cfg));
  std::vector<std::unique_ptr<Worker>> workers;
  for (int w = 0; w < cfg.workers; ++w) {
    workers.push_back(std::make_unique<Worker>(w, bus, queue, corpus, reward, worker_config(cfg), &producer));
  }
  rec.evaluate(learner.params(), 0, learner.version(), queue.size(), producer.take_window());

  const std::size_t need = std::max<std::size_t>(cfg.queue.min_size_to_sample, static_cast<std::size_t>(cfg.batch_size));
  std::size_t next_worker = 0;
  int versions_since_eval = 0;
  while (learner.steps() < cfg.steps && !rec.should_stop()) {
    int barren = 0;
    while (queue.size() < need) {
      const int produced = workers[next_worker]->produce_one();
      next_worker = (next_worker + 1) % workers.size();
      barren = produced > 0 ? 0 : barren + 1;
      if (barren > 10000) throw std::runtime_error("workers produced no trajectories for 10000 sources");
    }
    auto res = queue.try_sample_batch(static_cast<std::size_t>(cfg.batch_size), learner.version());
    if (res.status != SampleStatus::kOk) continue;
    const auto info = learner.step(res.items);
    rec.add_step(info);
    if (info.published && ++versions_since_eval >= cfg.eval_every_versions) {
      versions_since_eval = 0;
      rec.evaluate(learner.params(), learner.steps(), learner.version(), queue.size(), producer.take_window());
    }
  }
  if (!rec.should_stop() && learner.publish_if_dirty()) {
    rec.evaluate(learner.params(), learner.steps(), learner.version(), queue.size(), producer.take_window());
  }
  result.producer = producer.total();
  result.queue = queue.counters();
  finish(result, learner, rec);
}

void train_off_policy_threaded(const PolicyParams& init, const ParallelCorpus& corpus, const RewardFunction& reward,
                               const TrainConfig& cfg, Recorder& rec, TrainResult& result) {
  CheckpointBus bus;
  TrajectoryQueue queue(cfg.queue, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  ProducerStatsAccumulator producer;
  Learner learner(init, bus, learner_config(cfg));
  std::vector<std::unique_ptr<Worker>> workers;
  for (int w = 0; w < cfg.workers; ++w) {
    workers.push_back(std::make_unique<Worker>(w, bus, queue, corpus, reward, worker_config(cfg), &producer));
  }
  std::atomic<bool> stop_workers{false};
  std::atomic<bool> learner_done{false};
  std::atomic<std::uint64_t> final_version{0};

  std::thread evaluator([&] {
    std::uint64_t next = 0;
    int versions_since_eval = 0;
    for (;;) {
      auto snap = bus.wait_for(next, std::chrono::milliseconds(100));
      if (!snap) {
        if (learner_done.load() && next > final_version.load()) return;
        continue;
      }
      next = snap->version + 1;
      const bool last = learner_done.load() && snap->version == final_version.load();
      if (snap->version == 0 || last || ++versions_since_eval >= cfg.eval_every_versions) {
        versions_since_eval = 0;
        rec.evaluate(snap->params, snap->step, snap->version, queue.size(), producer.take_window());
      }
      if (last) return;
    }
  });
  std::vector<std::thread> threads;
  for (auto& w : workers) threads.emplace_back([&, wp = w.get()] { wp->run(stop_workers); });

  while (learner.steps() < cfg.steps && !rec.should_stop()) {
    auto res = queue.sample_batch(static_cast<std::size_t>(cfg.batch_size), learner.version(),
                                  std::chrono::milliseconds(100));
    if (res.status == SampleStatus::kShutdown) break;
    if (res.status != SampleStatus::kOk) continue;
    rec.add_step(learner.step(res.items));
  }
  if (!rec.should_stop()) learner.publish_if_dirty();
  final_version.store(learner.version());
  learner_done.store(true);
  evaluator.join();
  stop_workers.store(true);
  queue.shutdown();
  for (auto& t : threads) t.join();
  result.producer = producer.total();
  result.queue = queue.counters();
  finish(result, learner, rec);
}

void train_on_policy(const PolicyParams& init, const ParallelCorpus& corpus, const RewardFunction& reward,
                     const TrainConfig& cfg, Recorder& rec, TrainResult& result) {
  CheckpointBus bus;
  ProducerStatsAccumulator producer;
  Learner learner(init, bus, learner_config(cfg));
  auto rng = derive_rng(cfg.seed, 100);
  rec.evaluate(learner.params(), 0, learner.version(), 0, producer.take_window());
  const double temp[1] = {cfg.temperature};
  const auto mrt_grid = TemperatureGrid::constant(cfg.temperature, cfg.mrt.sample_count);
  const int mrt_sources = std::max(1, cfg.batch_size / cfg.mrt.sample_count);
  int versions_since_eval = 0;
  while (learner.steps() < cfg.steps && !rec.should_stop()) {
    LearnerStepInfo info;
    if (cfg.algorithm == Algorithm::kReinforce) {
      std::vector<Trajectory> batch;
      for (int i = 0; i < cfg.batch_size; ++i) {
        const auto& pair = sample_training_pair(corpus, rng);
        auto s = sample_temperatures(learner.params(), pair.source, temp, rng).front();
        Trajectory t;
        t.source = pair.source;
        t.reward = reward(s.tokens, pair.target);
        t.q = s.log_prob;
        t.target = std::move(s.tokens);
        t.version = learner.version();
        CandidateSet single;
        single.candidates.push_back(t.target);
        single.samples_drawn = 1;
        single.truncated.push_back(s.truncated ? 1 : 0);
        producer.add(single, 1);
        batch.push_back(std::move(t));
      }
      info = learner.step(batch);
    } else {
      std::vector<CandidateSet> sets;
      for (int i = 0; i < mrt_sources; ++i) {
        const auto& pair = sample_training_pair(corpus, rng);
        sets.push_back(generate_candidates(learner.params(), pair.source, pair.target, mrt_grid, reward, rng,
                                           learner.version()));
        producer.add(sets.back(), sets.back().candidates.size() >= 2 ? sets.back().candidates.size() : 0);
      }
      info = learner.step(sets);
    }
    rec.add_step(info);
    if (info.published && ++versions_since_eval >= cfg.eval_every_versions) {
      versions_since_eval = 0;
      rec.evaluate(learner.params(), learner.steps(), learner.version(), 0, producer.take_window());
    }
  }
  if (!rec.should_stop() && learner.publish_if_dirty()) {
    rec.evaluate(learner.params(), learner.steps(), learner.version(), 0, producer.take_window());
  }
  result.producer = producer.total();
  finish(result, learner, rec);
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (publish_period < 1) throw std::invalid_argument("publish_period must be >= 1");
  if (eval_every_versions < 1) throw std::invalid_argument("eval_every_versions must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (n_samples < 2) throw std::invalid_argument("n_samples must be >= 2");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  reward.validate();
  ppo.validate();
  mrt.validate();
  queue.validate();
  optimizer.validate();
  (void)grid();
}

TemperatureGrid TrainConfig::grid() const {
  if (algorithm == Algorithm::kMad) return TemperatureGrid(t_min, t_max, n_samples);
  return TemperatureGrid::constant(temperature, algorithm == Algorithm::kMrt ? mrt.sample_count : n_samples);
}

TrainResult train(const PolicyParams& init, const ParallelCorpus& corpus, const Vocabulary& vocab,
                  const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (corpus.train.empty()) throw std::invalid_argument("train: empty training split");
  TrainResult result;
  result.best_params = init;
  Recorder rec(cfg, hooks, corpus, vocab, result);
  const RewardFunction reward(cfg.reward, vocab);
  if (is_on_policy(cfg.algorithm)) {
    train_on_policy(init, corpus, reward, cfg, rec, result);
  } else if (cfg.threaded) {
    train_off_policy_threaded(init, corpus, reward, cfg, rec, result);
  } else {
    train_off_policy_deterministic(init, corpus, reward, cfg, rec, result);
  }
  return result;
}

double measure_worker_throughput(const PolicyParams& params, const ParallelCorpus& corpus, const Vocabulary& vocab,
                                 const TrainConfig& cfg, int workers, double seconds) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  CheckpointBus bus;
  bus.publish(params, 0);
  QueueConfig qc = cfg.queue;
  qc.min_size_to_sample = qc.capacity;
  TrajectoryQueue queue(qc, cfg.seed);
  const RewardFunction reward(cfg.reward, vocab);
  std::vector<std::unique_ptr<Worker>> pool;
  for (int w = 0; w < workers; ++w) {
    pool.push_back(std::make_unique<Worker>(w, bus, queue, corpus, reward, worker_config(cfg)));
  }
  std::atomic<bool> stop{false};
  const auto t0 = Clock::now();
  std::vector<std::thread> threads;
  for (auto& w : pool) threads.emplace_back([&, wp = w.get()] { wp->run(stop); });
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  stop.store(true);
  for (auto& t : threads) t.join();
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  std::uint64_t produced = 0;
  for (const auto& w : pool) produced += w->produced();
  return static_cast<double>(produced) / elapsed;
}

}  // namespace madrl
