#include "criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "madrl/checkpoint.hpp"
#include "madrl/cli/commands.hpp"
#include "madrl/evaluation.hpp"
#include "madrl/metrics.hpp"
#include "madrl/objectives.hpp"
#include "madrl/pretrain.hpp"
#include "madrl/runtime/evaluator.hpp"
#include "madrl/runtime/metrics_log.hpp"
#include "madrl/runtime/trainer.hpp"
#include "madrl/sampler.hpp"
#include "madrl/shaping.hpp"
#include "madrl/tasks.hpp"
#include "support/enumerate.hpp"
#include "support/finite_diff.hpp"
#include "support/objective_fixtures.hpp"
#include "support/objective_oracles.hpp"
#include "support/oracles.hpp"
#include "support/queue_harness.hpp"
#include "support/random_seqs.hpp"
#include "support/tiny_models.hpp"

namespace acceptance {
namespace fs = std::filesystem;
using namespace madrl;

namespace {

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::kPass : Status::kFail, std::move(detail)}; }

oracle::Seq as_seq(const TokenSeq& s) { return {s.begin(), s.end()}; }

// ---------------------------------------------------------------------------
// 1-6: property and oracle suites

Outcome metric_oracles(const Options&) {
  std::mt19937_64 rng(1001);
  const int n = 1000;
  double bleu = 0, gleu = 0, chrf = 0, f1 = 0;
  int ter_mismatch = 0;
  for (int i = 0; i < n; ++i) {
    const auto h = testutil::random_seq(rng, 12, 1, 15);
    const auto r = testutil::random_seq(rng, 12, 1, 15);
    bleu = std::max(bleu, std::abs(sentence_bleu(h, r) - oracle::sentence_bleu(as_seq(h), as_seq(r))));
    gleu = std::max(gleu, std::abs(sentence_gleu(h, r) - oracle::sentence_gleu(as_seq(h), as_seq(r))));
    f1 = std::max(f1, std::abs(token_f1(h, r) - oracle::token_f1(as_seq(h), as_seq(r))));
    const auto hs = testutil::random_text(rng, 5, 1, 6);
    const auto rs = testutil::random_text(rng, 5, 1, 6);
    chrf = std::max(chrf, std::abs(sentence_chrf(hs, rs) - oracle::chrf(hs, rs)));
    const auto th = testutil::random_seq(rng, 4, 1, 6);
    const auto tr = testutil::random_seq(rng, 4, 1, 6);
    ter_mismatch += sentence_ter(th, tr) != oracle::ter(as_seq(th), as_seq(tr));
  }
  const bool ok = bleu <= 1e-9 && gleu <= 1e-9 && chrf <= 1e-9 && f1 <= 1e-9 && ter_mismatch == 0;
  return verdict(ok, fmt("n=%d max|err| bleu=%.1e gleu=%.1e chrf=%.1e f1=%.1e; TER mismatches=%d", n, bleu, gleu,
                         chrf, f1, ter_mismatch));
}

std::vector<double> random_rewards(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(2, 30);
  std::uniform_int_distribution<int> kind(0, 3);
  std::vector<double> r(len(rng));
  switch (kind(rng)) {
    case 0: {
      std::uniform_real_distribution<double> u(0.0, 100.0);
      for (auto& x : r) x = u(rng);
      break;
    }
    case 1: {
      std::normal_distribution<double> g(0.0, 1.0);
      for (auto& x : r) x = g(rng);
      break;
    }
    case 2: {  // many ties, one distinct value
      std::uniform_real_distribution<double> u(0.0, 100.0);
      std::fill(r.begin(), r.end(), u(rng));
      r[std::uniform_int_distribution<std::size_t>(0, r.size() - 1)(rng)] += 1.0 + u(rng);
      break;
    }
    default: {  // heavy tail
      std::cauchy_distribution<double> c(50.0, 5.0);
      for (auto& x : r) x = c(rng);
    }
  }
  return r;
}

Outcome conditional_normalization(const Options&) {
  std::mt19937_64 rng(2002);
  double worst_mean = 0, worst_std = 0, worst_affine = 0;
  int no_mix = 0, degenerate = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto r = random_rewards(rng);
    const auto z = conditional_standardize(r);
    if (!z) {
      ++degenerate;
      continue;
    }
    const auto m = population_moments(*z);
    worst_mean = std::max(worst_mean, std::abs(m.mean));
    worst_std = std::max(worst_std, std::abs(m.stddev - 1.0));
    const bool pos = std::any_of(z->begin(), z->end(), [](double x) { return x > 0; });
    const bool neg = std::any_of(z->begin(), z->end(), [](double x) { return x < 0; });
    no_mix += !(pos && neg);
    std::uniform_real_distribution<double> a(0.01, 100.0), b(-1000.0, 1000.0);
    const double sa = a(rng), sb = b(rng);
    std::vector<double> t(r.size());
    std::transform(r.begin(), r.end(), t.begin(), [&](double x) { return sa * x + sb; });
    const auto zt = conditional_standardize(t);
    if (!zt) {
      ++degenerate;
      continue;
    }
    for (std::size_t k = 0; k < z->size(); ++k) worst_affine = std::max(worst_affine, std::abs((*z)[k] - (*zt)[k]));
  }
  const bool ok = worst_mean <= 1e-9 && worst_std <= 1e-6 && no_mix == 0 && worst_affine <= 1e-9 && degenerate == 0;
  return verdict(ok, fmt("n=%d max|mean|=%.1e max|std-1|=%.1e unmixed=%d affine=%.1e degenerate=%d", n, worst_mean,
                         worst_std, no_mix, worst_affine, degenerate));
}

Outcome mad_weight_properties(const Options&) {
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<int> len(1, 24);
  std::normal_distribution<double> q_dist(-15.0, 6.0), drift(0.0, 1.5);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  double max_w = 0, worst_shift = 0;
  int v_out = 0, median_miss = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    std::vector<double> q(len(rng)), p(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
      q[k] = q_dist(rng);
      p[k] = q[k] + drift(rng) * (i % 5 == 0 ? 10.0 : 1.0);
    }
    const auto v = mad_factors(q);
    for (std::size_t k = 0; k < q.size(); ++k) {
      v_out += !(v[k] > 0.0 && v[k] <= 1.0);
      max_w = std::max(max_w, mad_loss_weight(staleness_ratio(p[k], q[k]), v[k]));
    }
    const double c = shift(rng);
    std::vector<double> qc(q);
    for (auto& x : qc) x += c;
    const auto vc = mad_factors(qc);
    for (std::size_t k = 0; k < q.size(); ++k) worst_shift = std::max(worst_shift, std::abs(v[k] - vc[k]));
    if (q.size() % 2 == 1) {
      const double med = median(q);
      for (std::size_t k = 0; k < q.size(); ++k) {
        if (q[k] == med && v[k] != 1.0) ++median_miss;
      }
    }
  }
  const std::vector<double> hand = {-1.0, -2.0, -3.0};
  const auto hv = mad_factors(hand);
  const double hand_err = std::max({std::abs(hv[0] - std::exp(-1.0)), std::abs(hv[1] - 1.0),
                                    std::abs(hv[2] - std::exp(-1.0))});
  const bool ok = max_w <= 2.0 && v_out == 0 && worst_shift <= 1e-9 && median_miss == 0 && hand_err <= 1e-12;
  return verdict(ok, fmt("n=%d max w=%.4f v outside (0,1]=%d shift=%.1e median!=1: %d hand=%.1e", n, max_w, v_out,
                         worst_shift, median_miss, hand_err));
}

Outcome gradient_checks(const Options&) {
  constexpr int kContent = 3, kHidden = 4, kTrials = 20;
  auto model = [](std::uint64_t seed) { return testutil::tiny_policy(kContent, kHidden, seed, 0.8); };
  double mad = 0, ppo = 0, mrt = 0, rf = 0;
  std::size_t params = 0;
  std::mt19937_64 rng(4004);
  for (int trial = 0; trial < kTrials; ++trial) {
    std::mt19937_64 drng(0);
    {
      const auto p = model(1000 + trial);
      params = p.parameter_count();
      const auto batch = testutil::stale_batch(p, rng, 6);
      const auto res = mad_step(p, batch, {}, false, drng);
      const auto alpha = oracle::mad_alpha(p, batch, true);
      std::vector<double> r;
      for (const auto& t : batch) r.push_back(t.r_bar);
      mad = std::max(mad, oracle::finite_difference_check(p, res.gradient, [&](const PolicyParams& q) {
                            return oracle::mad_objective(q, batch, alpha, r);
                          }).max_rel_error);
    }
    {
      const auto p = model(2000 + trial);
      const auto batch = testutil::stale_batch(p, rng, 6, 0.25);
      const auto res = ppo_step(p, batch, {0.2}, false, drng);
      ppo = std::max(ppo, oracle::finite_difference_check(p, res.gradient, [&](const PolicyParams& q) {
                            return oracle::ppo_objective(q, batch, 0.2);
                          }).max_rel_error);
    }
    {
      const auto p = model(3000 + trial);
      const auto sets = testutil::candidate_sets(rng, kContent, 3, 4);
      const auto res = mrt_step(p, sets, {5}, false, drng);
      mrt = std::max(mrt, oracle::finite_difference_check(p, res.gradient, [&](const PolicyParams& q) {
                            return oracle::mrt_objective(q, sets);
                          }).max_rel_error);
    }
    {
      const auto p = model(4000 + trial);
      const auto batch = testutil::stale_batch(p, rng, 6);
      BaselineState base{20.0, 0.99, 5}, probe = base;
      std::vector<double> baselines;
      for (const auto& t : batch) {
        baselines.push_back(probe.running_mean);
        probe = baseline_update(probe, t.reward).state;
      }
      const auto res = reinforce_step(p, batch, base, false, drng);
      rf = std::max(rf, oracle::finite_difference_check(p, res.gradient, [&](const PolicyParams& q) {
                          return oracle::reinforce_objective(q, batch, baselines);
                        }).max_rel_error);
    }
  }
  const bool ok = params <= 500 && std::max({mad, ppo, mrt, rf}) <= 1e-4;
  return verdict(ok, fmt("%zu params, %d batches each; max rel err mad=%.1e ppo=%.1e mrt=%.1e reinforce=%.1e", params,
                         kTrials, mad, ppo, mrt, rf));
}

Outcome policy_normalization(const Options&) {
  double worst = 0;
  std::size_t outcomes = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto p = testutil::tiny_policy(3, 4, seed, 1.5);
    for (const TokenSeq& src : {TokenSeq{4}, TokenSeq{6, 5}, TokenSeq{5, 6, 4}}) {
      double mass = 0.0;
      outcomes = 0;
      oracle::for_each_outcome(p.config.vocab_size, 3, [&](const TokenSeq& y) {
        mass += std::exp(sequence_log_prob(p, src, y));
        ++outcomes;
      });
      worst = std::max(worst, std::abs(mass - 1.0));
    }
  }
  return verdict(worst <= 1e-6, fmt("3 content tokens, max length 3, %zu outcomes per source; max|mass-1|=%.1e",
                                    outcomes, worst));
}

Outcome queue_semantics(const Options&) {
  oracle::QueueHarnessConfig cfg;
  cfg.items = 100000;
  cfg.producers = 4;
  const auto rep = oracle::run_queue_harness(cfg);
  const bool ok = rep.exactly_once && rep.fifo_eviction && rep.blocked_until_min && rep.capacity_respected &&
                  rep.max_size <= 4096 && rep.min_size_at_sample >= 512 && rep.problems.empty();
  auto detail = fmt("inserted=%zu delivered=%zu evicted=%zu max size=%zu min size at sample=%zu exactly-once=%d fifo=%d",
                    rep.inserted, rep.delivered, rep.evicted, rep.max_size, rep.min_size_at_sample, rep.exactly_once,
                    rep.fifo_eviction);
  if (!rep.problems.empty()) detail += "; first problem: " + rep.problems.front();
  return verdict(ok, detail);
}

// ---------------------------------------------------------------------------
// 7: determinism through the command-line driver

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"madrl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(const Options& opts) {
  const auto root = opts.work_dir / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  ::setenv(cli::kOutputRootEnv, root.c_str(), 1);
  const std::vector<std::string> common = {"--hidden_size", "16", "--dev_limit", "50", "--seed", "5"};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), common.begin(), common.end());
    return a;
  };
  if (run_cli(with({"pretrain", "--run_name", "ce", "--pretrain_steps", "200", "--pretrain_eval_every", "100"})) != 0) {
    return {Status::kFail, "pretrain failed"};
  }
  const auto ckpt = (root / "ce" / "best.ckpt").string();
  for (const char* name : {"a", "b"}) {
    if (run_cli(with({"train", "--algo", "mad", "--run_name", name, "--steps", "100", "--checkpoint", ckpt})) != 0) {
      return {Status::kFail, std::string("train run ") + name + " failed"};
    }
  }
  const auto a = file_bytes(root / "a" / "final.ckpt");
  const auto b = file_bytes(root / "b" / "final.ckpt");
  const auto step_a = load_checkpoint(root / "a" / "final.ckpt").step;
  auto rows_a = read_metrics_csv(root / "a" / "metrics.csv");
  auto rows_b = read_metrics_csv(root / "b" / "metrics.csv");
  bool rows_equal = rows_a.size() == rows_b.size();
  for (std::size_t i = 0; rows_equal && i < rows_a.size(); ++i) {
    rows_a[i].wall_s = rows_b[i].wall_s = 0.0;
    rows_equal = format_metrics_row(rows_a[i]) == format_metrics_row(rows_b[i]);
  }
  const bool ok = !a.empty() && a == b && step_a == 100 && rows_equal;
  return verdict(ok, fmt("checkpoint at step %llu: %zu bytes, identical=%d; metrics rows identical=%d",
                         static_cast<unsigned long long>(step_a), a.size(), a == b, rows_equal));
}

// ---------------------------------------------------------------------------
// 8-12: desk-scale experiment on cipher-reverse, shared by all five criteria

struct DeskSettings {
  // Small enough that CE plateaus well short of a perfect score, so there is
  // room to measure fine-tuning gains.
  int hidden = 6;
  int pretrain_max_steps = 150000;
  int pretrain_eval_every = 1000;
  int pretrain_patience = 25;  // also spans the initial unigram plateau
  double pretrain_lr = 3e-3;
  std::uint64_t rl_steps = 5000;
  int batch = 64;
  int n_samples = 12;
  double t_min = 0.2;
  double t_max = 0.6;
  double lr = 1e-4;
  int warmup = 100;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
};

struct RunSummary {
  double best_dev_bleu = 0;  // greedy corpus BLEU, full dev, best checkpoint
  double selected_dev_bleu = 0;  // selected checkpoint, full dev
  double selected_dev_ter = 0;
  double drawdown = 0;
  double unique_at_end = 0;
  double gap = 0;  // beam5/alpha=1 minus greedy BLEU, best checkpoint
  double wall_s = 0;
};

struct DeskResults {
  double ce_bleu = 0;
  double ce_gap = 0;
  int ce_steps = 0;
  std::map<std::string, std::vector<RunSummary>> runs;  // mad, cond, batch, ter
};

double beam_gap(const PolicyParams& p, const std::vector<SentencePair>& dev) {
  const auto refs = references(dev);
  return corpus_bleu(decode_beam(p, dev, {.beams = 5, .alpha = 1.0}), refs) - corpus_bleu(decode_greedy(p, dev), refs);
}

double seed_mean(const std::vector<RunSummary>& runs, double RunSummary::*field) {
  double s = 0;
  for (const auto& r : runs) s += r.*field;
  return runs.empty() ? std::nan("") : s / static_cast<double>(runs.size());
}

std::string listing(const std::vector<RunSummary>& runs, double RunSummary::*field) {
  std::string s = "[";
  for (std::size_t i = 0; i < runs.size(); ++i) s += fmt(i ? " %.2f" : "%.2f", runs[i].*field);
  return s + "]";
}

const DeskResults& desk(const Options& opts) {
  static std::unique_ptr<DeskResults> cached;
  if (cached) return *cached;
  const DeskSettings s;
  const auto root = opts.work_dir / "desk";
  fs::create_directories(root);
  auto log = [&](const std::string& line) {
    if (opts.verbose) std::cerr << "  [desk] " << line << std::endl;
  };

  SyntheticTaskSpec task;  // cipher-reverse, 50 content tokens, 10K train pairs
  const auto corpus = generate_synthetic(task);
  const auto vocab = synthetic_vocabulary(task);
  const auto& dev = corpus.dev;
  const auto refs = references(dev);

  PolicyConfig pc;
  pc.vocab_size = static_cast<int>(vocab.size());
  pc.hidden_size = s.hidden;
  pc.dropout = 0.1;
  PretrainConfig pre;
  pre.steps = s.pretrain_max_steps;
  pre.eval_every = s.pretrain_eval_every;
  pre.patience_evals = s.pretrain_patience;
  pre.optimizer.learning_rate = s.pretrain_lr;
  log("CE pretraining, hidden " + std::to_string(s.hidden));
  const auto ce = ce_pretrain(PolicyParams::initialize(pc, 1), corpus, pre, [&](const PretrainEval& e) {
    log(fmt("ce step %d nll %.3f dev BLEU %.2f", e.step, e.train_nll, e.dev_bleu));
  });
  save_checkpoint({ce.best, 0, static_cast<std::uint64_t>(ce.best_step)}, root / "ce.ckpt");

  auto results = std::make_unique<DeskResults>();
  results->ce_bleu = corpus_bleu(decode_greedy(ce.best, dev), refs);
  results->ce_gap = beam_gap(ce.best, dev);
  results->ce_steps = ce.log.empty() ? 0 : ce.log.back().step;
  log(fmt("CE checkpoint step %d dev BLEU %.2f gap %.2f", ce.best_step, results->ce_bleu, results->ce_gap));

  struct Variant {
    std::string name;
    RewardNorm norm;
    bool weights;
    std::string reward;
    std::vector<std::uint64_t> seeds;
  };
  const std::vector<Variant> variants = {
      {"mad", RewardNorm::kConditional, true, "bleu", s.seeds},
      {"cond", RewardNorm::kConditional, false, "bleu", s.seeds},
      {"batch", RewardNorm::kBatch, false, "bleu", s.seeds},
      {"ter", RewardNorm::kConditional, true, "ter", {s.seeds.front()}},
  };
  for (const auto& v : variants) {
    for (auto seed : v.seeds) {
      TrainConfig tc;
      tc.algorithm = Algorithm::kMad;
      tc.steps = s.rl_steps;
      tc.batch_size = s.batch;
      tc.n_samples = s.n_samples;
      tc.t_min = s.t_min;
      tc.t_max = s.t_max;
      tc.seed = seed;
      tc.reward = RewardSpec::single(v.reward);
      tc.reward_norm = v.norm;
      tc.mad_weights = v.weights;
      tc.optimizer.learning_rate = s.lr;
      tc.optimizer.warmup_steps = s.warmup;
      const auto run_name = v.name + "-seed" + std::to_string(seed);
      MetricsLog mlog(root / (run_name + ".csv"));
      TrainHooks hooks;
      hooks.on_row = [&](const MetricsRow& row) {
        mlog.append(row);
        if (row.step % 500 == 0) log(fmt("%s step %llu dev BLEU %.2f unique %.2f", run_name.c_str(),
                                         static_cast<unsigned long long>(row.step), row.dev_bleu, row.unique_samples));
      };
      const auto r = train(ce.best, corpus, vocab, tc, hooks);
      RunSummary sum;
      sum.best_dev_bleu = r.run.best_dev_bleu;
      const auto selected_hyps = decode_greedy(r.best_params, dev);
      sum.selected_dev_bleu = corpus_bleu(selected_hyps, refs);
      sum.selected_dev_ter = mean_sentence_metric("ter", selected_hyps, refs, vocab);
      std::vector<double> curve;
      for (const auto& h : r.run.history) curve.push_back(h.dev_bleu);
      sum.drawdown = max_drawdown(curve);
      sum.unique_at_end = r.rows.empty() ? 0.0 : r.rows.back().unique_samples;
      sum.gap = beam_gap(r.best_params, dev);
      sum.wall_s = r.wall_s;
      save_checkpoint({r.best_params, r.run.best_version, r.run.best_step}, root / (run_name + ".ckpt"));
      log(fmt("%s best %.2f selected BLEU %.2f TER %.2f drawdown %.2f unique %.2f gap %.2f (%.0fs)", run_name.c_str(),
              sum.best_dev_bleu, sum.selected_dev_bleu, sum.selected_dev_ter, sum.drawdown, sum.unique_at_end, sum.gap,
              sum.wall_s));
      results->runs[v.name].push_back(sum);
    }
  }
  cached = std::move(results);
  return *cached;
}

Outcome desk_learning(const Options& opts) {
  const auto& d = desk(opts);
  const auto& mad = d.runs.at("mad");
  const double gain = seed_mean(mad, &RunSummary::best_dev_bleu) - d.ce_bleu;
  return verdict(gain >= 1.0, fmt("CE %.2f (stopped at step %d); MAD best %s; seed-mean gain %+.2f BLEU (need >= +1.0)",
                                  d.ce_bleu, d.ce_steps, listing(mad, &RunSummary::best_dev_bleu).c_str(), gain));
}

Outcome ablation_direction(const Options& opts) {
  const auto& d = desk(opts);
  const double mad = seed_mean(d.runs.at("mad"), &RunSummary::best_dev_bleu);
  const double cond = seed_mean(d.runs.at("cond"), &RunSummary::best_dev_bleu);
  const double batch = seed_mean(d.runs.at("batch"), &RunSummary::best_dev_bleu);
  const double dd_mad = seed_mean(d.runs.at("mad"), &RunSummary::drawdown);
  const double dd_batch = seed_mean(d.runs.at("batch"), &RunSummary::drawdown);
  const bool order = mad >= cond - 0.3 && cond >= batch - 0.3;
  const bool stability = dd_batch >= dd_mad;
  return verdict(order && stability, fmt("best BLEU mad %.2f cond-only %.2f batch %.2f (tol 0.3); drawdown batch %.2f "
                                         ">= mad %.2f: %s",
                                         mad, cond, batch, dd_batch, dd_mad, stability ? "yes" : "no"));
}

Outcome diversity(const Options& opts) {
  const auto& d = desk(opts);
  const auto& on = d.runs.at("mad");
  const auto& off = d.runs.at("cond");
  const double u_on = seed_mean(on, &RunSummary::unique_at_end);
  const double u_off = seed_mean(off, &RunSummary::unique_at_end);
  return verdict(u_on >= u_off, fmt("unique samples per source at the last step: weights on %.3f %s, off %.3f %s", u_on,
                                    listing(on, &RunSummary::unique_at_end).c_str(), u_off,
                                    listing(off, &RunSummary::unique_at_end).c_str()));
}

Outcome reward_specificity(const Options& opts) {
  const auto& d = desk(opts);
  const auto& bleu_run = d.runs.at("mad").front();
  const auto& ter_run = d.runs.at("ter").front();
  const bool ter_ok = ter_run.selected_dev_ter <= bleu_run.selected_dev_ter;
  const bool bleu_ok = bleu_run.selected_dev_bleu >= ter_run.selected_dev_bleu;
  return verdict(ter_ok && bleu_ok, fmt("selected checkpoints, dev TER: ter-trained %.3f bleu-trained %.3f; dev BLEU: "
                                        "bleu-trained %.2f ter-trained %.2f",
                                        ter_run.selected_dev_ter, bleu_run.selected_dev_ter, bleu_run.selected_dev_bleu,
                                        ter_run.selected_dev_bleu));
}

Outcome beam_gap_direction(const Options& opts) {
  const auto& d = desk(opts);
  const double mad_gap = seed_mean(d.runs.at("mad"), &RunSummary::gap);
  return verdict(mad_gap <= d.ce_gap + 0.5, fmt("beam5/alpha=1 minus greedy BLEU: MAD %.2f %s, CE %.2f (tol 0.5)",
                                                mad_gap, listing(d.runs.at("mad"), &RunSummary::gap).c_str(),
                                                d.ce_gap));
}

// ---------------------------------------------------------------------------
// 13: worker scaling

Outcome worker_scaling(const Options&) {
  SyntheticTaskSpec task;
  task.train_size = 2000;
  const auto corpus = generate_synthetic(task);
  const auto vocab = synthetic_vocabulary(task);
  PolicyConfig pc;
  pc.vocab_size = static_cast<int>(vocab.size());
  pc.hidden_size = 32;
  const auto params = PolicyParams::initialize(pc, 1);
  TrainConfig tc;
  const double one = measure_worker_throughput(params, corpus, vocab, tc, 1, 4.0);
  const double two = measure_worker_throughput(params, corpus, vocab, tc, 2, 4.0);
  const double ratio = two / one;
  const unsigned cores = std::thread::hardware_concurrency();
  const auto detail = fmt("1 worker %.1f traj/s, 2 workers %.1f traj/s, ratio %.2f (need >= 1.0), %u hardware threads",
                          one, two, ratio, cores);
  if (cores < 2) return {Status::kSkip, detail + "; two workers cannot run in parallel here"};
  return verdict(ratio >= 1.0, detail);
}

}  // namespace

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "metric oracle equivalence", metric_oracles},
      {2, "conditional normalization", conditional_normalization},
      {3, "MAD weight properties", mad_weight_properties},
      {4, "objective gradients vs FD", gradient_checks},
      {5, "policy normalization", policy_normalization},
      {6, "queue semantics", queue_semantics},
      {7, "determinism", determinism},
      {8, "desk-scale learning", desk_learning},
      {9, "ablation direction", ablation_direction},
      {10, "diversity diagnostic", diversity},
      {11, "reward specificity", reward_specificity},
      {12, "greedy-beam gap direction", beam_gap_direction},
      {13, "worker scaling", worker_scaling},
  };
  return all;
}

}  // namespace acceptance
