#include "madrl/cli/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "madrl/checkpoint.hpp"
#include "madrl/evaluation.hpp"
#include "madrl/pretrain.hpp"

namespace madrl::cli {
namespace fs = std::filesystem;

namespace {

std::ostream& out_of(const CommandContext& ctx) { return ctx.out ? *ctx.out : std::cout; }

fs::path prepare_run_dir(const RunConfig& cfg, const CommandContext& ctx, const std::string& command) {
  const auto dir = run_directory(cfg, ctx, command);
  fs::create_directories(dir);
  cfg.save(dir / "config.txt");
  return dir;
}

PolicyCheckpoint load_input_checkpoint(const RunConfig& cfg, const Vocabulary& vocab) {
  if (!cfg.has_value("checkpoint")) throw UsageError("checkpoint: an input checkpoint path is required");
  const fs::path path = cfg.get("checkpoint");
  if (!fs::exists(path)) throw std::runtime_error("checkpoint file not found: " + path.string());
  auto ckpt = load_checkpoint(path);
  if (static_cast<std::size_t>(ckpt.params.config.vocab_size) != vocab.size()) {
    throw std::runtime_error("checkpoint vocabulary size " + std::to_string(ckpt.params.config.vocab_size) +
                             " does not match the task vocabulary size " + std::to_string(vocab.size()));
  }
  ckpt.params.config.dropout = cfg.get_double("dropout");
  return ckpt;
}

void write_pretrain_log(const fs::path& path, const std::vector<PretrainEval>& log) {
  std::ofstream out(path);
  out << "step,train_nll,dev_bleu,wall_s\n";
  out << std::setprecision(10);
  for (const auto& e : log) out << e.step << ',' << e.train_nll << ',' << e.dev_bleu << ',' << e.wall_s << '\n';
}

int pretrain_into(const RunConfig& cfg, const CommandContext& ctx, const fs::path& dir, PolicyParams init,
                  const TaskData& data) {
  auto pcfg = pretrain_config(cfg);
  auto& out = out_of(ctx);
  auto result = ce_pretrain(std::move(init), data.corpus, pcfg, [&](const PretrainEval& e) {
    out << "pretrain step " << e.step << " train_nll " << e.train_nll << " dev_bleu " << e.dev_bleu << '\n';
  });
  write_pretrain_log(dir / "pretrain_log.csv", result.log);
  save_checkpoint({result.best, 0, static_cast<std::uint64_t>(result.best_step)}, dir / "best.ckpt");
  std::ofstream summary(dir / "summary.txt");
  summary << "best_dev_bleu = " << result.best_dev_bleu << "\nbest_step = " << result.best_step << '\n';
  out << "best dev BLEU " << result.best_dev_bleu << " at step " << result.best_step << "; wrote "
      << (dir / "best.ckpt").string() << '\n';
  return kExitOk;
}

struct TrainOutcome {
  TrainResult result;
  fs::path dir;
};

TrainOutcome train_into(const RunConfig& cfg, const CommandContext& ctx, const fs::path& dir, const TaskData& data,
                        const PolicyCheckpoint& init) {
  const auto tcfg = train_config(cfg);
  auto& out = out_of(ctx);
  fs::remove(dir / "metrics.csv");  // a rerun into the same directory starts a fresh log
  MetricsLog log(dir / "metrics.csv");
  TrainHooks hooks;
  hooks.on_row = [&](const MetricsRow& row) {
    log.append(row);
    out << "step " << row.step << " dev_bleu " << row.dev_bleu << " mean_reward " << row.mean_reward
        << " unique " << row.unique_samples << '\n';
  };
  TrainOutcome o;
  o.dir = dir;
  o.result = train(init.params, data.corpus, data.vocab, tcfg, hooks);
  const auto& r = o.result;
  save_checkpoint({r.final_params, r.run.history.empty() ? 0 : r.run.history.back().version, r.steps_done},
                  dir / "final.ckpt");
  save_checkpoint({r.best_params, r.run.best_version, r.run.best_step}, dir / "best.ckpt");
  std::ofstream summary(dir / "summary.txt");
  summary << std::setprecision(10) << "algo = " << to_string(tcfg.algorithm) << "\nbest_dev_bleu = "
          << r.run.best_dev_bleu << "\nbest_step = " << r.run.best_step << "\nsteps_done = " << r.steps_done
          << "\nskipped_steps = " << r.skipped_steps << "\nmean_unique_samples = " << r.producer.mean_unique()
          << "\nwall_s = " << r.wall_s << "\nstatus = " << (r.failed ? "failed" : "ok") << '\n';
  return o;
}

std::string format_alpha(const std::optional<double>& a) {
  if (!a) return "none";
  std::ostringstream os;
  os << *a;
  return os.str();
}

std::vector<BeamConfig> eval_grid(const RunConfig& cfg) {
  std::vector<BeamConfig> grid;
  std::vector<std::string> alphas;
  std::stringstream ss(cfg.get("eval_alphas"));
  std::string a;
  while (std::getline(ss, a, ',')) alphas.push_back(a);
  for (double b : cfg.get_doubles("eval_beams")) {
    if (b < 1 || b != std::floor(b)) throw UsageError("eval_beams: beam sizes must be positive integers");
    for (const auto& alpha : alphas) grid.push_back(parse_beam(static_cast<int>(b), alpha));
  }
  return grid;
}

}  // namespace

fs::path output_root_from_env() {
  const char* root = std::getenv(kOutputRootEnv);
  return root && *root ? fs::path(root) : fs::path("runs");
}

TaskData load_task(const RunConfig& cfg) {
  TaskData d;
  if (cfg.get("task") != "files") {
    const auto spec = task_spec(cfg);
    d.corpus = generate_synthetic(spec);
    d.vocab = synthetic_vocabulary(spec);
    return d;
  }
  for (const char* key : {"train_src", "train_tgt", "dev_src", "dev_tgt"}) {
    if (!cfg.has_value(key)) throw UsageError(std::string(key) + ": required when task = files");
  }
  if (cfg.has_value("vocab_file")) {
    d.vocab = Vocabulary::load(cfg.get("vocab_file"));
  } else {
    d.vocab = build_vocab({cfg.get("train_src"), cfg.get("train_tgt")}, cfg.get_u64("vocab_max_size"));
  }
  d.corpus.train = load_corpus(cfg.get("train_src"), cfg.get("train_tgt"), d.vocab);
  d.corpus.dev = load_corpus(cfg.get("dev_src"), cfg.get("dev_tgt"), d.vocab);
  if (cfg.has_value("test_src") && cfg.has_value("test_tgt")) {
    d.corpus.test = load_corpus(cfg.get("test_src"), cfg.get("test_tgt"), d.vocab);
  }
  return d;
}

fs::path run_directory(const RunConfig& cfg, const CommandContext& ctx, const std::string& command) {
  if (cfg.has_value("run_name")) return ctx.output_root / cfg.get("run_name");
  return ctx.output_root / (command + "-" + cfg.get("algo") + "-seed" + cfg.get("seed"));
}

EvalReport evaluate_policy(const PolicyParams& params, const std::vector<SentencePair>& pairs,
                           const Vocabulary& vocab, const std::vector<BeamConfig>& grid) {
  if (pairs.empty()) throw std::invalid_argument("evaluate_policy: empty evaluation set");
  const auto refs = references(pairs);
  auto score = [&](EvalRow row, const std::vector<TokenSeq>& hyps) {
    row.bleu = corpus_bleu(hyps, refs);
    row.gleu = mean_sentence_metric("gleu", hyps, refs, vocab);
    row.chrf = mean_sentence_metric("chrf", hyps, refs, vocab);
    row.ter = mean_sentence_metric("ter", hyps, refs, vocab);
    row.token_f1 = mean_sentence_metric("token_f1", hyps, refs, vocab);
    return row;
  };
  EvalReport report;
  report.rows.push_back(score({.decode = "greedy", .beams = 1, .alpha = std::nullopt}, decode_greedy(params, pairs)));
  report.greedy_beam_gap = std::numeric_limits<double>::quiet_NaN();
  for (const auto& b : grid) {
    auto row = score({.decode = "beam", .beams = b.beams, .alpha = b.alpha}, decode_beam(params, pairs, b));
    if (b.beams == 5 && b.alpha && *b.alpha == 1.0) report.greedy_beam_gap = row.bleu - report.rows.front().bleu;
    report.rows.push_back(row);
  }
  return report;
}

int cmd_pretrain(const RunConfig& cfg, const CommandContext& ctx) {
  const auto data = load_task(cfg);
  const auto dir = prepare_run_dir(cfg, ctx, "pretrain");
  data.vocab.save(dir / "vocab.txt");
  auto init = PolicyParams::initialize(policy_config(cfg, data.vocab.size()), cfg.get_u64("model_seed"));
  return pretrain_into(cfg, ctx, dir, std::move(init), data);
}

int cmd_train(const RunConfig& cfg, const CommandContext& ctx) {
  const auto data = load_task(cfg);
  const auto init = load_input_checkpoint(cfg, data.vocab);
  if (cfg.get("algo") == "ce") {
    const auto dir = prepare_run_dir(cfg, ctx, "train");
    RunConfig ce = cfg;
    ce.set("pretrain_steps", cfg.get("steps"));
    return pretrain_into(ce, ctx, dir, init.params, data);
  }
  (void)train_config(cfg);
  const auto dir = prepare_run_dir(cfg, ctx, "train");
  data.vocab.save(dir / "vocab.txt");
  const auto o = train_into(cfg, ctx, dir, data, init);
  auto& out = out_of(ctx);
  out << "best dev BLEU " << o.result.run.best_dev_bleu << " at step " << o.result.run.best_step << "; wrote "
      << (dir / "final.ckpt").string() << '\n';
  if (o.result.failed) {
    out << "too many non-finite gradient steps (" << o.result.skipped_steps << ")\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const CommandContext& ctx) {
  const auto data = load_task(cfg);
  const auto ckpt = load_input_checkpoint(cfg, data.vocab);
  const auto& split = cfg.get("eval_split");
  if (split != "dev" && split != "test") throw UsageError("eval_split: expected dev or test, got '" + split + "'");
  const auto& pairs = split == "dev" ? data.corpus.dev : data.corpus.test;
  if (pairs.empty()) throw UsageError("eval_split: the " + split + " split is empty");
  const auto grid = eval_grid(cfg);
  const auto dir = prepare_run_dir(cfg, ctx, "eval");
  const auto report = evaluate_policy(ckpt.params, pairs, data.vocab, grid);

  std::ofstream csv(dir / "report.csv");
  csv << "decode,beams,alpha,bleu,gleu,chrf,ter,token_f1\n" << std::setprecision(10);
  auto& out = out_of(ctx);
  out << std::left << std::setw(8) << "decode" << std::setw(7) << "beams" << std::setw(7) << "alpha"
      << std::setw(9) << "BLEU" << std::setw(9) << "GLEU" << std::setw(9) << "ChrF" << std::setw(9) << "TER"
      << "TokenF1\n"
      << std::fixed << std::setprecision(2);
  for (const auto& r : report.rows) {
    const auto alpha = r.decode == "greedy" ? std::string("-") : format_alpha(r.alpha);
    csv << r.decode << ',' << r.beams << ',' << alpha << ',' << r.bleu << ',' << r.gleu << ',' << r.chrf << ','
        << r.ter << ',' << r.token_f1 << '\n';
    out << std::setw(8) << r.decode << std::setw(7) << r.beams << std::setw(7) << alpha << std::setw(9) << r.bleu
        << std::setw(9) << r.gleu << std::setw(9) << r.chrf << std::setw(9) << r.ter << r.token_f1 << '\n';
  }
  out << "greedy-beam gap (beams=5, alpha=1.0): " << report.greedy_beam_gap << '\n';
  out.unsetf(std::ios::fixed);
  std::ofstream summary(dir / "summary.txt");
  summary << std::setprecision(10) << "greedy_beam_gap = " << report.greedy_beam_gap << '\n';
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const CommandContext& ctx) {
  const auto data = load_task(cfg);
  const auto init = load_input_checkpoint(cfg, data.vocab);
  const auto algo = train_config(cfg).algorithm;
  struct Setting {
    std::string name;
    double t_min, t_max;
  };
  std::vector<Setting> settings;
  if (algo == Algorithm::kMad) {
    std::stringstream ss(cfg.get("sweep_ranges"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw UsageError("sweep_ranges: expected tmin:tmax pairs, got '" + item + "'");
      try {
        settings.push_back({item, std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
      } catch (const std::exception&) {
        throw UsageError("sweep_ranges: expected tmin:tmax pairs, got '" + item + "'");
      }
    }
  } else {
    for (double t : cfg.get_doubles("sweep_temperatures")) {
      std::ostringstream name;
      name << t;
      settings.push_back({name.str(), t, t});
    }
  }
  if (settings.empty()) throw UsageError("sweep: no settings to run");
  const auto root = prepare_run_dir(cfg, ctx, "sweep");
  auto& out = out_of(ctx);
  std::ofstream summary(root / "summary.csv");
  summary << "setting,t_min,t_max,max_dev_bleu,best_step\n" << std::setprecision(10);
  std::size_t best = 0;
  std::vector<double> scores;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const auto& s = settings[i];
    RunConfig run = cfg;
    if (algo == Algorithm::kMad) {
      run.set("t_min", std::to_string(s.t_min));
      run.set("t_max", std::to_string(s.t_max));
    } else {
      run.set("temperature", std::to_string(s.t_min));
    }
    auto name = s.name;
    for (auto& c : name) c = c == ':' ? '-' : c;
    const auto dir = root / ("run-" + name);
    fs::create_directories(dir);
    run.save(dir / "config.txt");
    out << "sweep setting " << s.name << '\n';
    const auto o = train_into(run, ctx, dir, data, init);
    scores.push_back(o.result.run.best_dev_bleu);
    summary << s.name << ',' << s.t_min << ',' << s.t_max << ',' << o.result.run.best_dev_bleu << ','
            << o.result.run.best_step << '\n';
    if (scores[i] > scores[best]) best = i;
  }
  out << "best setting " << settings[best].name << " max dev BLEU " << scores[best] << '\n';
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequence-level policy-gradient fine-tuning for encoder-decoder models", "madrl"};
  app.require_subcommand(1);
  struct Sub {
    CLI::App* app;
    std::string config_path;
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
  };
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"pretrain", "cross-entropy pretraining; writes the best-dev checkpoint"},
      {"train", "sequence-level fine-tuning from a CE checkpoint"},
      {"eval", "greedy and beam evaluation of a checkpoint"},
      {"sweep", "temperature sweep of short fine-tuning runs"}};
  std::vector<std::unique_ptr<Sub>> subs;
  for (const auto& [name, help] : commands) {
    auto s = std::make_unique<Sub>();
    s->app = app.add_subcommand(name, help);
    s->app->add_option("--config", s->config_path, "key = value config file");
    for (const auto& key : config_keys()) {
      s->options[key.name] = s->app->add_option("--" + key.name, s->flags[key.name], key.help);
    }
    subs.push_back(std::move(s));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      auto& s = *subs[i];
      if (!s.app->parsed()) continue;
      RunConfig cfg;
      if (!s.config_path.empty()) cfg.load_file(s.config_path);
      for (const auto& [key, opt] : s.options) {
        if (opt->count() > 0) cfg.set(key, s.flags[key]);
      }
      CommandContext ctx{output_root_from_env(), &out};
      const auto& name = commands[i].first;
      if (name == "pretrain") return cmd_pretrain(cfg, ctx);
      if (name == "train") return cmd_train(cfg, ctx);
      if (name == "eval") return cmd_eval(cfg, ctx);
      return cmd_sweep(cfg, ctx);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace madrl::cli
