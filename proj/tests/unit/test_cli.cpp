#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "madrl/checkpoint.hpp"
#include "madrl/cli/commands.hpp"
#include "madrl/cli/run_config.hpp"

using namespace madrl;
using namespace madrl::cli;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

fs::path output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  if (env && *env) return env;
  const auto root = fs::temp_directory_path() / "madrl_cli_unit";
  ::setenv(kOutputRootEnv, root.c_str(), 1);
  return root;
}

CliResult run(std::vector<std::string> args) {
  output_root();
  args.insert(args.begin(), "madrl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// A reverse task small enough for a few hundred steps.
std::vector<std::string> tiny_task() {
  return {"--task", "reverse", "--task_vocab", "6", "--task_min_len", "2", "--task_max_len", "4",
          "--train_size", "200", "--dev_size", "12", "--test_size", "12", "--hidden_size", "8",
          "--dev_limit", "12", "--gap_limit", "12"};
}

std::vector<std::string> tiny_train() {
  return {"--steps", "30", "--batch_size", "16", "--n_samples", "4", "--queue_capacity", "256",
          "--queue_min_size", "32", "--lr", "0.001", "--warmup_steps", "5"};
}

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

// Pretrains the tiny model once and returns its checkpoint path.
const fs::path& tiny_checkpoint() {
  static const fs::path path = [] {
    const auto r = run(concat({{"pretrain", "--run_name", "cli-pretrain", "--pretrain_steps", "150",
                                "--pretrain_eval_every", "50", "--pretrain_lr", "0.01"},
                               tiny_task()}));
    REQUIRE(r.code == kExitOk);
    return output_root() / "cli-pretrain" / "best.ckpt";
  }();
  return path;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("defaults cover the documented experiment settings") {
    RunConfig cfg;
    CHECK(cfg.get("algo") == "mad");
    CHECK(cfg.get_double("t_min") == 0.2);
    CHECK(cfg.get_double("t_max") == 0.6);
    CHECK(cfg.get_u64("queue_capacity") == 4096u);
    CHECK(cfg.get_u64("queue_min_size") == 512u);
    CHECK(cfg.get_int("publish_period") == 20);
    CHECK(cfg.get("reward_norm") == "conditional");
    CHECK(cfg.get_bool("mad_weights"));

    const auto temps = cfg.get_doubles("sweep_temperatures");
    REQUIRE(temps.size() == 11u);
    for (std::size_t i = 0; i < temps.size(); ++i) CHECK(temps[i] == doctest::Approx(0.2 + 0.1 * i).epsilon(1e-12));

    std::stringstream ss(cfg.get("sweep_ranges"));
    std::string item;
    std::vector<std::string> ranges;
    while (std::getline(ss, item, ',')) ranges.push_back(item);
    CHECK(ranges == std::vector<std::string>{"0.2:0.6", "0.4:0.8", "0.6:1.0", "0.8:1.2"});
  }

  TEST_CASE("config text layering, comments and errors") {
    RunConfig cfg;
    cfg.load_text("# comment\n\nalgo = ppo\n  seed=9  \nalgo = mrt\n", "a.cfg");
    CHECK(cfg.get("algo") == "mrt");
    CHECK(cfg.get_int("seed") == 9);

    try {
      cfg.load_text("seed = 1\nnot a pair\n", "b.cfg");
      FAIL("expected UsageError");
    } catch (const UsageError& e) {
      CHECK(std::string(e.what()).find("b.cfg:2") != std::string::npos);
    }
    try {
      cfg.load_text("steps = 3\nbogus_key = 1\n", "c.cfg");
      FAIL("expected UsageError");
    } catch (const UsageError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("c.cfg:2") != std::string::npos);
      CHECK(msg.find("bogus_key") != std::string::npos);
    }
    CHECK_THROWS_AS(cfg.set("nope", "1"), UsageError);
    CHECK_THROWS_AS(cfg.load_file("/nonexistent/dir/x.cfg"), UsageError);

    cfg.set("seed", "x1");
    CHECK_THROWS_AS(cfg.get_int("seed"), UsageError);
    cfg.set("mad_weights", "maybe");
    CHECK_THROWS_AS(cfg.get_bool("mad_weights"), UsageError);
    cfg.set("eval_beams", "1,a");
    CHECK_THROWS_AS(cfg.get_doubles("eval_beams"), UsageError);
  }

  TEST_CASE("config text round trips") {
    RunConfig a;
    a.set("algo", "reinforce");
    a.set("t_max", "0.9");
    RunConfig b;
    b.load_text(a.to_text());
    CHECK(b.to_text() == a.to_text());
  }

  TEST_CASE("train_config maps ablation and reward keys") {
    RunConfig cfg;
    auto t = train_config(cfg);
    CHECK(t.algorithm == Algorithm::kMad);
    CHECK(t.reward_norm == RewardNorm::kConditional);
    CHECK(t.mad_weights);
    CHECK(t.reward == RewardSpec::single("bleu"));

    cfg.set("reward_norm", "batch");
    cfg.set("mad_weights", "off");
    cfg.set("reward", "ter");
    cfg.set("algo", "ppo");
    cfg.set("ppo_epsilon", "0.3");
    t = train_config(cfg);
    CHECK(t.algorithm == Algorithm::kPpo);
    CHECK(t.reward_norm == RewardNorm::kBatch);
    CHECK_FALSE(t.mad_weights);
    CHECK(t.reward == RewardSpec::single("ter"));
    CHECK(t.ppo.epsilon == 0.3);

    cfg.set("reward", "all");
    CHECK(train_config(cfg).reward == RewardSpec::all());

    RunConfig bad;
    bad.set("algo", "dqn");
    CHECK_THROWS_AS(train_config(bad), UsageError);
    bad = RunConfig();
    bad.set("reward_norm", "global");
    CHECK_THROWS_AS(train_config(bad), UsageError);
    bad = RunConfig();
    bad.set("t_min", "0.9");
    bad.set("t_max", "0.3");
    CHECK_THROWS_AS(train_config(bad), UsageError);
    bad = RunConfig();
    bad.set("algo", "ppo");
    bad.set("ppo_epsilon", "1.5");
    CHECK_THROWS_AS(train_config(bad), UsageError);
  }

  TEST_CASE("parse_beam") {
    CHECK_FALSE(parse_beam(5, "none").alpha.has_value());
    CHECK(parse_beam(5, "1.0").alpha == 1.0);
    CHECK(parse_beam(50, "0.6").beams == 50);
    CHECK_THROWS_AS(parse_beam(0, "none"), UsageError);
    CHECK_THROWS_AS(parse_beam(5, "x"), UsageError);
  }

  TEST_CASE("task and policy config errors") {
    RunConfig cfg;
    cfg.set("task", "sort");
    CHECK_THROWS_AS(task_spec(cfg), UsageError);
    cfg = RunConfig();
    cfg.set("task_min_len", "9");
    cfg.set("task_max_len", "3");
    CHECK_THROWS_AS(task_spec(cfg), UsageError);
    cfg = RunConfig();
    cfg.set("hidden_size", "0");
    CHECK_THROWS_AS(policy_config(cfg, 10), UsageError);
    cfg = RunConfig();
    cfg.set("task", "files");
    CHECK_THROWS_AS(load_task(cfg), UsageError);
  }

  TEST_CASE("run directory naming") {
    RunConfig cfg;
    CommandContext ctx{"/tmp/root", nullptr};
    CHECK(run_directory(cfg, ctx, "train") == fs::path("/tmp/root/train-mad-seed1"));
    cfg.set("run_name", "x");
    CHECK(run_directory(cfg, ctx, "train") == fs::path("/tmp/root/x"));
  }

  TEST_CASE("exit codes") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
    CHECK(run({"train", "--no_such_flag", "1"}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);

    auto r = run(concat({{"train", "--run_name", "cli-nockpt"}, tiny_task()}));
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("checkpoint") != std::string::npos);

    r = run(concat({{"train", "--checkpoint", "/nonexistent/model.ckpt"}, tiny_task()}));
    CHECK(r.code == kExitFailure);

    r = run(concat({{"train", "--algo", "a2c", "--checkpoint", tiny_checkpoint().string()}, tiny_task()}));
    CHECK(r.code == kExitUsage);

    r = run({"eval", "--config", "/nonexistent/run.cfg"});
    CHECK(r.code == kExitUsage);
  }

  TEST_CASE("checkpoint vocabulary must match the task") {
    auto args = concat({{"eval", "--checkpoint", tiny_checkpoint().string()}, tiny_task()});
    const auto it = std::find(args.begin(), args.end(), "--task_vocab");
    REQUIRE(it != args.end());
    *(it + 1) = "9";
    auto r = run(args);
    CHECK(r.code == kExitFailure);
    CHECK(r.err.find("vocabulary") != std::string::npos);
  }

  TEST_CASE("pretrain writes its run directory") {
    const auto& ckpt = tiny_checkpoint();
    const auto dir = ckpt.parent_path();
    for (const char* f : {"config.txt", "vocab.txt", "best.ckpt", "pretrain_log.csv", "summary.txt"}) {
      CHECK_MESSAGE(fs::exists(dir / f), f);
    }
    const auto log = read_csv(dir / "pretrain_log.csv");
    REQUIRE(log.size() == 5u);
    CHECK(log[0] == std::vector<std::string>{"step", "train_nll", "dev_bleu", "wall_s"});
    CHECK(log[1][0] == "0");
    CHECK(log[4][0] == "150");

    RunConfig saved;
    saved.load_file(dir / "config.txt");
    CHECK(saved.get("task") == "reverse");
    CHECK(saved.get_int("hidden_size") == 8);
    const auto loaded = load_checkpoint(ckpt);
    CHECK(loaded.params.config.vocab_size == 10);
    CHECK(loaded.params.config.hidden_size == 8);
  }

  TEST_CASE("eval reports the beam grid and beams=1 equals greedy") {
    auto r = run(concat({{"eval", "--run_name", "cli-eval", "--checkpoint", tiny_checkpoint().string()}, tiny_task()}));
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("greedy-beam gap") != std::string::npos);
    const auto rows = read_csv(output_root() / "cli-eval" / "report.csv");
    REQUIRE(rows.size() == 8u);
    CHECK(rows[0] == std::vector<std::string>{"decode", "beams", "alpha", "bleu", "gleu", "chrf", "ter", "token_f1"});
    const std::vector<std::pair<std::string, std::string>> expect = {
        {"1", "-"}, {"1", "none"}, {"1", "1"}, {"5", "none"}, {"5", "1"}, {"50", "none"}, {"50", "1"}};
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(rows[i + 1][1] == expect[i].first);
      CHECK(rows[i + 1][2] == expect[i].second);
    }
    CHECK(rows[1][0] == "greedy");
    for (int k : {2, 3}) {
      for (std::size_t c = 3; c < 8; ++c) CHECK(rows[k][c] == rows[1][c]);
    }
  }

  TEST_CASE("evaluate_policy gap needs the beams=5 alpha=1 row") {
    const auto ckpt = load_checkpoint(tiny_checkpoint());
    RunConfig cfg;
    for (std::size_t i = 0; i + 1 < tiny_task().size(); i += 2) cfg.set(tiny_task()[i].substr(2), tiny_task()[i + 1]);
    const auto data = load_task(cfg);
    auto rep = evaluate_policy(ckpt.params, data.corpus.dev, data.vocab, {parse_beam(2, "none")});
    CHECK(rep.rows.size() == 2u);
    CHECK(std::isnan(rep.greedy_beam_gap));
    rep = evaluate_policy(ckpt.params, data.corpus.dev, data.vocab, {parse_beam(5, "1.0")});
    CHECK(rep.greedy_beam_gap == doctest::Approx(rep.rows[1].bleu - rep.rows[0].bleu).epsilon(1e-12));
    CHECK_THROWS_AS(evaluate_policy(ckpt.params, {}, data.vocab, {}), std::invalid_argument);
  }

  TEST_CASE("train writes checkpoints, metrics and the resolved config") {
    auto r = run(concat({{"train", "--run_name", "cli-train", "--reward_norm", "batch", "--mad_weights", "off",
                          "--checkpoint", tiny_checkpoint().string()},
                         tiny_task(), tiny_train()}));
    REQUIRE(r.code == kExitOk);
    const auto dir = output_root() / "cli-train";
    for (const char* f : {"config.txt", "vocab.txt", "final.ckpt", "best.ckpt", "metrics.csv", "summary.txt"}) {
      CHECK_MESSAGE(fs::exists(dir / f), f);
    }
    RunConfig saved;
    saved.load_file(dir / "config.txt");
    CHECK(saved.get("reward_norm") == "batch");
    CHECK_FALSE(saved.get_bool("mad_weights"));
    CHECK(saved.get_int("steps") == 30);

    const auto metrics = read_csv(dir / "metrics.csv");
    REQUIRE(metrics.size() == 4u);  // header, versions 0, 1 and the final publish
    CHECK(metrics[1][0] == "0");
    CHECK(metrics[3][0] == "30");
    CHECK(load_checkpoint(dir / "final.ckpt").step == 30u);
  }

  TEST_CASE("mad sweep runs the four temperature ranges") {
    auto r = run(concat({{"sweep", "--run_name", "cli-sweep-mad", "--steps", "10", "--checkpoint",
                          tiny_checkpoint().string()},
                         tiny_task(), {"--batch_size", "16", "--n_samples", "4", "--queue_capacity", "256",
                                       "--queue_min_size", "32"}}));
    REQUIRE(r.code == kExitOk);
    const auto dir = output_root() / "cli-sweep-mad";
    const auto rows = read_csv(dir / "summary.csv");
    REQUIRE(rows.size() == 5u);
    CHECK(rows[1][0] == "0.2:0.6");
    CHECK(rows[4][0] == "0.8:1.2");
    for (const char* sub : {"run-0.2-0.6", "run-0.4-0.8", "run-0.6-1.0", "run-0.8-1.2"}) {
      CHECK_MESSAGE(fs::exists(dir / sub / "metrics.csv"), sub);
    }
    RunConfig sub;
    sub.load_file(dir / "run-0.6-1.0" / "config.txt");
    CHECK(sub.get_double("t_min") == 0.6);
    CHECK(sub.get_double("t_max") == 1.0);
    CHECK(r.out.find("best setting") != std::string::npos);
  }

  TEST_CASE("baseline sweep runs one setting per temperature") {
    auto r = run(concat({{"sweep", "--algo", "reinforce", "--run_name", "cli-sweep-rf", "--steps", "5",
                          "--sweep_temperatures", "0.3,0.9", "--checkpoint", tiny_checkpoint().string()},
                         tiny_task(), {"--batch_size", "16", "--queue_capacity", "256", "--queue_min_size", "32"}}));
    REQUIRE(r.code == kExitOk);
    const auto rows = read_csv(output_root() / "cli-sweep-rf" / "summary.csv");
    REQUIRE(rows.size() == 3u);
    RunConfig sub;
    sub.load_file(output_root() / "cli-sweep-rf" / "run-0.9" / "config.txt");
    CHECK(sub.get_double("temperature") == 0.9);

    r = run(concat({{"sweep", "--sweep_ranges", "0.2-0.6", "--checkpoint", tiny_checkpoint().string()}, tiny_task()}));
    CHECK(r.code == kExitUsage);
  }
}
