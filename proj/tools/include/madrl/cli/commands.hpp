#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "madrl/cli/run_config.hpp"
#include "madrl/decoding.hpp"
#include "madrl/runtime/trainer.hpp"

namespace madrl::cli {

inline constexpr const char* kOutputRootEnv = "MADRL_OUTPUT_ROOT";

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitFailure = 2 };

struct CommandContext {
  std::filesystem::path output_root = "runs";
  std::ostream* out = nullptr;
};

// MADRL_OUTPUT_ROOT when set, otherwise ./runs.
std::filesystem::path output_root_from_env();

struct TaskData {
  ParallelCorpus corpus;
  Vocabulary vocab;
};

TaskData load_task(const RunConfig& cfg);

// <root>/<run_name>, or <root>/<command>-<algo>-seed<seed> when run_name is empty.
std::filesystem::path run_directory(const RunConfig& cfg, const CommandContext& ctx, const std::string& command);

struct EvalRow {
  std::string decode;  // "greedy" or "beam"
  int beams = 1;
  std::optional<double> alpha;
  double bleu = 0.0;
  double gleu = 0.0;
  double chrf = 0.0;
  double ter = 0.0;
  double token_f1 = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double greedy_beam_gap = 0.0;  // beams=5, alpha=1.0 BLEU minus greedy BLEU; NaN if that row is absent
};

EvalReport evaluate_policy(const PolicyParams& params, const std::vector<SentencePair>& pairs,
                           const Vocabulary& vocab, const std::vector<BeamConfig>& grid);

// Each command writes its run directory and returns an exit code. Usage
// problems throw UsageError; runtime failures throw std::exception.
int cmd_pretrain(const RunConfig& cfg, const CommandContext& ctx);
int cmd_train(const RunConfig& cfg, const CommandContext& ctx);
int cmd_eval(const RunConfig& cfg, const CommandContext& ctx);
int cmd_sweep(const RunConfig& cfg, const CommandContext& ctx);

// Full command-line driver: parses arguments, dispatches, maps errors to
// exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace madrl::cli
