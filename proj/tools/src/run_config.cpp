#include "madrl/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace madrl::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"algo", "mad", "mad | ppo | mrt | reinforce | ce"},
      {"run_name", "", "run directory name under the output root (default derived from command and algo)"},
      {"checkpoint", "", "input checkpoint: CE initialization for train, model for eval"},
      {"seed", "1", "run seed"},
      // data
      {"task", "cipher-reverse", "copy | reverse | cipher | cipher-reverse | files"},
      {"task_vocab", "50", "synthetic content vocabulary size"},
      {"task_min_len", "5", "synthetic minimum sentence length"},
      {"task_max_len", "20", "synthetic maximum sentence length"},
      {"task_seed", "1", "synthetic corpus seed"},
      {"cipher_seed", "7", "synthetic cipher permutation seed"},
      {"train_size", "10000", "synthetic training pairs"},
      {"dev_size", "500", "synthetic dev pairs"},
      {"test_size", "500", "synthetic test pairs"},
      {"train_src", "", "task=files: training source file"},
      {"train_tgt", "", "task=files: training target file"},
      {"dev_src", "", "task=files: dev source file"},
      {"dev_tgt", "", "task=files: dev target file"},
      {"test_src", "", "task=files: test source file"},
      {"test_tgt", "", "task=files: test target file"},
      {"vocab_file", "", "task=files: vocabulary file; built from training files when empty"},
      {"vocab_max_size", "30000", "task=files: vocabulary size limit when building"},
      // model
      {"hidden_size", "32", "policy hidden size"},
      {"layers", "1", "recurrent layers"},
      {"dropout", "0.1", "dropout rate used in training passes"},
      {"tied_softmax", "true", "share the embedding matrix with the output projection"},
      {"init_scale", "0.1", "uniform initialization range"},
      {"model_seed", "1", "parameter initialization seed"},
      // cross-entropy pretraining
      {"pretrain_steps", "4000", "CE steps"},
      {"pretrain_batch", "32", "CE batch size"},
      {"pretrain_eval_every", "200", "CE steps between dev evaluations"},
      {"pretrain_lr", "0.003", "CE learning rate"},
      {"pretrain_warmup", "100", "CE warmup steps"},
      {"pretrain_patience", "0", "CE evaluations without improvement before stopping; 0 disables"},
      // fine-tuning
      {"steps", "5000", "learner steps"},
      {"batch_size", "64", "trajectories per learner step"},
      {"publish_period", "20", "learner steps between checkpoint publishes"},
      {"eval_every", "1", "evaluate every k-th published checkpoint"},
      {"patience", "0", "learner steps without dev improvement before stopping; 0 disables"},
      {"workers", "2", "sampling workers"},
      {"threaded", "false", "run workers and evaluator on their own threads"},
      {"t_min", "0.2", "lowest sampling temperature (mad)"},
      {"t_max", "0.6", "highest sampling temperature (mad)"},
      {"n_samples", "12", "samples per source (mad, ppo)"},
      {"temperature", "0.6", "sampling temperature (ppo, mrt, reinforce)"},
      {"reward", "bleu", "bleu | gleu | chrf | ter | token_f1 | all | metric:weight,..."},
      {"reward_norm", "conditional", "conditional | batch"},
      {"mad_weights", "on", "on | off"},
      {"ppo_epsilon", "0.2", "PPO clip range"},
      {"mrt_samples", "5", "MRT samples per source"},
      {"queue_capacity", "4096", "queue capacity"},
      {"queue_min_size", "512", "items required before the learner samples"},
      {"queue_max_times_sampled", "1", "deliveries per queued item"},
      {"queue_max_staleness", "4", "drop items more than this many versions old; negative disables"},
      {"lr", "0.0001", "fine-tuning learning rate"},
      {"warmup_steps", "100", "fine-tuning warmup steps"},
      {"beta1", "0.9", "Adam beta1"},
      {"beta2", "0.999", "Adam beta2"},
      {"adam_eps", "1e-8", "Adam epsilon"},
      {"clip_norm", "1.0", "global gradient norm clip; 0 disables"},
      {"dev_limit", "0", "dev sentences used for evaluation; 0 uses all"},
      {"gap_every", "0", "measure the greedy-beam gap every k-th evaluation; 0 never"},
      {"gap_limit", "100", "dev sentences used for the greedy-beam gap"},
      // eval
      {"eval_split", "test", "dev | test"},
      {"eval_beams", "1,5,50", "beam sizes to evaluate"},
      {"eval_alphas", "none,1.0", "length-normalization exponents; none scores raw log-prob"},
      // sweep
      {"sweep_ranges", "0.2:0.6,0.4:0.8,0.6:1.0,0.8:1.2", "mad temperature intervals"},
      {"sweep_temperatures", "0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0,1.1,1.2",
       "baseline temperatures, 0.2 to 1.2 in steps of 0.1"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  it->second = value;
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path.string());
}

bool RunConfig::has_value(const std::string& key) const { return !get(key).empty(); }

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  const auto& s = get(key);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw UsageError(key + ": expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const auto& s = get(key);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw UsageError(key + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

double RunConfig::get_double(const std::string& key) const {
  const auto& s = get(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(key + ": expected a number, got '" + s + "'");
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto& s = get(key);
  if (s == "true" || s == "on" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "off" || s == "0" || s == "no") return false;
  throw UsageError(key + ": expected true/false or on/off, got '" + s + "'");
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(key + ": expected a comma-separated list of numbers, got '" + get(key) + "'");
    }
  }
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + values_.at(k.name) + "\n";
  return out;
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_text();
}

SyntheticTaskSpec task_spec(const RunConfig& cfg) {
  SyntheticTaskSpec s;
  try {
    s.kind = parse_synthetic_kind(cfg.get("task"));
  } catch (const std::exception&) {
    throw UsageError("task: unknown task '" + cfg.get("task") + "'");
  }
  s.vocab_size = cfg.get_int("task_vocab");
  s.min_length = cfg.get_int("task_min_len");
  s.max_length = cfg.get_int("task_max_len");
  s.seed = cfg.get_u64("task_seed");
  s.cipher_seed = cfg.get_u64("cipher_seed");
  s.train_size = cfg.get_u64("train_size");
  s.dev_size = cfg.get_u64("dev_size");
  s.test_size = cfg.get_u64("test_size");
  if (s.vocab_size < 1) throw UsageError("task_vocab: must be >= 1");
  if (s.min_length < 1 || s.max_length < s.min_length) throw UsageError("task_min_len/task_max_len: empty range");
  return s;
}

PolicyConfig policy_config(const RunConfig& cfg, int vocab_size) {
  PolicyConfig p;
  p.vocab_size = vocab_size;
  p.hidden_size = cfg.get_int("hidden_size");
  p.layers = cfg.get_int("layers");
  p.dropout = cfg.get_double("dropout");
  p.tied_softmax = cfg.get_bool("tied_softmax");
  p.init_scale = cfg.get_double("init_scale");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return p;
}

PretrainConfig pretrain_config(const RunConfig& cfg) {
  PretrainConfig p;
  p.steps = cfg.get_int("pretrain_steps");
  p.batch_size = cfg.get_int("pretrain_batch");
  p.eval_every = cfg.get_int("pretrain_eval_every");
  p.patience_evals = cfg.get_int("pretrain_patience");
  p.dev_limit = cfg.get_u64("dev_limit");
  p.seed = cfg.get_u64("seed");
  p.dropout = cfg.get_double("dropout") > 0.0;
  p.optimizer.learning_rate = cfg.get_double("pretrain_lr");
  p.optimizer.warmup_steps = cfg.get_int("pretrain_warmup");
  p.optimizer.beta1 = cfg.get_double("beta1");
  p.optimizer.beta2 = cfg.get_double("beta2");
  p.optimizer.epsilon = cfg.get_double("adam_eps");
  p.optimizer.clip_norm = cfg.get_double("clip_norm");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return p;
}

TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig t;
  try {
    t.algorithm = parse_algorithm(cfg.get("algo"));
  } catch (const std::invalid_argument&) {
    throw UsageError("algo: expected mad, ppo, mrt or reinforce, got '" + cfg.get("algo") + "'");
  }
  t.steps = cfg.get_u64("steps");
  t.batch_size = cfg.get_int("batch_size");
  t.publish_period = cfg.get_int("publish_period");
  t.eval_every_versions = cfg.get_int("eval_every");
  t.workers = cfg.get_int("workers");
  t.threaded = cfg.get_bool("threaded");
  t.seed = cfg.get_u64("seed");
  t.t_min = cfg.get_double("t_min");
  t.t_max = cfg.get_double("t_max");
  t.n_samples = cfg.get_int("n_samples");
  t.temperature = cfg.get_double("temperature");
  try {
    t.reward = RewardSpec::parse(cfg.get("reward"));
  } catch (const std::exception& e) {
    throw UsageError(std::string("reward: ") + e.what());
  }
  const auto& norm = cfg.get("reward_norm");
  if (norm == "conditional") {
    t.reward_norm = RewardNorm::kConditional;
  } else if (norm == "batch") {
    t.reward_norm = RewardNorm::kBatch;
  } else {
    throw UsageError("reward_norm: expected conditional or batch, got '" + norm + "'");
  }
  t.mad_weights = cfg.get_bool("mad_weights");
  t.ppo.epsilon = cfg.get_double("ppo_epsilon");
  t.mrt.sample_count = cfg.get_int("mrt_samples");
  t.queue.capacity = cfg.get_u64("queue_capacity");
  t.queue.min_size_to_sample = cfg.get_u64("queue_min_size");
  t.queue.max_times_sampled = cfg.get_int("queue_max_times_sampled");
  t.queue.max_staleness = cfg.get_int("queue_max_staleness");
  t.optimizer.learning_rate = cfg.get_double("lr");
  t.optimizer.warmup_steps = cfg.get_int("warmup_steps");
  t.optimizer.beta1 = cfg.get_double("beta1");
  t.optimizer.beta2 = cfg.get_double("beta2");
  t.optimizer.epsilon = cfg.get_double("adam_eps");
  t.optimizer.clip_norm = cfg.get_double("clip_norm");
  t.dropout = cfg.get_double("dropout") > 0.0;
  t.evaluator.dev_limit = cfg.get_u64("dev_limit");
  t.evaluator.gap_every = cfg.get_int("gap_every");
  t.evaluator.gap_limit = cfg.get_u64("gap_limit");
  t.evaluator.patience = cfg.get_u64("patience");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return t;
}

BeamConfig parse_beam(int beams, const std::string& alpha) {
  BeamConfig b;
  b.beams = beams;
  if (alpha == "none" || alpha == "None") {
    b.alpha.reset();
  } else {
    try {
      b.alpha = std::stod(alpha);
    } catch (const std::exception&) {
      throw UsageError("eval_alphas: expected a number or none, got '" + alpha + "'");
    }
  }
  try {
    b.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return b;
}

}  // namespace madrl::cli
