#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "madrl/pretrain.hpp"
#include "madrl/runtime/trainer.hpp"
#include "madrl/tasks.hpp"

namespace madrl::cli {

// Bad or missing configuration; the driver maps it to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

// Every recognized key with its default, in snapshot order.
const std::vector<ConfigKey>& config_keys();

// Flat key=value experiment configuration. Later assignments win, so the
// usual layering is defaults, then a config file, then command-line flags.
class RunConfig {
 public:
  RunConfig();

  void set(const std::string& key, const std::string& value);
  // Lines are `key = value`; blank lines and lines starting with # are skipped.
  void load_file(const std::filesystem::path& path);
  void load_text(const std::string& text, const std::string& origin = "<text>");

  bool has_value(const std::string& key) const;  // non-empty
  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  std::string to_text() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string> values_;
};

SyntheticTaskSpec task_spec(const RunConfig& cfg);
PolicyConfig policy_config(const RunConfig& cfg, int vocab_size);
PretrainConfig pretrain_config(const RunConfig& cfg);
TrainConfig train_config(const RunConfig& cfg);
BeamConfig parse_beam(int beams, const std::string& alpha);

}  // namespace madrl::cli
