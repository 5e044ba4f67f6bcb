#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

namespace madrl {

struct MetricsRow {
  std::uint64_t step = 0;
  double wall_s = 0.0;
  double dev_bleu = 0.0;
  double greedy_beam_gap = 0.0;  // NaN when not measured at this row
  double mean_reward = 0.0;
  double mean_rbar = 0.0;
  double mean_u = 0.0;
  double mean_v = 0.0;
  double mean_w = 0.0;
  double clip_frac = 0.0;
  double unique_samples = 0.0;
  std::uint64_t queue_size = 0;
  std::uint64_t ckpt_version = 0;
};

const std::vector<std::string>& metrics_columns();
std::string metrics_header();
std::string format_metrics_row(const MetricsRow& row);

// Append-only CSV writer; the header is written when the file is new or empty.
class MetricsLog {
 public:
  explicit MetricsLog(const std::filesystem::path& path);
  void append(const MetricsRow& row);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

}  // namespace madrl
