#include "madrl/runtime/metrics_log.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace madrl {
namespace {

void put_real(std::ostringstream& os, double v) {
  if (std::isnan(v)) {
    os << "nan";
  } else {
    os << v;
  }
}

}  // namespace

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {
      "step",   "wall_s", "dev_bleu", "greedy_beam_gap", "mean_reward",    "mean_rbar",   "mean_u",
      "mean_v", "mean_w", "clip_frac", "unique_samples", "queue_size", "ckpt_version"};
  return cols;
}

std::string metrics_header() {
  std::string h;
  for (const auto& c : metrics_columns()) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h;
}

std::string format_metrics_row(const MetricsRow& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.step << ',';
  put_real(os, r.wall_s);
  for (double v : {r.dev_bleu, r.greedy_beam_gap, r.mean_reward, r.mean_rbar, r.mean_u, r.mean_v, r.mean_w,
                   r.clip_frac, r.unique_samples}) {
    os << ',';
    put_real(os, v);
  }
  os << ',' << r.queue_size << ',' << r.ckpt_version;
  return os.str();
}

MetricsLog::MetricsLog(const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  out_.open(path, std::ios::app);
  if (!out_) throw std::runtime_error("cannot open metrics log " + path.string());
  if (fresh) out_ << metrics_header() << '\n' << std::flush;
}

void MetricsLog::append(const MetricsRow& row) {
  std::lock_guard lock(mu_);
  out_ << format_metrics_row(row) << '\n' << std::flush;
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != metrics_header()) {
    throw std::runtime_error(path.string() + ": unexpected metrics header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != metrics_columns().size()) throw std::runtime_error(path.string() + ": malformed row");
    MetricsRow r;
    r.step = std::stoull(f[0]);
    r.wall_s = std::stod(f[1]);
    r.dev_bleu = std::stod(f[2]);
    r.greedy_beam_gap = std::stod(f[3]);
    r.mean_reward = std::stod(f[4]);
    r.mean_rbar = std::stod(f[5]);
    r.mean_u = std::stod(f[6]);
    r.mean_v = std::stod(f[7]);
    r.mean_w = std::stod(f[8]);
    r.clip_frac = std::stod(f[9]);
    r.unique_samples = std::stod(f[10]);
    r.queue_size = std::stoull(f[11]);
    r.ckpt_version = std::stoull(f[12]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace madrl
