#include "madrl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>

namespace madrl {
namespace {

constexpr char kMagic[8] = {'M', 'A', 'D', 'R', 'L', 'C', 'K', 'P'};

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  template <class T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void str(const std::string& s) {
    uint<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void f32(float f) { uint<std::uint32_t>(std::bit_cast<std::uint32_t>(f)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw std::runtime_error("checkpoint: truncated data");
  }
  template <class T>
  T uint() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = uint<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  bool done() const { return pos_ == in_.size(); }
  void raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, in_.data() + pos_, n);
    pos_ += n;
  }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string policy_config_to_text(const PolicyConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "vocab_size=" << c.vocab_size << "\n"
     << "hidden_size=" << c.hidden_size << "\n"
     << "layers=" << c.layers << "\n"
     << "dropout=" << c.dropout << "\n"
     << "tied_softmax=" << (c.tied_softmax ? 1 : 0) << "\n"
     << "init_scale=" << c.init_scale << "\n"
     << "max_len_ratio=" << c.max_len_ratio << "\n"
     << "max_len_offset=" << c.max_len_offset << "\n";
  return os.str();
}

PolicyConfig policy_config_from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("checkpoint: malformed config line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(std::string("checkpoint: config missing ") + key);
    return it->second;
  };
  PolicyConfig c;
  c.vocab_size = std::stoi(get("vocab_size"));
  c.hidden_size = std::stoi(get("hidden_size"));
  c.layers = std::stoi(get("layers"));
  c.dropout = std::stod(get("dropout"));
  c.tied_softmax = get("tied_softmax") == "1";
  c.init_scale = std::stod(get("init_scale"));
  c.max_len_ratio = std::stoi(get("max_len_ratio"));
  c.max_len_offset = std::stoi(get("max_len_offset"));
  c.validate();
  return c;
}

std::vector<std::uint8_t> serialize_checkpoint(const PolicyCheckpoint& ckpt) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.uint<std::uint32_t>(kCheckpointFormatVersion);
  w.uint<std::uint64_t>(ckpt.version);
  w.uint<std::uint64_t>(ckpt.step);
  w.str(policy_config_to_text(ckpt.params.config));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(ckpt.params.tensors.size()));
  for (const auto& t : ckpt.params.tensors) {
    w.str(t.name);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(t.value.rows()));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(t.value.cols()));
  }
  for (const auto& t : ckpt.params.tensors) {
    for (Eigen::Index i = 0; i < t.value.size(); ++i) w.f32(static_cast<float>(t.value.data()[i]));
  }
  return w.take();
}

PolicyCheckpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw std::runtime_error("checkpoint: bad magic");
  const auto format = r.uint<std::uint32_t>();
  if (format != kCheckpointFormatVersion) {
    throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(format));
  }
  PolicyCheckpoint ckpt;
  ckpt.version = r.uint<std::uint64_t>();
  ckpt.step = r.uint<std::uint64_t>();
  ckpt.params.config = policy_config_from_text(r.str());
  const auto count = r.uint<std::uint32_t>();
  const auto layout = tensor_layout(ckpt.params.config);
  if (count != layout.size()) throw std::runtime_error("checkpoint: tensor count does not match config");
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.str();
    const auto rows = r.uint<std::uint32_t>();
    const auto cols = r.uint<std::uint32_t>();
    if (t.name != layout[i].first || static_cast<int>(rows) != layout[i].second.first ||
        static_cast<int>(cols) != layout[i].second.second) {
      throw std::runtime_error("checkpoint: tensor '" + t.name + "' does not match config layout");
    }
    t.value.resize(rows, cols);
    ckpt.params.tensors.push_back(std::move(t));
  }
  for (auto& t : ckpt.params.tensors) {
    for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = r.f32();
  }
  if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

PolicyCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

void round_to_float32(PolicyParams& params) {
  for (auto& t : params.tensors) {
    for (Eigen::Index i = 0; i < t.value.size(); ++i) {
      t.value.data()[i] = static_cast<double>(static_cast<float>(t.value.data()[i]));
    }
  }
}

}  // namespace madrl
