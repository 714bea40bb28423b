#include "mglm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mglm {

namespace {

constexpr char kMagic[8] = {'M', 'G', 'L', 'M', 'C', 'K', '0', '1'};

void put_u32(std::ostream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& f, uint64_t v) {
  put_u32(f, static_cast<uint32_t>(v));
  put_u32(f, static_cast<uint32_t>(v >> 32));
}

void put_f64(std::ostream& f, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(f, bits);
}

uint32_t get_u32(std::istream& f) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (!f) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint64_t get_u64(std::istream& f) {
  uint64_t lo = get_u32(f);
  uint64_t hi = get_u32(f);
  return lo | (hi << 32);
}

double get_f64(std::istream& f) {
  uint64_t bits = get_u64(f);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& mp) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write(kMagic, 8);
  const ModelConfig& c = mp.config;
  put_u32(f, static_cast<uint32_t>(c.layers));
  put_u32(f, static_cast<uint32_t>(c.dim));
  put_u32(f, static_cast<uint32_t>(c.heads));
  put_u32(f, static_cast<uint32_t>(c.ffn));
  put_u32(f, static_cast<uint32_t>(c.vocab_size));
  put_u32(f, static_cast<uint32_t>(c.max_pos));
  put_u32(f, static_cast<uint32_t>(c.channels));
  put_u64(f, c.seed);
  put_u32(f, static_cast<uint32_t>(mp.params.size()));
  for (const Parameter& p : mp.params) {
    put_u32(f, static_cast<uint32_t>(p.name.size()));
    f.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(f, static_cast<uint32_t>(p.value.shape.size()));
    for (int d : p.value.shape) put_u32(f, static_cast<uint32_t>(d));
    for (double v : p.value.data) put_f64(f, v);
  }
  if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  ModelConfig c;
  c.layers = static_cast<int>(get_u32(f));
  c.dim = static_cast<int>(get_u32(f));
  c.heads = static_cast<int>(get_u32(f));
  c.ffn = static_cast<int>(get_u32(f));
  c.vocab_size = static_cast<int>(get_u32(f));
  c.max_pos = static_cast<int>(get_u32(f));
  c.channels = static_cast<int>(get_u32(f));
  c.seed = get_u64(f);
  ModelParams mp = ModelParams::init(c);
  uint32_t count = get_u32(f);
  if (count != mp.params.size())
    throw std::runtime_error("load_checkpoint: parameter count mismatch in " + path);
  for (Parameter& p : mp.params) {
    uint32_t name_len = get_u32(f);
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    if (!f || name != p.name)
      throw std::runtime_error("load_checkpoint: expected parameter '" + p.name + "', found '" + name + "'");
    uint32_t ndim = get_u32(f);
    std::vector<int> shape(ndim);
    for (uint32_t i = 0; i < ndim; ++i) shape[i] = static_cast<int>(get_u32(f));
    if (shape != p.value.shape)
      throw std::runtime_error("load_checkpoint: shape mismatch for parameter '" + p.name + "'");
    for (double& v : p.value.data) v = get_f64(f);
  }
  return mp;
}

}  // namespace mglm
