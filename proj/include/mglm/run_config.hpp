#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mglm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration: optional UTF-8 file plus command-line
// overrides. Keys must belong to the known-key whitelist; anything else is an
// error. Every accessed key (with its resolved value, default or explicit) is
// recorded so a run can echo its fully resolved configuration next to its
// outputs.
class RunConfig {
 public:
  static RunConfig load(const std::string& file_path, const std::vector<std::string>& overrides);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  long get_int(const std::string& key, long def) const;
  double get_double(const std::string& key, double def) const;
  uint64_t get_u64(const std::string& key, uint64_t def) const;
  std::vector<std::string> get_list(const std::string& key, const std::string& def) const;  // comma separated
  std::vector<double> get_double_list(const std::string& key, const std::string& def) const;

  // Fully resolved key=value lines for the keys this run touched.
  void write_resolved(const std::string& path) const;

 private:
  void set(const std::string& key, const std::string& value);
  const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace mglm
