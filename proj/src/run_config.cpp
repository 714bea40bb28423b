#include "mglm/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace mglm {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      // corpus generation
      "corpus.k", "corpus.lexicon_size", "corpus.min_len", "corpus.max_len", "corpus.transforms",
      "corpus.seed", "corpus.n",
      // model
      "model.layers", "model.dim", "model.heads", "model.ffn", "model.max_pos", "model.seed",
      // training
      "train.regime", "train.src", "train.tgt", "train.prior", "train.tree_tau", "train.lr",
      "train.iters", "train.warmup_frac", "train.batch", "train.seed", "train.eval_every",
      "train.threads", "train.mask_mode", "train.span_mass_weights", "train.mix_weights",
      // decoding
      "decode.mode", "decode.temperature", "decode.max_iters", "decode.seed",
      "decode.max_truncated_frac",
      // evaluation
      "eval.temps", "eval.samples", "eval.sources", "eval.n", "eval.seed", "eval.threads",
      "eval.max_iters", "eval.bleu_floor", "eval.out_dir",
  };
  return keys;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  if (key == "train.mix_weights" && !value.empty())
    throw ConfigError("config key 'train.mix_weights' is reserved and not implemented; "
                      "train with a single regime");
  values_[key] = value;
}

RunConfig RunConfig::load(const std::string& file_path, const std::vector<std::string>& overrides) {
  RunConfig cfg;
  if (!file_path.empty()) {
    std::ifstream f(file_path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file " + file_path);
    std::string line;
    long line_no = 0;
    while (std::getline(f, line)) {
      ++line_no;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(file_path + ":" + std::to_string(line_no) + ": expected key = value");
      cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
  }
  for (const std::string& ov : overrides) {
    size_t eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + ov + "' is not key=value");
    cfg.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
  }
  return cfg;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string* RunConfig::find(const std::string& key) const {
  if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string RunConfig::get_string(const std::string& key, const std::string& def) const {
  const std::string* v = find(key);
  std::string out = v ? *v : def;
  resolved_[key] = out;
  return out;
}

long RunConfig::get_int(const std::string& key, long def) const {
  const std::string* v = find(key);
  if (!v) {
    resolved_[key] = std::to_string(def);
    return def;
  }
  try {
    size_t pos = 0;
    long out = std::stol(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("");
    resolved_[key] = *v;
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected integer, got '" + *v + "'");
  }
}

double RunConfig::get_double(const std::string& key, double def) const {
  const std::string* v = find(key);
  if (!v) {
    std::ostringstream os;
    os << def;
    resolved_[key] = os.str();
    return def;
  }
  try {
    size_t pos = 0;
    double out = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("");
    resolved_[key] = *v;
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected number, got '" + *v + "'");
  }
}

uint64_t RunConfig::get_u64(const std::string& key, uint64_t def) const {
  const std::string* v = find(key);
  if (!v) {
    resolved_[key] = std::to_string(def);
    return def;
  }
  try {
    size_t pos = 0;
    unsigned long long out = std::stoull(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("");
    resolved_[key] = *v;
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected unsigned integer, got '" + *v + "'");
  }
}

std::vector<std::string> RunConfig::get_list(const std::string& key, const std::string& def) const {
  std::string raw = get_string(key, def);
  std::vector<std::string> out;
  std::string cur;
  for (char c : raw) {
    if (c == ',') {
      std::string t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur += c;
    }
  }
  std::string t = trim(cur);
  if (!t.empty()) out.push_back(t);
  return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key, const std::string& def) const {
  std::vector<double> out;
  for (const std::string& s : get_list(key, def)) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(s, &pos));
      if (pos != s.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': expected number list, got '" + s + "'");
    }
  }
  return out;
}

void RunConfig::write_resolved(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_resolved: cannot open " + path);
  for (const auto& [k, v] : resolved_) f << k << " = " << v << "\n";
}

}  // namespace mglm
