#include "bpmisac/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace bpmisac {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("not a finite number");
  return v;
}

long long to_int(const std::string& s) {
  std::size_t used = 0;
  const long long v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument("not an integer");
  return v;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

Setter int_field(int ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& v) {
    const long long x = to_int(v);
    if (x < -1000000000LL || x > 1000000000LL) throw std::invalid_argument("integer out of range");
    c.*field = static_cast<int>(x);
  };
}
Setter double_field(double ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& v) { c.*field = to_double(v); };
}
Setter string_field(std::string ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& v) { c.*field = v; };
}
Setter doubles_field(std::vector<double> ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(to_double(item));
    c.*field = out;
  };
}
Setter ints_field(std::vector<int> ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& v) {
    std::vector<int> out;
    for (const auto& item : split_list(v)) out.push_back(static_cast<int>(to_int(item)));
    c.*field = out;
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"architecture", string_field(&ExperimentConfig::architecture)},
      {"bits", int_field(&ExperimentConfig::bits)},
      {"mas_init", string_field(&ExperimentConfig::mas_init)},
      {"detector", string_field(&ExperimentConfig::detector)},
      {"n_tx", int_field(&ExperimentConfig::n_tx)},
      {"n_rx", int_field(&ExperimentConfig::n_rx)},
      {"n_echo", int_field(&ExperimentConfig::n_echo)},
      {"paths", int_field(&ExperimentConfig::paths)},
      {"K", int_field(&ExperimentConfig::K)},
      {"N_C", int_field(&ExperimentConfig::N_C)},
      {"M", int_field(&ExperimentConfig::M)},
      {"scan_dirs_deg", doubles_field(&ExperimentConfig::scan_dirs_deg)},
      {"sensing_power", double_field(&ExperimentConfig::sensing_power)},
      {"ideal_pattern", doubles_field(&ExperimentConfig::ideal_pattern)},
      {"activation_probs", doubles_field(&ExperimentConfig::activation_probs)},
      {"target_angles_deg", doubles_field(&ExperimentConfig::target_angles_deg)},
      {"target_gains", doubles_field(&ExperimentConfig::target_gains)},
      {"mu", doubles_field(&ExperimentConfig::mu)},
      {"ebn0_db", doubles_field(&ExperimentConfig::ebn0_db)},
      {"sensing_snr_db", doubles_field(&ExperimentConfig::sensing_snr_db)},
      {"tradeoff_ebn0_db", double_field(&ExperimentConfig::tradeoff_ebn0_db)},
      {"design_ebn0_db", double_field(&ExperimentConfig::design_ebn0_db)},
      {"methods",
       [](ExperimentConfig& c, const std::string& v) { c.methods = split_list(v); }},
      {"convergence_n_tx", ints_field(&ExperimentConfig::convergence_n_tx)},
      {"trials", int_field(&ExperimentConfig::trials)},
      {"symbols", int_field(&ExperimentConfig::symbols)},
      {"L_cand", int_field(&ExperimentConfig::L_cand)},
      {"L_snap", int_field(&ExperimentConfig::L_snap)},
      {"max_iter", int_field(&ExperimentConfig::max_iter)},
      {"tol", double_field(&ExperimentConfig::tol)},
      {"seed",
       [](ExperimentConfig& c, const std::string& v) {
         std::size_t used = 0;
         c.seed = std::stoull(v, &used);
         if (used != v.size()) throw std::invalid_argument("not an unsigned integer");
       }},
  };
  return table;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, double>)
      out += fmt(xs[i]);
    else if constexpr (std::is_same_v<T, int>)
      out += std::to_string(xs[i]);
    else
      out += xs[i];
  }
  return out;
}

}  // namespace

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> names = {"bpm_isac", "unoptimized", "on_grid", "pbpm",
                                                 "maxsinr",  "spim",        "edc"};
  return names;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("invalid config: " + msg); };
  if (architecture != "mbs" && architecture != "mas") fail("architecture must be mbs or mas");
  if (architecture == "mas" && (bits < 1 || bits > 8)) fail("bits must be in 1..8 for mas");
  if (mas_init != "random" && mas_init != "misdp") fail("mas_init must be random or misdp");
  if (detector != "ml" && detector != "euclidean") fail("detector must be ml or euclidean");
  if (n_tx < 2 || n_rx < 2 || n_tx > 512 || n_rx > 512) fail("array sizes must be in 2..512");
  if (n_echo != n_tx) fail("n_echo must equal n_tx (the echo combiner reuses F_S)");
  if (paths < 1) fail("paths must be positive");
  if (K < 1 || N_C < 1 || N_C > K) fail("need 1 <= N_C <= K");
  if (M < 2 || (M & (M - 1)) != 0) fail("M must be a power of two >= 2");
  const std::size_t W = scan_dirs_deg.size();
  if (W < 1) fail("scan_dirs_deg must not be empty");
  for (double a : scan_dirs_deg)
    if (!(a >= -90 && a < 90)) fail("scan directions must lie in [-90, 90)");
  if (!(sensing_power >= 0)) fail("sensing_power must be nonnegative");
  if (!ideal_pattern.empty() && ideal_pattern.size() != W)
    fail("ideal_pattern needs one value per scan direction");
  if (!activation_probs.empty()) {
    if (activation_probs.size() != W) fail("activation_probs needs one value per scan direction");
    double s = 0;
    for (double p : activation_probs) {
      if (p < 0) fail("activation_probs must be nonnegative");
      s += p;
    }
    if (std::abs(s - 1) > 1e-9) fail("activation_probs must sum to 1");
  }
  if (!ideal_pattern.empty()) {
    double power = 0;
    for (std::size_t i = 0; i < W; ++i) {
      const double d = activation_probs.empty() ? 1.0 / W : activation_probs[i];
      power += d * ideal_pattern[i] * ideal_pattern[i];
    }
    if (std::abs(power - sensing_power) > 1e-9 * std::max(1.0, sensing_power))
      fail("ideal_pattern power sum d t^2 must equal sensing_power");
  }
  if (target_angles_deg.size() != target_gains.size())
    fail("target_angles_deg and target_gains must have equal length");
  if (target_angles_deg.size() >= W) fail("need fewer targets than scan directions");
  for (double m : mu)
    if (!(m >= 0 && m <= 1)) fail("mu values must lie in [0, 1]");
  for (const auto& m : methods)
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
      fail("unknown method '" + m + "'");
  for (int n : convergence_n_tx)
    if (n < 2 || n > 512) fail("convergence_n_tx values must be in 2..512");
  if (trials < 1 || symbols < 1) fail("trials and symbols must be positive");
  if (L_cand < K) fail("L_cand must be at least K");
  if (L_snap < 1) fail("L_snap must be positive");
  if (max_iter < 1 || !(tol > 0)) fail("max_iter and tol must be positive");
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "architecture=" << architecture << '\n'
     << "bits=" << bits << '\n'
     << "mas_init=" << mas_init << '\n'
     << "detector=" << detector << '\n'
     << "n_tx=" << n_tx << '\n'
     << "n_rx=" << n_rx << '\n'
     << "n_echo=" << n_echo << '\n'
     << "paths=" << paths << '\n'
     << "K=" << K << '\n'
     << "N_C=" << N_C << '\n'
     << "M=" << M << '\n'
     << "scan_dirs_deg=" << join(scan_dirs_deg) << '\n'
     << "sensing_power=" << fmt(sensing_power) << '\n'
     << "ideal_pattern=" << join(ideal_pattern) << '\n'
     << "activation_probs=" << join(activation_probs) << '\n'
     << "target_angles_deg=" << join(target_angles_deg) << '\n'
     << "target_gains=" << join(target_gains) << '\n'
     << "mu=" << join(mu) << '\n'
     << "ebn0_db=" << join(ebn0_db) << '\n'
     << "sensing_snr_db=" << join(sensing_snr_db) << '\n'
     << "tradeoff_ebn0_db=" << fmt(tradeoff_ebn0_db) << '\n'
     << "design_ebn0_db=" << fmt(design_ebn0_db) << '\n'
     << "methods=" << join(methods) << '\n'
     << "convergence_n_tx=" << join(convergence_n_tx) << '\n'
     << "trials=" << trials << '\n'
     << "symbols=" << symbols << '\n'
     << "L_cand=" << L_cand << '\n'
     << "L_snap=" << L_snap << '\n'
     << "max_iter=" << max_iter << '\n'
     << "tol=" << fmt(tol) << '\n'
     << "seed=" << seed << '\n';
  return os.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(where + "bad value for '" + key + "': " + value + " (" + e.what() + ")");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace bpmisac
