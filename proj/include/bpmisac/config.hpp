#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bpmisac {

/// Raised for malformed or inconsistent configuration; message carries the
/// source name and line number when one applies.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat experiment description. Defaults reproduce the reference setup:
/// 32x32 arrays, 8 paths, K=4 beams with 3 active, 4-QAM, three scans at
/// 38/44/50 degrees, T_R=5, targets at 39 and 43 degrees.
struct ExperimentConfig {
  std::string architecture = "mbs";  // mbs | mas
  int bits = 1;                      // phase-shifter resolution for mas
  std::string mas_init = "random";   // random | misdp
  std::string detector = "euclidean";  // euclidean | ml
  int n_tx = 32;
  int n_rx = 32;
  int n_echo = 32;
  int paths = 8;
  int K = 4;
  int N_C = 3;
  int M = 4;
  std::vector<double> scan_dirs_deg{38, 44, 50};
  double sensing_power = 5;
  std::vector<double> ideal_pattern;      // empty: sqrt(T_R) on every scan
  std::vector<double> activation_probs;   // empty: uniform
  std::vector<double> target_angles_deg{39, 43};
  std::vector<double> target_gains{1, 1};
  std::vector<double> mu{0.1, 0.5, 0.8};
  std::vector<double> ebn0_db{0, 5, 10, 15, 20};
  std::vector<double> sensing_snr_db{0, 10, 20, 30};
  double tradeoff_ebn0_db = 0;
  double design_ebn0_db = 10;
  std::vector<std::string> methods{"bpm_isac", "pbpm", "maxsinr"};
  std::vector<int> convergence_n_tx{32, 64, 128};
  int trials = 200;
  int symbols = 100;
  int L_cand = 20;
  int L_snap = 64;
  int max_iter = 50;
  double tol = 1e-3;
  std::uint64_t seed = 1;

  /// Throws ConfigError on inconsistent values.
  void validate() const;

  /// Deterministic key=value dump of every field, used for hashing.
  std::string canonical() const;

  /// FNV-1a 64 of canonical(), hex encoded.
  std::string hash() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Methods understood by the BER and trade-off runners.
const std::vector<std::string>& known_methods();

}  // namespace bpmisac
