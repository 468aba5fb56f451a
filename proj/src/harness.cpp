#include "bpmisac/harness.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>

#include "bpmisac/analysis.hpp"
#include "bpmisac/sensing.hpp"

namespace bpmisac {

namespace {

// Runs fn(trial) for every trial on `threads` workers and returns the results
// in trial order, so the reduction never depends on scheduling.
template <typename Result>
std::vector<Result> for_each_trial(int trials, int threads,
                                   const std::function<Result(int)>& fn) {
  std::vector<Result> results(trials);
  std::vector<std::exception_ptr> errors(trials);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < trials; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min(threads, trials));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

RngStream trial_stream(const ExperimentConfig& cfg, int trial) {
  return RngStream(cfg.seed).split(static_cast<std::uint64_t>(trial));
}

RVector scan_dirs(const ExperimentConfig& cfg) {
  RVector v(cfg.scan_dirs_deg.size());
  for (std::size_t i = 0; i < cfg.scan_dirs_deg.size(); ++i) v[i] = deg2rad(cfg.scan_dirs_deg[i]);
  return v;
}

RVector activation(const ExperimentConfig& cfg) {
  const auto W = static_cast<Eigen::Index>(cfg.scan_dirs_deg.size());
  if (cfg.activation_probs.empty()) return RVector::Constant(W, 1.0 / W);
  return Eigen::Map<const RVector>(cfg.activation_probs.data(), W);
}

RVector ideal(const ExperimentConfig& cfg) {
  const auto W = static_cast<Eigen::Index>(cfg.scan_dirs_deg.size());
  if (cfg.ideal_pattern.empty()) return RVector::Constant(W, std::sqrt(cfg.sensing_power));
  return Eigen::Map<const RVector>(cfg.ideal_pattern.data(), W);
}

ChannelRealization channel_for(const ExperimentConfig& cfg, const std::string& method,
                               const RngStream& trial_rng, int n_tx) {
  if (method == "on_grid") {
    RngStream r = trial_rng.split(1);
    return generate_on_grid_channel(n_tx, cfg.n_rx, cfg.paths, r);
  }
  RngStream r = trial_rng.split(0);
  return generate_channel(n_tx, cfg.n_rx, cfg.paths, r);
}

SensingScene scene_for(const ExperimentConfig& cfg, double noise_power) {
  SensingScene s;
  const auto N = static_cast<Eigen::Index>(cfg.target_angles_deg.size());
  s.target_angles.resize(N);
  s.reflections.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    s.target_angles[i] = deg2rad(cfg.target_angles_deg[i]);
    s.reflections[i] = cfg.target_gains[i];
  }
  s.scan_dirs = scan_dirs(cfg);
  s.t = ideal(cfg);
  s.d = activation(cfg);
  s.sensing_power = cfg.sensing_power;
  s.echo_noise_power = noise_power;
  return s;
}

double sensing_mse(const TransceiverDesign& D, const DesignParams& prm) {
  return beampattern_mse(beampattern(D.F_S, D.b, prm.scan_dirs), prm.t, prm.d);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << str();
}

double noise_power_for(double ebn0_db, int n_active, int eta) {
  return static_cast<double>(n_active) / (eta * std::pow(10.0, ebn0_db / 10.0));
}

DesignParams design_params(const ExperimentConfig& cfg, double mu, double sigma2) {
  DesignParams prm;
  prm.K = cfg.K;
  prm.N_C = cfg.N_C;
  prm.bits = cfg.architecture == "mbs" ? 0 : cfg.bits;
  prm.L_cand = cfg.L_cand;
  prm.scan_dirs = scan_dirs(cfg);
  prm.t = ideal(cfg);
  prm.d = activation(cfg);
  prm.sensing_power = cfg.sensing_power;
  prm.sigma2 = sigma2;
  prm.mu = mu;
  prm.mas_init = cfg.mas_init == "misdp" ? MasInit::Misdp : MasInit::Random;
  prm.max_iter = cfg.max_iter;
  prm.tol = cfg.tol;
  return prm;
}

BpmCodebook method_codebook(const ExperimentConfig& cfg, const std::string& method) {
  return build_codebook(cfg.K, method == "pbpm" ? cfg.K : cfg.N_C, cfg.M);
}

TransceiverDesign design_method(const std::string& method, const ChannelRealization& ch,
                                const DesignParams& base, RngStream& rng) {
  DesignParams prm = base;
  if (method == "bpm_isac") return design_bpm_isac(ch, prm, rng);
  if (method == "unoptimized") {
    prm.optimize_digital = false;
    return design_bpm_isac(ch, prm, rng);
  }
  if (method == "on_grid") {
    prm.bits = 0;
    prm.optimize_digital = false;
    return design_bpm_isac(ch, prm, rng);
  }
  if (method == "pbpm") {
    prm.N_C = prm.K;
    return design_baseline(BaselineKind::PBPM, ch, prm, rng);
  }
  if (method == "maxsinr") {
    prm.bits = 0;
    return design_baseline(BaselineKind::MaxSINR, ch, prm, rng);
  }
  return design_baseline(parse_baseline(method), ch, prm, rng);
}

DetectorKind parse_detector(const std::string& name) {
  if (name == "ml") return DetectorKind::Ml;
  if (name == "euclidean") return DetectorKind::Euclidean;
  throw ConfigError("unknown detector '" + name + "'");
}

long long count_bit_errors(const TransceiverDesign& D, const BpmCodebook& cb, double sigma2,
                           const RVector& d, int symbols, RngStream& rng, DetectorKind detector) {
  const double sd = std::sqrt(sigma2);
  const CMatrix A = D.W_BB * D.H_C * D.p.asDiagonal();
  const CMatrix S = D.W_BB * D.H_S;
  const Eigen::Index K = D.H_C.rows();
  std::optional<WhitenedDetector> ml;
  if (detector == DetectorKind::Ml) {
    // Covariance of what the equalizer passes besides the wanted codeword.
    const RVector sensing_var = (D.b.array().square() * d.array()).matrix();
    ml.emplace(A, S * sensing_var.asDiagonal() * S.adjoint() + sigma2 * D.W_BB * D.W_BB.adjoint(),
               cb);
  }
  CVector noise(K);
  long long errors = 0;
  for (int s = 0; s < symbols; ++s) {
    const auto index = static_cast<std::uint32_t>(rng() >> (64 - cb.total_bits));
    const int beam = draw_sensing_beam(d, rng);
    for (Eigen::Index i = 0; i < K; ++i) noise[i] = sd * rng.complex_normal();
    const CVector est = A * cb.codeword(index) + S.col(beam) * D.b[beam] + D.W_BB * noise;
    const std::uint32_t found =
        ml ? ml->detect(est) : detect_codeword(est, cb);
    errors += std::popcount(index ^ found);
  }
  return errors;
}

CsvTable run_ber_sweep(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  struct Cell {
    std::string method;
    double mu, ebn0;
  };
  std::vector<Cell> cells;
  for (const auto& m : cfg.methods)
    for (double mu : cfg.mu)
      for (double e : cfg.ebn0_db) cells.push_back({m, mu, e});

  const auto per_trial = for_each_trial<std::vector<long long>>(
      cfg.trials, threads, [&](int trial) {
        const RngStream trial_rng = trial_stream(cfg, trial);
        std::vector<long long> errs(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
          const Cell& cell = cells[c];
          const BpmCodebook cb = method_codebook(cfg, cell.method);
          const double sigma2 = noise_power_for(cell.ebn0, cb.N_C, cb.total_bits);
          const DesignParams prm = design_params(cfg, cell.mu, sigma2);
          const ChannelRealization ch = channel_for(cfg, cell.method, trial_rng, cfg.n_tx);
          RngStream cell_rng = trial_rng.split(16 + c);
          RngStream design_rng = cell_rng.split(0);
          RngStream symbol_rng = cell_rng.split(1);
          const TransceiverDesign D = design_method(cell.method, ch, prm, design_rng);
          errs[c] = count_bit_errors(D, cb, sigma2, prm.d, cfg.symbols, symbol_rng,
                                     parse_detector(cfg.detector));
        }
        return errs;
      });

  CsvTable table;
  table.header = {"method", "mu", "ebn0_db", "trials", "bit_errors", "ber", "config_hash"};
  const std::string hash = cfg.hash();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    long long errors = 0;
    for (const auto& t : per_trial) errors += t[c];
    const BpmCodebook cb = method_codebook(cfg, cells[c].method);
    const double bits = static_cast<double>(cfg.trials) * cfg.symbols * cb.total_bits;
    table.rows.push_back({cells[c].method, format_double(cells[c].mu),
                          format_double(cells[c].ebn0), std::to_string(cfg.trials),
                          std::to_string(errors), format_double(errors / bits), hash});
  }
  return table;
}

CsvTable run_tradeoff(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  struct Cell {
    std::string method;
    double mu;
  };
  std::vector<Cell> cells;
  for (const auto& m : cfg.methods)
    for (double mu : cfg.mu) cells.push_back({m, mu});
  struct Acc {
    std::vector<long long> errors;
    std::vector<double> mse;
  };
  const auto per_trial = for_each_trial<Acc>(cfg.trials, threads, [&](int trial) {
    const RngStream trial_rng = trial_stream(cfg, trial);
    Acc acc{std::vector<long long>(cells.size()), std::vector<double>(cells.size())};
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const BpmCodebook cb = method_codebook(cfg, cells[c].method);
      const double sigma2 = noise_power_for(cfg.tradeoff_ebn0_db, cb.N_C, cb.total_bits);
      const DesignParams prm = design_params(cfg, cells[c].mu, sigma2);
      const ChannelRealization ch = channel_for(cfg, cells[c].method, trial_rng, cfg.n_tx);
      RngStream cell_rng = trial_rng.split(16 + c);
      RngStream design_rng = cell_rng.split(0);
      RngStream symbol_rng = cell_rng.split(1);
      const TransceiverDesign D = design_method(cells[c].method, ch, prm, design_rng);
      acc.errors[c] = count_bit_errors(D, cb, sigma2, prm.d, cfg.symbols, symbol_rng,
                                     parse_detector(cfg.detector));
      acc.mse[c] = sensing_mse(D, prm);
    }
    return acc;
  });
  CsvTable table;
  table.header = {"method", "mu", "ebn0_db", "trials", "ber", "beampattern_mse", "config_hash"};
  const std::string hash = cfg.hash();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    long long errors = 0;
    double mse = 0;
    for (const auto& t : per_trial) {
      errors += t.errors[c];
      mse += t.mse[c];
    }
    const BpmCodebook cb = method_codebook(cfg, cells[c].method);
    const double bits = static_cast<double>(cfg.trials) * cfg.symbols * cb.total_bits;
    table.rows.push_back({cells[c].method, format_double(cells[c].mu),
                          format_double(cfg.tradeoff_ebn0_db), std::to_string(cfg.trials),
                          format_double(errors / bits), format_double(mse / cfg.trials), hash});
  }
  return table;
}

CsvTable run_doa_rmse(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const std::size_t n_mu = cfg.mu.size();
  const std::size_t n_snr = cfg.sensing_snr_db.size();
  const auto N = static_cast<int>(cfg.target_angles_deg.size());
  const RVector truth = scene_for(cfg, 1.0).target_angles;
  const int W = static_cast<int>(cfg.scan_dirs_deg.size());
  const double samples = static_cast<double>(W) * cfg.L_snap;
  struct Acc {
    std::vector<double> sq_err, crb;
  };
  const auto per_trial = for_each_trial<Acc>(cfg.trials, threads, [&](int trial) {
    const RngStream trial_rng = trial_stream(cfg, trial);
    Acc acc{std::vector<double>(n_mu * n_snr), std::vector<double>(n_mu * n_snr)};
    const BpmCodebook cb = method_codebook(cfg, "bpm_isac");
    const double sigma2 = noise_power_for(cfg.design_ebn0_db, cb.N_C, cb.total_bits);
    const ChannelRealization ch = channel_for(cfg, "bpm_isac", trial_rng, cfg.n_tx);
    for (std::size_t m = 0; m < n_mu; ++m) {
      const DesignParams prm = design_params(cfg, cfg.mu[m], sigma2);
      RngStream design_rng = trial_rng.split(16 + m);
      const TransceiverDesign D = design_method("bpm_isac", ch, prm, design_rng);
      const MusicGrid grid = default_music_grid(prm.scan_dirs);
      for (std::size_t s = 0; s < n_snr; ++s) {
        const double noise = cfg.sensing_power / std::pow(10.0, cfg.sensing_snr_db[s] / 10.0);
        const SensingScene scene = scene_for(cfg, noise);
        RngStream echo_rng = trial_rng.split(1024 + m * n_snr + s);
        const CMatrix Y = simulate_coherent_block(scene, D.F_S, D.b, cfg.L_snap, echo_rng);
        const auto est = music_doa(Y, D.F_S, N, grid);
        const double rmse = assignment_rmse(est, truth);
        acc.sq_err[m * n_snr + s] = rmse * rmse;
        double crb = 0;
        for (int i = 0; i < N; ++i) crb += crb_doa(scene, D.F_S, D.b, i);
        acc.crb[m * n_snr + s] = N ? crb / N / samples : 0.0;
      }
    }
    return acc;
  });
  CsvTable table;
  table.header = {"mu", "sensing_snr_db", "trials", "rmse_deg", "crb_deg", "config_hash"};
  const std::string hash = cfg.hash();
  for (std::size_t m = 0; m < n_mu; ++m)
    for (std::size_t s = 0; s < n_snr; ++s) {
      double sq = 0, crb = 0;
      for (const auto& t : per_trial) {
        sq += t.sq_err[m * n_snr + s];
        crb += t.crb[m * n_snr + s];
      }
      table.rows.push_back({format_double(cfg.mu[m]), format_double(cfg.sensing_snr_db[s]),
                            std::to_string(cfg.trials),
                            format_double(rad2deg(std::sqrt(sq / cfg.trials))),
                            format_double(rad2deg(std::sqrt(crb / cfg.trials))), hash});
    }
  return table;
}

CsvTable run_convergence(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  struct Cell {
    int n_tx;
    double mu;
  };
  std::vector<Cell> cells;
  for (int n : cfg.convergence_n_tx)
    for (double mu : cfg.mu) cells.push_back({n, mu});
  const auto per_trial = for_each_trial<std::vector<std::vector<double>>>(
      cfg.trials, threads, [&](int trial) {
        const RngStream trial_rng = trial_stream(cfg, trial);
        std::vector<std::vector<double>> traces(cells.size());
        const BpmCodebook cb = method_codebook(cfg, "bpm_isac");
        const double sigma2 = noise_power_for(cfg.design_ebn0_db, cb.N_C, cb.total_bits);
        for (std::size_t c = 0; c < cells.size(); ++c) {
          const ChannelRealization ch = channel_for(cfg, "bpm_isac", trial_rng, cells[c].n_tx);
          const DesignParams prm = design_params(cfg, cells[c].mu, sigma2);
          RngStream design_rng = trial_rng.split(16 + c);
          traces[c] = design_method("bpm_isac", ch, prm, design_rng).digital.trace;
        }
        return traces;
      });
  CsvTable table;
  table.header = {"mu", "n_tx", "trial", "iteration", "objective", "config_hash"};
  const std::string hash = cfg.hash();
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const auto& tr = per_trial[trial][c];
      for (std::size_t it = 0; it < tr.size(); ++it)
        table.rows.push_back({format_double(cells[c].mu), std::to_string(cells[c].n_tx),
                              std::to_string(trial), std::to_string(it + 1),
                              format_double(tr[it]), hash});
    }
  return table;
}

CsvTable run_apep(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const BpmCodebook cb = method_codebook(cfg, "bpm_isac");
  const int W = static_cast<int>(cfg.scan_dirs_deg.size());
  const auto values = for_each_trial<double>(
      static_cast<int>(cfg.ebn0_db.size()), threads, [&](int i) {
        return apep(cfg.paths, W, cfg.n_tx, cfg.n_rx,
                    noise_power_for(cfg.ebn0_db[i], cb.N_C, cb.total_bits), cb);
      });
  const double floor = apep_floor(cfg.paths, W, cfg.n_tx, cfg.n_rx, cb);
  CsvTable table;
  table.header = {"ebn0_db", "sigma2", "apep", "apep_floor", "config_hash"};
  const std::string hash = cfg.hash();
  for (std::size_t i = 0; i < cfg.ebn0_db.size(); ++i)
    table.rows.push_back({format_double(cfg.ebn0_db[i]),
                          format_double(noise_power_for(cfg.ebn0_db[i], cb.N_C, cb.total_bits)),
                          format_double(values[i]), format_double(floor), hash});
  return table;
}

CsvTable run_design(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  struct Cell {
    std::string method;
    double mu;
  };
  std::vector<Cell> cells;
  for (const auto& m : cfg.methods)
    for (double mu : cfg.mu) cells.push_back({m, mu});
  const auto per_trial = for_each_trial<std::vector<std::vector<std::string>>>(
      cfg.trials, threads, [&](int trial) {
        const RngStream trial_rng = trial_stream(cfg, trial);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t c = 0; c < cells.size(); ++c) {
          const BpmCodebook cb = method_codebook(cfg, cells[c].method);
          const double sigma2 = noise_power_for(cfg.design_ebn0_db, cb.N_C, cb.total_bits);
          const DesignParams prm = design_params(cfg, cells[c].mu, sigma2);
          const ChannelRealization ch = channel_for(cfg, cells[c].method, trial_rng, cfg.n_tx);
          RngStream design_rng = trial_rng.split(16 + c);
          const TransceiverDesign D = design_method(cells[c].method, ch, prm, design_rng);
          const double ratio = static_cast<double>(cb.N_C) / cb.K;
          const double comm = symbol_mse(D.H_C, D.H_S, D.p, D.b, prm.d, sigma2, ratio, D.W_BB);
          const double gamma =
              mse_threshold(D.H_C, D.H_S, cells[c].mu,
                            CommMseParams{prm.t, prm.d, sigma2, ratio});
          rows.push_back({std::to_string(trial), cells[c].method, format_double(cells[c].mu),
                          format_double(cfg.design_ebn0_db), format_double(sensing_mse(D, prm)),
                          format_double(comm), format_double(gamma),
                          std::to_string(D.digital.iterations),
                          format_double(D.digital.kkt_residual)});
        }
        return rows;
      });
  CsvTable table;
  table.header = {"trial",    "method",         "mu",         "ebn0_db",     "beampattern_mse",
                  "comm_mse", "mse_threshold", "iterations", "kkt_residual", "config_hash"};
  const std::string hash = cfg.hash();
  for (const auto& trial_rows : per_trial)
    for (auto row : trial_rows) {
      row.push_back(hash);
      table.rows.push_back(std::move(row));
    }
  return table;
}

}  // namespace bpmisac
