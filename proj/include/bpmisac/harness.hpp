#pragma once

#include <string>
#include <vector>

#include "bpmisac/baselines.hpp"
#include "bpmisac/config.hpp"
#include "bpmisac/modulation.hpp"

namespace bpmisac {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const;
  void write(const std::string& path) const;
};

/// Decimal with 12 significant digits.
std::string format_double(double v);

/// sigma^2 from E_b/N0 = N_C / (eta sigma^2).
double noise_power_for(double ebn0_db, int n_active, int eta);

/// Design inputs shared by all runners, for one (mu, sigma^2).
DesignParams design_params(const ExperimentConfig& cfg, double mu, double sigma2);

/// Codebook a method transmits with (P-BPM activates every beam).
BpmCodebook method_codebook(const ExperimentConfig& cfg, const std::string& method);

/// Designs the transceiver for `method` on channel `ch`.
TransceiverDesign design_method(const std::string& method, const ChannelRealization& ch,
                                const DesignParams& prm, RngStream& rng);

enum class DetectorKind {
  Ml,         // likelihood metric with interference + noise whitened
  Euclidean,  // nearest codeword to the equalized vector
};

DetectorKind parse_detector(const std::string& name);

/// Sends `symbols` random codewords through the designed link and counts bit errors.
long long count_bit_errors(const TransceiverDesign& design, const BpmCodebook& cb, double sigma2,
                           const RVector& d, int symbols, RngStream& rng,
                           DetectorKind detector = DetectorKind::Euclidean);

CsvTable run_ber_sweep(const ExperimentConfig& cfg, int threads);
CsvTable run_tradeoff(const ExperimentConfig& cfg, int threads);
CsvTable run_doa_rmse(const ExperimentConfig& cfg, int threads);
CsvTable run_convergence(const ExperimentConfig& cfg, int threads);
CsvTable run_apep(const ExperimentConfig& cfg, int threads);
CsvTable run_design(const ExperimentConfig& cfg, int threads);

}  // namespace bpmisac
