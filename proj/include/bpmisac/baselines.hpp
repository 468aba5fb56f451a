#pragma once

#include <string>

#include "bpmisac/analog_design.hpp"
#include "bpmisac/channel.hpp"
#include "bpmisac/digital_design.hpp"
#include "bpmisac/rng.hpp"

namespace bpmisac {

/// Everything needed to run one link: analog blocks, power allocations,
/// combiner and the effective channels they induce.
struct TransceiverDesign {
  CMatrix F_C, F_S, W_RF;
  RVector p, b;
  CMatrix W_BB;
  CMatrix H_C, H_S;
  RVector sensing_gains;
  std::vector<int> omega;          // MBS sensing columns
  DigitalSolution digital;         // empty trace when the digital part is not optimized
};

struct DesignParams {
  int K = 4;
  int N_C = 3;
  int bits = 0;  // phase-shifter resolution; 0 selects the DFT (MBS) architecture
  int L_cand = 20;
  RVector scan_dirs;
  RVector t;
  RVector d;
  double sensing_power = 5;
  double sigma2 = 1;
  double mu = 0.5;
  SelectionCriterion criterion = SelectionCriterion::MinMse;
  MasInit mas_init = MasInit::Random;
  bool optimize_digital = true;
  int max_iter = 50;
  double tol = 1e-3;

  CommMseParams comm() const { return {t, d, sigma2, static_cast<double>(N_C) / K}; }
};

/// Sensing precoder for the configured architecture.
SensingDesign design_sensing(const DesignParams& prm, int n_tx);

/// Analog design followed by the digital alternating optimization.
TransceiverDesign design_bpm_isac(const ChannelRealization& ch, const DesignParams& prm,
                                  RngStream& rng);

enum class BaselineKind { PBPM, MaxSINR, SPIM, EDC };

BaselineKind parse_baseline(const std::string& name);

/// Comparison transceivers. PBPM expects prm.N_C == prm.K.
TransceiverDesign design_baseline(BaselineKind kind, const ChannelRealization& ch,
                                  const DesignParams& prm, RngStream& rng);

}  // namespace bpmisac
