#pragma once

#include <cstdint>
#include <vector>

#include "bpmisac/digital_design.hpp"
#include "bpmisac/rng.hpp"
#include "bpmisac/types.hpp"

namespace bpmisac {

// ---- sensing precoder ------------------------------------------------------

struct SensingDesign {
  CMatrix F_S;             // N_t x W
  std::vector<int> omega;  // DFT column per scan direction (MBS only)
};

/// Best DFT codeword per scan direction. Throws InfeasibleSelection when two
/// directions resolve to the same codeword.
SensingDesign design_sensing_mbs(const RVector& scan_dirs, int n_tx);

struct BnbResult {
  CVector column;
  double gain = 0;  // |a^H(theta) q|
  std::int64_t nodes = 0;
};

/// Global maximizer of |a^H(scan_dir) q| over q with entries exp(j 2 pi k / 2^B) / sqrt(N_t).
/// Breadth-first branch and bound; q[0] is pinned to phase 0 since the
/// objective ignores a common phase.
BnbResult design_sensing_mas_bnb(double scan_dir, int n_tx, int bits);

/// Column-wise B&B for every scan direction.
CMatrix design_sensing_mas(const RVector& scan_dirs, int n_tx, int bits);

/// |a^H(theta_i) F_S[:,i]| for each column.
RVector sensing_gains(const CMatrix& F_S, const RVector& scan_dirs);

/// Entry-wise nearest B-bit phase, scaled to 1/sqrt(rows).
CMatrix quantize_phases(const CMatrix& X, int bits);

// ---- communication beams, MBS ---------------------------------------------

enum class SelectionCriterion { MinMse, MaxSinr };

struct BeamSelection {
  std::vector<int> tx_cols;       // K DFT columns of F_{N_t}
  std::vector<int> rx_rows;       // K DFT columns of F_{N_r}
  std::vector<int> sensing_cols;  // Omega
};

/// Communication MSE of the unoptimized digital part (p = 1, b = t, initial LMMSE).
double mse_bar(const CMatrix& H_C, const CMatrix& H_S, const CommMseParams& prm);

/// Two-stage selection on the beamspace channel: keep the L_cand strongest
/// admissible (row, column) pairs, then enumerate K-subsets with distinct rows
/// and columns. Ties go to the earliest subset in combination order.
BeamSelection select_comm_beams_mbs(const CMatrix& Hbar, const std::vector<int>& omega, int K,
                                    int L_cand, SelectionCriterion criterion,
                                    const CommMseParams& prm);

// ---- communication beams, MAS ----------------------------------------------

struct AnalogCommDesign {
  CMatrix F_C;   // N_t x K
  CMatrix W_RF;  // N_r x K
  std::vector<double> trace;  // objective after every single-entry update
  int sweeps = 0;
  double objective = 0;
};

enum class MasInit { Random, Misdp };

/// Entry-wise phase iteration from the given starting point.
AnalogCommDesign refine_comm_analog_mas(const CMatrix& H, const CMatrix& F_S, CMatrix F_C,
                                        CMatrix W_RF, int bits, const CommMseParams& prm,
                                        double tol = 1e-3, int max_sweeps = 50);

/// Initializes (random phases or MISDP) and refines entry-wise.
AnalogCommDesign design_comm_analog_mas(const CMatrix& H, const CMatrix& F_S, int K, int bits,
                                        MasInit init, const CommMseParams& prm, RngStream& rng);

// ---- MISDP initializer -----------------------------------------------------

/// (K+W) * lambda_max(G J^-1 G^H): the smallest w making the Schur block
/// matrix positive semidefinite. +inf when J is singular.
double misdp_objective(const CMatrix& H, const CMatrix& F_S, const CMatrix& F_C,
                       const CMatrix& W_RF, const CommMseParams& prm);

/// The block matrix [w/(K+W) I, G; G^H, J].
CMatrix misdp_block_matrix(double w, const CMatrix& H, const CMatrix& F_S, const CMatrix& F_C,
                           const CMatrix& W_RF, const CommMseParams& prm);

struct MisdpStep {
  CMatrix X;  // optimized F_C or W_RF
  double w = 0;
  std::int64_t nodes = 0;
};

/// Exact minimization of misdp_objective over quantized F_C with W_RF fixed.
MisdpStep misdp_optimize_fc(const CMatrix& H, const CMatrix& F_S, const CMatrix& W_RF,
                            const CMatrix& F_C_start, int bits, const CommMseParams& prm);

/// Exact minimization over quantized W_RF with F_C fixed.
MisdpStep misdp_optimize_wrf(const CMatrix& H, const CMatrix& F_S, const CMatrix& F_C,
                             const CMatrix& W_RF_start, int bits, const CommMseParams& prm);

struct MisdpInit {
  CMatrix F_C;
  CMatrix W_RF;
  double w = 0;
  int rounds = 0;
};

/// Alternates the two exact subproblems until w improves by less than 1e-6.
/// Throws SizeLimitError unless N_t*K*B <= 24 and N_r*K*B <= 24.
MisdpInit misdp_init(const CMatrix& H, const CMatrix& F_S, int K, int bits,
                     const CommMseParams& prm);

}  // namespace bpmisac
