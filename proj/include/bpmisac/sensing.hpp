#pragma once

#include <vector>

#include "bpmisac/rng.hpp"
#include "bpmisac/types.hpp"

namespace bpmisac {

/// Targets, scan plan and echo noise for one sensing experiment.
struct SensingScene {
  RVector target_angles;   // psi, radians
  CVector reflections;     // beta
  RVector scan_dirs;       // radians
  RVector t;               // ideal per-direction amplitude
  RVector d;               // beam activation probabilities
  double sensing_power = 0;     // T_R
  double echo_noise_power = 0;  // sigma_R^2

  /// Checks sum(d) = 1 and sum(d t^2) = T_R.
  void validate() const;
};

/// |b_i a^H(theta_i) F_S[:,i]|.
RVector beampattern(const CMatrix& F_S, const RVector& b, const RVector& scan_dirs);

/// sum d_i (v_i - t_i)^2.
double beampattern_mse(const RVector& v, const RVector& t, const RVector& d);

/// L echo snapshots while sensing beam `beam` is active. The reflection
/// phases are redrawn once per call (one call per scan); magnitudes are kept.
/// Returns W x L.
CMatrix simulate_echo(const SensingScene& scene, const CMatrix& F_S, const RVector& b, int beam,
                      int n_samples, RngStream& rng);

/// One scan per beam in order, L snapshots each: W x (W*L).
CMatrix simulate_coherent_block(const SensingScene& scene, const CMatrix& F_S, const RVector& b,
                                int n_samples, RngStream& rng);

struct MusicGrid {
  double lo = 0;    // radians
  double hi = 0;
  double step = 0;
};

/// Scan sector padded by 5 degrees each side, 0.02 degree steps.
MusicGrid default_music_grid(const RVector& scan_dirs);

/// Beamspace MUSIC on prewhitened snapshots; returns `n_targets` angles in
/// ascending order.
std::vector<double> music_doa(const CMatrix& snapshots, const CMatrix& F_S, int n_targets,
                              const MusicGrid& grid);

/// Per-sample CRB of target `target` (radians^2), averaged over the
/// activation probabilities. Noise covariance is sigma_R^2 F_S^H F_S.
double crb_doa(const SensingScene& scene, const CMatrix& F_S, const RVector& b, int target);

/// Root mean squared error under the best estimate-to-target assignment.
double assignment_rmse(const std::vector<double>& estimates, const RVector& truth);

}  // namespace bpmisac
