#pragma once

#include "bpmisac/modulation.hpp"
#include "bpmisac/types.hpp"

namespace bpmisac {

/// P(M_C = c) for c = 0..P: how many paths remain usable for communication
/// after W sensing columns block the receive rows they hit. Paths occupy
/// distinct beamspace cells chosen uniformly.
RVector effective_path_distribution(int num_paths, int W, int n_tx, int n_rx);

/// Beta function via log-gamma.
double beta_function(double p, double q);

/// Analytic pairwise error probability of mistaking codeword x for x_hat
/// under ML detection, with the two-exponential Q-function approximation and
/// the K strongest of c effective paths carrying the K beams.
double pairwise_error_probability(const CVector& x, const CVector& x_hat, const RVector& path_dist,
                                  int num_paths, int n_tx, int n_rx, double sigma2,
                                  const BpmCodebook& cb);

/// Bit-error-weighted average of pairwise_error_probability over all codeword
/// pairs. SizeLimitError for more than 12 bits per codeword.
double apep(int num_paths, int W, int n_tx, int n_rx, double sigma2, const BpmCodebook& cb);

/// Noise-free limit of apep: P(M_C < K) / 2.
double apep_floor(int num_paths, int W, int n_tx, int n_rx, const BpmCodebook& cb);

}  // namespace bpmisac
