#pragma once

#include <vector>

#include "bpmisac/rng.hpp"
#include "bpmisac/types.hpp"

namespace bpmisac {

/// One draw of the clustered mmWave channel
///   H = sqrt(Nt*Nr/P) * sum_i gain_i * a_r(aoa_i) * a_t(aod_i)^H.
struct ChannelRealization {
  int n_tx = 0;
  int n_rx = 0;
  CVector gains;
  RVector aod;
  RVector aoa;
  CMatrix H;

  int num_paths() const { return static_cast<int>(gains.size()); }
};

/// Low-dimensional channels seen through the analog network.
struct EffectiveDigitalChannels {
  CMatrix H_C;  // K x K
  CMatrix H_S;  // K x W
};

/// ULA response with element law exp(-j*pi*i*sin(angle)) / sqrt(n).
CVector steering_vector(int n, double angle);

/// d/dangle of steering_vector.
CVector steering_derivative(int n, double angle);

/// Unitary DFT codebook. Column k is the steering vector at the on-grid angle
/// arcsin(mod(-2k/n + 1, 2) - 1), i.e. F[i,k] = exp(j*2*pi*i*k/n)/sqrt(n).
CMatrix dft_codebook(int n);

/// Angle represented by DFT codeword k of an n-element array.
double dft_grid_angle(int n, int k);

/// Rebuild H from path parameters.
CMatrix assemble_channel(int n_tx, int n_rx, const CVector& gains, const RVector& aod,
                         const RVector& aoa);

/// Gains i.i.d. CN(0,1), angles uniform on [-pi/2, pi/2).
ChannelRealization generate_channel(int n_tx, int n_rx, int num_paths, RngStream& rng);

/// Paths placed on distinct DFT grid cells (beamspace entries), chosen uniformly.
/// The beamspace channel then has exactly `num_paths` nonzero entries.
ChannelRealization generate_on_grid_channel(int n_tx, int n_rx, int num_paths, RngStream& rng);

/// F_{Nr}^H * H * F_{Nt}.
CMatrix beamspace_transform(const CMatrix& H);

/// Inverse of beamspace_transform.
CMatrix inverse_beamspace_transform(const CMatrix& Hbar);

/// H_C = W_RF^H H F_C, H_S = W_RF^H H F_S.
EffectiveDigitalChannels effective_digital_channels(const CMatrix& H, const CMatrix& F_C,
                                                    const CMatrix& F_S, const CMatrix& W_RF);

}  // namespace bpmisac
