#include "bpmisac/channel.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace bpmisac {

CVector steering_vector(int n, double angle) {
  if (n < 1) throw InvalidParameter("steering_vector: n must be >= 1");
  CVector a(n);
  const double s = std::sin(angle);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) a[i] = std::polar(scale, -kPi * i * s);
  return a;
}

CVector steering_derivative(int n, double angle) {
  CVector a = steering_vector(n, angle);
  const double c = std::cos(angle);
  for (int i = 0; i < n; ++i) a[i] *= cplx(0.0, -kPi * i * c);
  return a;
}

CMatrix dft_codebook(int n) {
  if (n < 1) throw InvalidParameter("dft_codebook: n must be >= 1");
  CMatrix F(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      // Reduce i*k mod n first so the phase argument stays small.
      const long long ik = (static_cast<long long>(i) * k) % n;
      F(i, k) = std::polar(scale, 2.0 * kPi * static_cast<double>(ik) / n);
    }
  }
  return F;
}

double dft_grid_angle(int n, int k) {
  double s = std::fmod(-2.0 * k / n + 1.0, 2.0);
  if (s < 0) s += 2.0;
  return std::asin(s - 1.0);
}

CMatrix assemble_channel(int n_tx, int n_rx, const CVector& gains, const RVector& aod,
                         const RVector& aoa) {
  const auto P = gains.size();
  if (aod.size() != P || aoa.size() != P)
    throw DimensionMismatch("assemble_channel: gains/aod/aoa length mismatch");
  CMatrix H = CMatrix::Zero(n_rx, n_tx);
  const double scale = std::sqrt(static_cast<double>(n_tx) * n_rx / static_cast<double>(P));
  for (Eigen::Index i = 0; i < P; ++i) {
    H.noalias() +=
        (scale * gains[i]) * steering_vector(n_rx, aoa[i]) * steering_vector(n_tx, aod[i]).adjoint();
  }
  return H;
}

ChannelRealization generate_channel(int n_tx, int n_rx, int num_paths, RngStream& rng) {
  if (num_paths < 1) throw InvalidParameter("generate_channel: num_paths must be >= 1");
  if (n_tx < 1 || n_rx < 1) throw InvalidParameter("generate_channel: array sizes must be >= 1");
  ChannelRealization ch;
  ch.n_tx = n_tx;
  ch.n_rx = n_rx;
  ch.gains.resize(num_paths);
  ch.aod.resize(num_paths);
  ch.aoa.resize(num_paths);
  for (int i = 0; i < num_paths; ++i) {
    ch.gains[i] = rng.complex_normal();
    ch.aod[i] = -kPi / 2 + kPi * rng.uniform();
    ch.aoa[i] = -kPi / 2 + kPi * rng.uniform();
  }
  ch.H = assemble_channel(n_tx, n_rx, ch.gains, ch.aod, ch.aoa);
  return ch;
}

ChannelRealization generate_on_grid_channel(int n_tx, int n_rx, int num_paths, RngStream& rng) {
  if (num_paths < 1) throw InvalidParameter("generate_on_grid_channel: num_paths must be >= 1");
  const int cells = n_tx * n_rx;
  if (num_paths > cells)
    throw InvalidParameter("generate_on_grid_channel: more paths than beamspace cells");
  // Partial Fisher-Yates over the cell indices.
  std::vector<int> idx(cells);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < num_paths; ++i) {
    const int j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(cells - i));
    std::swap(idx[i], idx[j]);
  }
  ChannelRealization ch;
  ch.n_tx = n_tx;
  ch.n_rx = n_rx;
  ch.gains.resize(num_paths);
  ch.aod.resize(num_paths);
  ch.aoa.resize(num_paths);
  for (int i = 0; i < num_paths; ++i) {
    const int row = idx[i] % n_rx;
    const int col = idx[i] / n_rx;
    ch.gains[i] = rng.complex_normal();
    ch.aoa[i] = dft_grid_angle(n_rx, row);
    ch.aod[i] = dft_grid_angle(n_tx, col);
  }
  ch.H = assemble_channel(n_tx, n_rx, ch.gains, ch.aod, ch.aoa);
  return ch;
}

CMatrix beamspace_transform(const CMatrix& H) {
  return dft_codebook(static_cast<int>(H.rows())).adjoint() * H *
         dft_codebook(static_cast<int>(H.cols()));
}

CMatrix inverse_beamspace_transform(const CMatrix& Hbar) {
  return dft_codebook(static_cast<int>(Hbar.rows())) * Hbar *
         dft_codebook(static_cast<int>(Hbar.cols())).adjoint();
}

EffectiveDigitalChannels effective_digital_channels(const CMatrix& H, const CMatrix& F_C,
                                                    const CMatrix& F_S, const CMatrix& W_RF) {
  if (F_C.rows() != H.cols() || F_S.rows() != H.cols() || W_RF.rows() != H.rows() ||
      W_RF.cols() != F_C.cols()) {
    throw DimensionMismatch("effective_digital_channels: H is " + std::to_string(H.rows()) + "x" +
                            std::to_string(H.cols()) + ", F_C " + std::to_string(F_C.rows()) +
                            "x" + std::to_string(F_C.cols()) + ", F_S " +
                            std::to_string(F_S.rows()) + "x" + std::to_string(F_S.cols()) +
                            ", W_RF " + std::to_string(W_RF.rows()) + "x" +
                            std::to_string(W_RF.cols()));
  }
  const CMatrix WH = W_RF.adjoint() * H;
  return {WH * F_C, WH * F_S};
}

}  // namespace bpmisac
