#include "bpmisac/modulation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace bpmisac {

namespace {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

int gray_decode(int g) {
  int b = 0;
  for (; g; g >>= 1) b ^= g;
  return b;
}

std::vector<cplx> gray_constellation(int M) {
  std::vector<cplx> pts(M);
  const int m = std::countr_zero(static_cast<unsigned>(M));
  if (M == 2) {
    pts[0] = -1.0;
    pts[1] = 1.0;
  } else if (m % 2 == 0) {
    // Square QAM: label = [I Gray bits | Q Gray bits].
    const int side = 1 << (m / 2);
    for (int label = 0; label < M; ++label) {
      const int gi = gray_decode(label >> (m / 2));
      const int gq = gray_decode(label & (side - 1));
      pts[label] = {2.0 * gi - (side - 1), 2.0 * gq - (side - 1)};
    }
  } else {
    for (int label = 0; label < M; ++label)
      pts[label] = std::polar(1.0, 2.0 * kPi * gray_decode(label) / M);
  }
  double energy = 0;
  for (const auto& p : pts) energy += std::norm(p);
  const double scale = std::sqrt(M / energy);
  for (auto& p : pts) p *= scale;
  return pts;
}

}  // namespace

BpmCodebook build_codebook(int K, int N_C, int M) {
  if (K < 1 || N_C < 1 || N_C > K)
    throw InvalidParameter("build_codebook: need 1 <= N_C <= K, got K=" + std::to_string(K) +
                           ", N_C=" + std::to_string(N_C));
  if (M < 2 || !std::has_single_bit(static_cast<unsigned>(M)))
    throw InvalidParameter("build_codebook: M must be a power of two >= 2, got " +
                           std::to_string(M));
  if (K > 30) throw InvalidParameter("build_codebook: K too large");

  BpmCodebook cb;
  cb.K = K;
  cb.N_C = N_C;
  cb.M = M;
  const std::uint64_t total = binomial(K, N_C);
  cb.index_bits = std::bit_width(total) - 1;
  cb.bits_per_symbol = std::countr_zero(static_cast<unsigned>(M));
  cb.symbol_bits = N_C * cb.bits_per_symbol;
  cb.total_bits = cb.index_bits + cb.symbol_bits;
  if (cb.total_bits > 30) throw InvalidParameter("build_codebook: more than 30 bits per use");

  const std::size_t keep = std::size_t{1} << cb.index_bits;
  std::vector<int> current(N_C);
  for (int i = 0; i < N_C; ++i) current[i] = i;
  while (cb.patterns.size() < keep) {
    cb.patterns.push_back(current);
    int i = N_C - 1;
    while (i >= 0 && current[i] == K - N_C + i) --i;
    if (i < 0) break;
    ++current[i];
    for (int j = i + 1; j < N_C; ++j) current[j] = current[j - 1] + 1;
  }
  cb.constellation = gray_constellation(M);
  return cb;
}

CVector BpmCodebook::codeword(std::uint32_t index) const {
  CVector x = CVector::Zero(K);
  const std::uint32_t sym_mask = (std::uint32_t{1} << bits_per_symbol) - 1;
  const auto& pattern = patterns[index >> symbol_bits];
  for (int s = 0; s < N_C; ++s) {
    const int shift = (N_C - 1 - s) * bits_per_symbol;
    x[pattern[s]] = constellation[(index >> shift) & sym_mask];
  }
  return x;
}

Bits index_to_bits(std::uint32_t index, int n_bits) {
  Bits bits(n_bits);
  for (int i = 0; i < n_bits; ++i) bits[i] = (index >> (n_bits - 1 - i)) & 1u;
  return bits;
}

std::uint32_t bits_to_index(const Bits& bits) {
  std::uint32_t v = 0;
  for (auto b : bits) v = (v << 1) | (b & 1u);
  return v;
}

CVector map_bits(const Bits& bits, const BpmCodebook& cb) {
  if (static_cast<int>(bits.size()) != cb.total_bits)
    throw DimensionMismatch("map_bits: expected " + std::to_string(cb.total_bits) +
                            " bits, got " + std::to_string(bits.size()));
  return cb.codeword(bits_to_index(bits));
}

std::uint32_t detect_codeword(const CVector& y, const BpmCodebook& cb) {
  if (y.size() != cb.K) throw DimensionMismatch("detect_codeword: length must equal K");
  // The metric separates over beams: inactive beams cost |y_k|^2, active beams
  // cost the distance to their own nearest point. Per-beam lowest-label minima
  // inside the lowest-index best pattern give the lowest-index global minimizer.
  const int M = cb.M;
  thread_local std::vector<double> best_dist;
  thread_local std::vector<int> best_label;
  best_dist.assign(cb.K, 0.0);
  best_label.assign(cb.K, 0);
  double energy = 0;
  for (int k = 0; k < cb.K; ++k) {
    double bd = std::numeric_limits<double>::infinity();
    int bl = 0;
    for (int m = 0; m < M; ++m) {
      const double dist = std::norm(y[k] - cb.constellation[m]);
      if (dist < bd) {
        bd = dist;
        bl = m;
      }
    }
    best_dist[k] = bd;
    best_label[k] = bl;
    energy += std::norm(y[k]);
  }
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_pattern = 0;
  for (std::uint32_t p = 0; p < cb.patterns.size(); ++p) {
    double metric = energy;
    for (int k : cb.patterns[p]) metric += best_dist[k] - std::norm(y[k]);
    if (metric < best) {
      best = metric;
      best_pattern = p;
    }
  }
  std::uint32_t index = best_pattern;
  for (int k : cb.patterns[best_pattern])
    index = (index << cb.bits_per_symbol) | static_cast<std::uint32_t>(best_label[k]);
  return index;
}

WhitenedDetector::WhitenedDetector(const CMatrix& G, const CMatrix& C, const BpmCodebook& cb) {
  if (G.rows() != C.rows() || C.rows() != C.cols() || G.cols() != cb.K)
    throw DimensionMismatch("WhitenedDetector: G must be n x K and C n x n");
  const Eigen::Index n = C.rows();
  const double ridge = 1e-12 * std::max(C.trace().real() / n, 1e-12);
  chol_.compute(C + ridge * CMatrix::Identity(n, n));
  images_.resize(n, cb.num_codewords());
  for (std::uint32_t i = 0; i < cb.num_codewords(); ++i) images_.col(i) = G * cb.codeword(i);
  chol_.matrixL().solveInPlace(images_);
}

std::uint32_t WhitenedDetector::detect(const CVector& y) const {
  if (y.size() != images_.rows()) throw DimensionMismatch("WhitenedDetector: bad length");
  const CVector w = chol_.matrixL().solve(y);
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t index = 0;
  for (Eigen::Index i = 0; i < images_.cols(); ++i) {
    const double m = (images_.col(i) - w).squaredNorm();
    if (m < best) {
      best = m;
      index = static_cast<std::uint32_t>(i);
    }
  }
  return index;
}

Bits demap_ml(const CVector& equalized, const BpmCodebook& cb) {
  return index_to_bits(detect_codeword(equalized, cb), cb.total_bits);
}

CVector sensing_symbol(int beam, int W) {
  if (beam < 0 || beam >= W)
    throw InvalidParameter("sensing_symbol: beam " + std::to_string(beam) + " out of range [0," +
                           std::to_string(W) + ")");
  CVector x = CVector::Zero(W);
  x[beam] = 1.0;
  return x;
}

int draw_sensing_beam(const RVector& d, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    acc += d[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(d.size()) - 1;
}

}  // namespace bpmisac
