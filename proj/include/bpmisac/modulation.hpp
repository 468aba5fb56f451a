#pragma once

#include <cstdint>
#include <vector>

#include "bpmisac/rng.hpp"
#include "bpmisac/types.hpp"

namespace bpmisac {

using Bits = std::vector<std::uint8_t>;

/// Beam pattern modulation codebook: which N_C of K beams carry symbols, and
/// the per-beam constellation.
///
/// Bits of one channel use are laid out MSB first as
///   [index_bits | symbol bits of 1st active beam | ... | of N_C-th active beam].
/// Read as an integer, that bit string is the codeword index; codeword indices
/// are the ordering used for ML tie-breaks and for APEP pair enumeration.
struct BpmCodebook {
  int K = 0;
  int N_C = 0;
  int M = 0;
  std::vector<std::vector<int>> patterns;  // sorted 0-based beam indices
  std::vector<cplx> constellation;         // indexed by Gray bit label
  int index_bits = 0;
  int bits_per_symbol = 0;
  int symbol_bits = 0;
  int total_bits = 0;  // eta

  std::uint32_t num_codewords() const { return std::uint32_t{1} << total_bits; }
  /// Transmit vector of codeword `index`.
  CVector codeword(std::uint32_t index) const;
};

/// Patterns are the lexicographically first 2^floor(log2 C(K,N_C)) subsets.
/// M = 2 is BPSK, even log2(M) is square QAM, otherwise M-PSK; all Gray-labelled
/// and normalized to unit average energy.
BpmCodebook build_codebook(int K, int N_C, int M);

CVector map_bits(const Bits& bits, const BpmCodebook& cb);

/// Exact minimizer of ||equalized - x||^2 over all codewords, lowest index on ties.
Bits demap_ml(const CVector& equalized, const BpmCodebook& cb);

/// Same as demap_ml but returns the codeword index.
std::uint32_t detect_codeword(const CVector& equalized, const BpmCodebook& cb);

/// ML detector for y = G x + e with e ~ CN(0, C). The receiver knows G and
/// the second-order statistics C only; it whitens by the Cholesky factor of C
/// and scans every codeword image, lowest index on ties.
class WhitenedDetector {
 public:
  WhitenedDetector(const CMatrix& G, const CMatrix& C, const BpmCodebook& cb);
  std::uint32_t detect(const CVector& y) const;

 private:
  Eigen::LLT<CMatrix> chol_;
  CMatrix images_;  // whitened G x, one column per codeword
};

Bits index_to_bits(std::uint32_t index, int n_bits);
std::uint32_t bits_to_index(const Bits& bits);

/// One-hot vector of length W with a 1 at 0-based `beam`.
CVector sensing_symbol(int beam, int W);

/// Draw a sensing beam index with probabilities `d`.
int draw_sensing_beam(const RVector& d, RngStream& rng);

}  // namespace bpmisac
