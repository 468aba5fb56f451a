#include "bpmisac/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace bpmisac {

namespace {

double log_choose(double n, double k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

// lgamma differences lose ~1e-12 relative accuracy at a few thousand cells, so
// small binomials are formed as exact-order products instead.
constexpr double kProductLimit = 64;

long double choose(double n, double k) {
  k = std::min(k, n - k);
  long double c = 1;
  for (int i = 1; i <= static_cast<int>(k); ++i) c = c * (n - k + i) / i;
  return c;
}

// Hypergeometric-style ratio of binomials; zero when any numerator term is empty.
double choose_ratio(double n1, double k1, double n2, double k2, double nd, double kd) {
  if (k1 < 0 || k1 > n1 || k2 < 0 || k2 > n2 || kd < 0 || kd > nd) return 0.0;
  if (std::min(kd, nd - kd) <= kProductLimit && std::min(k1, n1 - k1) <= kProductLimit &&
      std::min(k2, n2 - k2) <= kProductLimit)
    return static_cast<double>(choose(n1, k1) * choose(n2, k2) / choose(nd, kd));
  const double l = log_choose(n1, k1) + log_choose(n2, k2) - log_choose(nd, kd);
  return std::isfinite(l) ? std::exp(l) : 0.0;
}

void check_domain(int P, int W, int n_tx, int n_rx) {
  if (n_tx < 1 || n_rx < 1 || P < 0 || W < 0 || W >= n_tx || P > n_tx * n_rx)
    throw InvalidParameter("path distribution needs 0 <= W < N_t and 0 <= P <= N_t*N_r (P=" +
                           std::to_string(P) + ", W=" + std::to_string(W) + ", N_t=" +
                           std::to_string(n_tx) + ", N_r=" + std::to_string(n_rx) + ")");
}

}  // namespace

RVector effective_path_distribution(int P, int W, int n_tx, int n_rx) {
  check_domain(P, W, n_tx, n_rx);
  const double free_cells = static_cast<double>(n_rx) * (n_tx - W);
  const double sense_cells = static_cast<double>(n_rx) * W;
  const double all_cells = static_cast<double>(n_rx) * n_tx;

  // r paths fall into sensing columns.
  RVector p_r(P + 1);
  for (int r = 0; r <= P; ++r) p_r[r] = choose_ratio(free_cells, P - r, sense_cells, r, all_cells, P);

  // Those r paths occupy b distinct receive rows; built one path at a time.
  RMatrix p_b = RMatrix::Zero(P + 1, P + 1);
  p_b(0, 0) = 1.0;
  for (int r = 1; r <= P; ++r) {
    const double remaining = sense_cells - r + 1;
    if (remaining <= 0) break;
    for (int b = 1; b <= r; ++b) {
      const double fresh = p_b(r - 1, b - 1) * (n_rx - b + 1) * W / remaining;
      const double reuse = p_b(r - 1, b) * std::max(0.0, b * W - r + 1.0) / remaining;
      p_b(r, b) = fresh + reuse;
    }
  }

  RVector out = RVector::Zero(P + 1);
  out[P] = p_r[0];
  for (int c = 0; c < P; ++c) {
    double s = 0;
    for (int r = 1; r <= P - c; ++r) {
      if (p_r[r] == 0) continue;
      for (int b = 1; b <= r; ++b) {
        if (p_b(r, b) == 0) continue;
        // Of the P - r communication-column paths, c avoid the b blocked rows.
        const double p_c = choose_ratio(b * (n_tx - W), P - r - c, (n_rx - b) * double(n_tx - W),
                                        c, free_cells, P - r);
        s += p_r[r] * p_b(r, b) * p_c;
      }
    }
    out[c] = s;
  }
  return out;
}

double beta_function(double p, double q) {
  return std::exp(std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q));
}

namespace {

// Shared core: path_dist given, sorted |dx| given.
double pep_core(const std::vector<double>& dx_sorted, const RVector& path_dist, int P, int n_tx,
                int n_rx, double sigma2, int K, int eta) {
  double below_k = 0;
  for (int c = 0; c < std::min<int>(K, static_cast<int>(path_dist.size())); ++c) below_k += path_dist[c];
  double total = std::ldexp(below_k, -eta);
  if (sigma2 == 0) return total;
  if (!(sigma2 < std::numeric_limits<double>::infinity())) {
    double at_least = 0;
    for (int c = K; c <= P; ++c) at_least += path_dist[c];
    return total + at_least / 3.0;
  }

  const double gain = static_cast<double>(n_tx) * n_rx / (static_cast<double>(P) * sigma2);
  auto term = [&](double coeff, int c) {
    // n_j = sum_{i >= j} (coeff * dx_i^2 + 1), 1-based j.
    std::vector<double> n(K + 1, 0.0);
    for (int j = K - 1; j >= 0; --j) n[j] = n[j + 1] + coeff * dx_sorted[j] * dx_sorted[j] + 1.0;
    double log_val = std::lgamma(c + 1.0) - std::lgamma(c - K + 1.0);
    log_val += std::lgamma(n[0]) + std::lgamma(c - K + 1.0) - std::lgamma(n[0] + c - K + 1.0);
    for (int j = 1; j < K; ++j) log_val -= std::log(n[j]);
    return std::exp(log_val);
  };
  for (int c = K; c <= P; ++c) {
    if (path_dist[c] == 0) continue;
    total += path_dist[c] * (term(gain / 4.0, c) / 12.0 + term(gain / 3.0, c) / 4.0);
  }
  return total;
}

std::vector<double> sorted_gaps(const CVector& x, const CVector& x_hat) {
  std::vector<double> dx(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) dx[i] = std::abs(x[i] - x_hat[i]);
  std::sort(dx.begin(), dx.end());
  return dx;
}

}  // namespace

double pairwise_error_probability(const CVector& x, const CVector& x_hat, const RVector& path_dist,
                                  int P, int n_tx, int n_rx, double sigma2, const BpmCodebook& cb) {
  if (x.size() != cb.K || x_hat.size() != cb.K)
    throw DimensionMismatch("pairwise_error_probability: codewords must have length K");
  if (path_dist.size() != P + 1)
    throw DimensionMismatch("pairwise_error_probability: distribution must have P+1 entries");
  if (!(sigma2 >= 0)) throw InvalidParameter("pairwise_error_probability: negative noise power");
  return pep_core(sorted_gaps(x, x_hat), path_dist, P, n_tx, n_rx, sigma2, cb.K, cb.total_bits);
}

double apep(int P, int W, int n_tx, int n_rx, double sigma2, const BpmCodebook& cb) {
  if (cb.total_bits > 12)
    throw SizeLimitError("apep: pair enumeration limited to 12 bits per codeword, got " +
                         std::to_string(cb.total_bits));
  const RVector dist = effective_path_distribution(P, W, n_tx, n_rx);
  const std::uint32_t n = cb.num_codewords();
  std::vector<CVector> words(n);
  for (std::uint32_t i = 0; i < n; ++i) words[i] = cb.codeword(i);
  double sum = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const int errors = std::popcount(i ^ j);
      sum += errors * pep_core(sorted_gaps(words[i], words[j]), dist, P, n_tx, n_rx, sigma2, cb.K,
                               cb.total_bits);
    }
  }
  return sum / (static_cast<double>(cb.total_bits) * n);
}

double apep_floor(int P, int W, int n_tx, int n_rx, const BpmCodebook& cb) {
  const RVector dist = effective_path_distribution(P, W, n_tx, n_rx);
  const double below_k = dist.head(std::min<Eigen::Index>(cb.K, dist.size())).sum();
  return below_k / 2.0;
}

}  // namespace bpmisac
