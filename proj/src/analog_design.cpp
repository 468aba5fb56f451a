#include "bpmisac/analog_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bpmisac/channel.hpp"

namespace bpmisac {

namespace {

std::vector<cplx> phase_table(int bits, double scale) {
  const int Q = 1 << bits;
  std::vector<cplx> table(Q);
  for (int k = 0; k < Q; ++k) table[k] = std::polar(scale, 2.0 * kPi * k / Q);
  return table;
}

int nearest_phase(double angle, int bits) {
  const int Q = 1 << bits;
  const double step = 2.0 * kPi / Q;
  long k = static_cast<long>(std::floor(angle / step + 0.5));
  k %= Q;
  if (k < 0) k += Q;
  return static_cast<int>(k);
}

void check_bits(int bits) {
  if (bits < 1 || bits > 16)
    throw InvalidParameter("phase resolution must be between 1 and 16 bits, got " +
                           std::to_string(bits));
}

}  // namespace

SensingDesign design_sensing_mbs(const RVector& scan_dirs, int n_tx) {
  if (scan_dirs.size() < 1) throw InvalidParameter("design_sensing_mbs: need at least one scan direction");
  const CMatrix F = dft_codebook(n_tx);
  SensingDesign out;
  out.F_S.resize(n_tx, scan_dirs.size());
  for (Eigen::Index l = 0; l < scan_dirs.size(); ++l) {
    const RVector gains = (F.adjoint() * steering_vector(n_tx, scan_dirs[l])).cwiseAbs();
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < gains.size(); ++k)
      if (gains[k] > gains[best]) best = k;
    const int col = static_cast<int>(best);
    if (std::find(out.omega.begin(), out.omega.end(), col) != out.omega.end())
      throw InfeasibleSelection("design_sensing_mbs: scan directions " + std::to_string(l) +
                                " and an earlier one share DFT codeword " + std::to_string(col));
    out.omega.push_back(col);
    out.F_S.col(l) = F.col(best);
  }
  return out;
}

BnbResult design_sensing_mas_bnb(double scan_dir, int n_tx, int bits) {
  check_bits(bits);
  if (n_tx < 1) throw InvalidParameter("design_sensing_mas_bnb: n_tx must be positive");
  const int Q = 1 << bits;
  const double inv_n = 1.0 / n_tx;
  const CVector a = steering_vector(n_tx, scan_dir);
  const auto phases = phase_table(bits, 1.0);
  // term(i, k): contribution conj(a_i) q_i of entry i at phase k.
  CMatrix term(n_tx, Q);
  for (int i = 0; i < n_tx; ++i)
    for (int k = 0; k < Q; ++k) term(i, k) = std::conj(a[i]) * phases[k] / std::sqrt(double(n_tx));

  struct Node {
    cplx partial;
    std::vector<std::uint8_t> phase;
  };

  // Aligned continuation quantized entry by entry; returns the completed value.
  auto complete = [&](const Node& node, std::vector<std::uint8_t>* out) {
    const double target = std::arg(node.partial);
    cplx sum = node.partial;
    if (out) *out = node.phase;
    for (int i = static_cast<int>(node.phase.size()); i < n_tx; ++i) {
      const int k = nearest_phase(target + std::arg(a[i]), bits);
      sum += term(i, k);
      if (out) out->push_back(static_cast<std::uint8_t>(k));
    }
    return std::abs(sum);
  };

  BnbResult result;
  std::vector<Node> frontier{Node{term(0, 0), {0}}};
  std::vector<std::uint8_t> best;
  double incumbent = complete(frontier[0], &best);
  result.nodes = 1;

  for (int n = 1; n < n_tx && !frontier.empty(); ++n) {
    std::vector<Node> next;
    const double remaining = (n_tx - n - 1) * inv_n;
    for (const Node& node : frontier) {
      for (int k = 0; k < Q; ++k) {
        Node child{node.partial + term(n, k), node.phase};
        child.phase.push_back(static_cast<std::uint8_t>(k));
        ++result.nodes;
        if (std::abs(child.partial) + remaining <= incumbent) continue;
        std::vector<std::uint8_t> filled;
        const double lb = complete(child, &filled);
        if (lb > incumbent) {
          incumbent = lb;
          best = std::move(filled);
        }
        if (n + 1 < n_tx) next.push_back(std::move(child));
      }
    }
    frontier = std::move(next);
  }

  result.column.resize(n_tx);
  for (int i = 0; i < n_tx; ++i) result.column[i] = phases[best[i]] / std::sqrt(double(n_tx));
  result.gain = std::abs(a.dot(result.column));
  return result;
}

CMatrix design_sensing_mas(const RVector& scan_dirs, int n_tx, int bits) {
  CMatrix F_S(n_tx, scan_dirs.size());
  for (Eigen::Index l = 0; l < scan_dirs.size(); ++l)
    F_S.col(l) = design_sensing_mas_bnb(scan_dirs[l], n_tx, bits).column;
  return F_S;
}

RVector sensing_gains(const CMatrix& F_S, const RVector& scan_dirs) {
  if (F_S.cols() != scan_dirs.size())
    throw DimensionMismatch("sensing_gains: one column per scan direction required");
  RVector g(scan_dirs.size());
  for (Eigen::Index l = 0; l < scan_dirs.size(); ++l)
    g[l] = std::abs(steering_vector(static_cast<int>(F_S.rows()), scan_dirs[l]).dot(F_S.col(l)));
  return g;
}

CMatrix quantize_phases(const CMatrix& X, int bits) {
  check_bits(bits);
  const auto table = phase_table(bits, 1.0 / std::sqrt(double(X.rows())));
  CMatrix out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      out(i, j) = table[nearest_phase(std::arg(X(i, j)), bits)];
  return out;
}

double mse_bar(const CMatrix& H_C, const CMatrix& H_S, const CommMseParams& prm) {
  const RVector ones = RVector::Ones(H_C.cols());
  const CMatrix W0 = initial_equalizer(H_C, H_S, prm);
  return symbol_mse(H_C, H_S, ones, prm.t, prm.d, prm.sigma2, prm.ratio, W0);
}

BeamSelection select_comm_beams_mbs(const CMatrix& Hbar, const std::vector<int>& omega, int K,
                                    int L_cand, SelectionCriterion criterion,
                                    const CommMseParams& prm) {
  const int n_rx = static_cast<int>(Hbar.rows());
  const int n_tx = static_cast<int>(Hbar.cols());
  if (K < 1) throw InvalidParameter("select_comm_beams_mbs: K must be positive");
  if (L_cand < K) throw InvalidParameter("select_comm_beams_mbs: L_cand must be at least K");
  std::vector<bool> blocked(n_tx, false);
  for (int c : omega) {
    if (c < 0 || c >= n_tx) throw InvalidParameter("select_comm_beams_mbs: sensing column out of range");
    blocked[c] = true;
  }

  struct Pair {
    int row, col;
    double mag;
  };
  std::vector<Pair> pairs;
  for (int j = 0; j < n_tx; ++j) {
    if (blocked[j]) continue;
    for (int i = 0; i < n_rx; ++i) pairs.push_back({i, j, std::abs(Hbar(i, j))});
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& x, const Pair& y) { return x.mag > y.mag; });
  if (static_cast<int>(pairs.size()) > L_cand) pairs.resize(L_cand);
  const int L = static_cast<int>(pairs.size());

  const int W = static_cast<int>(omega.size());
  CMatrix H_C(K, K), H_S(K, W);
  RVector leak(n_rx);
  for (int i = 0; i < n_rx; ++i) {
    double s = 0;
    for (int c : omega) s += std::norm(Hbar(i, c));
    leak[i] = s;
  }

  auto score = [&](const std::vector<int>& pick) {
    if (criterion == SelectionCriterion::MaxSinr) {
      double worst = std::numeric_limits<double>::infinity();
      for (int idx : pick) {
        const Pair& pr = pairs[idx];
        worst = std::min(worst, pr.mag * pr.mag / (leak[pr.row] + prm.sigma2));
      }
      return -worst;
    }
    for (int k = 0; k < K; ++k) {
      const int r = pairs[pick[k]].row;
      for (int l = 0; l < K; ++l) H_C(k, l) = Hbar(r, pairs[pick[l]].col);
      for (int w = 0; w < W; ++w) H_S(k, w) = Hbar(r, omega[w]);
    }
    return mse_bar(H_C, H_S, prm);
  };

  std::vector<int> pick, best;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<bool> row_used(n_rx, false), col_used(n_tx, false);
  // Depth-first walk visits K-combinations in lexicographic order.
  auto recurse = [&](auto&& self, int start) -> void {
    if (static_cast<int>(pick.size()) == K) {
      const double s = score(pick);
      if (s < best_score) {
        best_score = s;
        best = pick;
      }
      return;
    }
    for (int idx = start; idx <= L - (K - static_cast<int>(pick.size())); ++idx) {
      const Pair& pr = pairs[idx];
      if (row_used[pr.row] || col_used[pr.col]) continue;
      row_used[pr.row] = col_used[pr.col] = true;
      pick.push_back(idx);
      self(self, idx + 1);
      pick.pop_back();
      row_used[pr.row] = col_used[pr.col] = false;
    }
  };
  recurse(recurse, 0);
  if (best.empty())
    throw InfeasibleSelection("select_comm_beams_mbs: no " + std::to_string(K) +
                              " candidate pairs with distinct rows and columns among " +
                              std::to_string(L));

  BeamSelection sel;
  sel.sensing_cols = omega;
  for (int idx : best) {
    sel.rx_rows.push_back(pairs[idx].row);
    sel.tx_cols.push_back(pairs[idx].col);
  }
  return sel;
}

AnalogCommDesign refine_comm_analog_mas(const CMatrix& H, const CMatrix& F_S, CMatrix F_C,
                                        CMatrix W_RF, int bits, const CommMseParams& prm,
                                        double tol, int max_sweeps) {
  check_bits(bits);
  const int n_tx = static_cast<int>(H.cols());
  const int n_rx = static_cast<int>(H.rows());
  const int K = static_cast<int>(F_C.cols());
  if (F_C.rows() != n_tx || W_RF.rows() != n_rx || W_RF.cols() != K || F_S.rows() != n_tx)
    throw DimensionMismatch("refine_comm_analog_mas: F_C N_t x K, W_RF N_r x K, F_S N_t x W");
  const int Q = 1 << bits;
  const auto tx_phase = phase_table(bits, 1.0 / std::sqrt(double(n_tx)));
  const auto rx_phase = phase_table(bits, 1.0 / std::sqrt(double(n_rx)));

  const CMatrix HFS = H * F_S;
  CMatrix HF, G, H_C, H_S;
  auto rebuild = [&] {
    HF = H * F_C;
    G = W_RF.adjoint() * H;
    H_C = W_RF.adjoint() * HF;
    H_S = W_RF.adjoint() * HFS;
  };
  rebuild();

  AnalogCommDesign out;
  double current = mse_bar(H_C, H_S, prm);

  auto update_tx = [&](int i, int z) {
    const cplx old = F_C(i, z);
    int best_k = -1;
    double best_val = current;
    const CVector base = H_C.col(z);
    for (int k = 0; k < Q; ++k) {
      if (tx_phase[k] == old) continue;
      H_C.col(z) = base + G.col(i) * (tx_phase[k] - old);
      const double v = mse_bar(H_C, H_S, prm);
      if (v < best_val) {
        best_val = v;
        best_k = k;
      }
    }
    H_C.col(z) = base;
    if (best_k >= 0) {
      const cplx delta = tx_phase[best_k] - old;
      F_C(i, z) = tx_phase[best_k];
      HF.col(z) += H.col(i) * delta;
      H_C.col(z) += G.col(i) * delta;
      current = best_val;
    }
    out.trace.push_back(current);
  };

  auto update_rx = [&](int i, int z) {
    const cplx old = W_RF(i, z);
    int best_k = -1;
    double best_val = current;
    const Eigen::RowVectorXcd base_c = H_C.row(z);
    const Eigen::RowVectorXcd base_s = H_S.row(z);
    for (int k = 0; k < Q; ++k) {
      if (rx_phase[k] == old) continue;
      const cplx delta = std::conj(rx_phase[k] - old);
      H_C.row(z) = base_c + delta * HF.row(i);
      H_S.row(z) = base_s + delta * HFS.row(i);
      const double v = mse_bar(H_C, H_S, prm);
      if (v < best_val) {
        best_val = v;
        best_k = k;
      }
    }
    H_C.row(z) = base_c;
    H_S.row(z) = base_s;
    if (best_k >= 0) {
      const cplx delta = std::conj(rx_phase[best_k] - old);
      W_RF(i, z) = rx_phase[best_k];
      H_C.row(z) += delta * HF.row(i);
      H_S.row(z) += delta * HFS.row(i);
      G.row(z) += delta * H.row(i);
      current = best_val;
    }
    out.trace.push_back(current);
  };

  for (int z = 0; z < K; ++z) {
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      const double before = current;
      for (int i = 0; i < n_tx; ++i) update_tx(i, z);
      for (int i = 0; i < n_rx; ++i) update_rx(i, z);
      ++out.sweeps;
      if (before - current < tol) break;
    }
  }

  out.F_C = std::move(F_C);
  out.W_RF = std::move(W_RF);
  out.objective = current;
  return out;
}

AnalogCommDesign design_comm_analog_mas(const CMatrix& H, const CMatrix& F_S, int K, int bits,
                                        MasInit init, const CommMseParams& prm, RngStream& rng) {
  check_bits(bits);
  const int n_tx = static_cast<int>(H.cols());
  const int n_rx = static_cast<int>(H.rows());
  if (init == MasInit::Misdp) {
    const MisdpInit start = misdp_init(H, F_S, K, bits, prm);
    return refine_comm_analog_mas(H, F_S, start.F_C, start.W_RF, bits, prm);
  }
  const int Q = 1 << bits;
  auto random_phases = [&](int rows) {
    const auto table = phase_table(bits, 1.0 / std::sqrt(double(rows)));
    CMatrix X(rows, K);
    for (int j = 0; j < K; ++j)
      for (int i = 0; i < rows; ++i)
        X(i, j) = table[static_cast<int>(rng() % static_cast<std::uint64_t>(Q))];
    return X;
  };
  CMatrix F_C = random_phases(n_tx);
  CMatrix W_RF = random_phases(n_rx);
  return refine_comm_analog_mas(H, F_S, std::move(F_C), std::move(W_RF), bits, prm);
}

}  // namespace bpmisac
