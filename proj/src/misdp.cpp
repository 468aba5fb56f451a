// Exact desk-scale solver for the Schur-complement initializer.
//
// For fixed analog blocks, w = (K+W) * max_v (v^H Q v) / (v^H J v) with
//   Q = G^H G = W^H H F_S diag(t^2 d) F_S^H H^H W + sigma^2 I,
//   J = W^H H F_C F_C^H H^H W.
// Any fixed test vector v gives a valid lower bound on w over all completions
// of a partial phase assignment once v^H Q v is bounded below and v^H J v
// above; the triangle inequality over the still-free unit-modulus entries
// supplies both. The search is a depth-first branch and bound with the first
// entry of every column pinned, since w is invariant to per-column phases.
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "bpmisac/analog_design.hpp"

namespace bpmisac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GenEig {
  double value = kInf;
  CVector vec;
};

// Largest generalized eigenpair of (Q, J); value = +inf when J is singular.
GenEig top_generalized_eig(const CMatrix& Q, const CMatrix& J) {
  GenEig out;
  const Eigen::Index K = J.rows();
  const double scale = std::max(J.trace().real(), 0.0);
  if (!(scale > 0)) {
    out.vec = CVector::Unit(K, 0);
    return out;
  }
  Eigen::LLT<CMatrix> llt(J);
  const double floor_pivot = 1e-12 * scale / static_cast<double>(K);
  if (llt.info() != Eigen::Success ||
      llt.matrixLLT().diagonal().real().cwiseAbs2().minCoeff() <= floor_pivot) {
    // Null direction of J: any v there has zero denominator.
    Eigen::SelfAdjointEigenSolver<CMatrix> es(J);
    out.vec = es.eigenvectors().col(0);
    return out;
  }
  const CMatrix Linv = llt.matrixL().solve(CMatrix::Identity(K, K));
  const CMatrix M = Linv * Q * Linv.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(M);
  out.value = es.eigenvalues()[K - 1];
  out.vec = Linv.adjoint() * es.eigenvectors().col(K - 1);
  return out;
}

CMatrix sensing_gram(const CMatrix& HFS, const CommMseParams& prm) {
  const RVector w = (prm.t.array().square() * prm.d.array()).matrix();
  return HFS * w.asDiagonal() * HFS.adjoint();
}

CMatrix q_matrix(const CMatrix& W_RF, const CMatrix& S, double sigma2) {
  CMatrix Q = W_RF.adjoint() * S * W_RF;
  Q.diagonal().array() += sigma2;
  return Q;
}

CMatrix j_matrix(const CMatrix& W_RF, const CMatrix& HF) {
  const CMatrix T = W_RF.adjoint() * HF;
  return T * T.adjoint();
}

std::vector<cplx> phase_values(int bits, int n) {
  const int Qn = 1 << bits;
  std::vector<cplx> v(Qn);
  for (int k = 0; k < Qn; ++k) v[k] = std::polar(1.0 / std::sqrt(double(n)), 2.0 * kPi * k / Qn);
  return v;
}

// Rotate each column so its first entry has phase 0; exact for B-bit phases.
CMatrix pin_columns(CMatrix X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const cplx first = X(0, j);
    if (std::abs(first) > 0) X.col(j) *= std::conj(first) / std::abs(first);
  }
  return X;
}

// Generic depth-first search over the free entries of X (all rows but the
// first, column-major). `bound(X, depth, v)` lower-bounds w over completions
// for test vector v; `value(X)` is the exact objective with its eigenvector.
struct PhaseBnb {
  int bits;
  std::vector<cplx> table;
  std::function<double(const CMatrix&, int, const CVector&)> bound;
  std::function<GenEig(const CMatrix&)> value;
  std::function<GenEig(const CMatrix&, int)> partial_eig;

  std::vector<std::pair<int, int>> order;
  CMatrix best;
  double best_w = kInf;
  CVector inc_vec;
  std::int64_t nodes = 0;

  double lower_bound(const CMatrix& X, int depth) {
    double lb = 0;
    if (inc_vec.size()) lb = std::max(lb, bound(X, depth, inc_vec));
    const GenEig pe = partial_eig(X, depth);
    lb = std::max(lb, bound(X, depth, pe.vec));
    return lb;
  }

  void search(CMatrix& X, int depth) {
    ++nodes;
    if (depth == static_cast<int>(order.size())) {
      const GenEig e = value(X);
      const double w = e.value;
      if (w < best_w) {
        best_w = w;
        best = X;
        inc_vec = e.vec;
      }
      return;
    }
    const auto [i, j] = order[depth];
    const int Qn = static_cast<int>(table.size());
    std::vector<std::pair<double, int>> children;
    children.reserve(Qn);
    for (int k = 0; k < Qn; ++k) {
      X(i, j) = table[k];
      children.emplace_back(lower_bound(X, depth + 1), k);
    }
    std::stable_sort(children.begin(), children.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [lb, k] : children) {
      if (lb >= best_w) break;
      X(i, j) = table[k];
      search(X, depth + 1);
    }
    X(i, j) = 0;
  }

  void run(const CMatrix& start) {
    best = pin_columns(start);
    const GenEig e = value(best);
    best_w = e.value;
    inc_vec = e.vec;
    CMatrix X = best;
    for (const auto& [i, j] : order) X(i, j) = 0;
    search(X, 0);
  }
};

std::vector<std::pair<int, int>> free_entries(int rows, int cols) {
  std::vector<std::pair<int, int>> order;
  for (int j = 0; j < cols; ++j)
    for (int i = 1; i < rows; ++i) order.emplace_back(i, j);
  return order;
}

// Entries not yet assigned at `depth` are the order[depth..] tail.
std::vector<std::vector<bool>> free_mask(const std::vector<std::pair<int, int>>& order, int depth,
                                         int rows, int cols) {
  std::vector<std::vector<bool>> mask(cols, std::vector<bool>(rows, false));
  for (std::size_t n = depth; n < order.size(); ++n) mask[order[n].second][order[n].first] = true;
  return mask;
}

void check_common(const CMatrix& H, const CMatrix& F_S, const CommMseParams& prm) {
  if (F_S.rows() != H.cols() || prm.t.size() != F_S.cols() || prm.d.size() != F_S.cols())
    throw DimensionMismatch("misdp: F_S must be N_t x W with t, d of length W");
}

}  // namespace

double misdp_objective(const CMatrix& H, const CMatrix& F_S, const CMatrix& F_C,
                       const CMatrix& W_RF, const CommMseParams& prm) {
  check_common(H, F_S, prm);
  const CMatrix Q = q_matrix(W_RF, sensing_gram(H * F_S, prm), prm.sigma2);
  const CMatrix J = j_matrix(W_RF, H * F_C);
  const double lam = top_generalized_eig(Q, J).value;
  return static_cast<double>(F_C.cols() + F_S.cols()) * lam;
}

CMatrix misdp_block_matrix(double w, const CMatrix& H, const CMatrix& F_S, const CMatrix& F_C,
                           const CMatrix& W_RF, const CommMseParams& prm) {
  check_common(H, F_S, prm);
  const Eigen::Index K = F_C.cols();
  const Eigen::Index W = F_S.cols();
  const RVector scale = (prm.t.array() * prm.d.array().sqrt()).matrix();
  CMatrix G(W + K, K);
  G.topRows(W) = scale.asDiagonal() * F_S.adjoint() * H.adjoint() * W_RF;
  G.bottomRows(K) = std::sqrt(prm.sigma2) * CMatrix::Identity(K, K);
  CMatrix Z = CMatrix::Zero(W + 2 * K, W + 2 * K);
  Z.topLeftCorner(W + K, W + K).diagonal().setConstant(w / static_cast<double>(W + K));
  Z.topRightCorner(W + K, K) = G;
  Z.bottomLeftCorner(K, W + K) = G.adjoint();
  Z.bottomRightCorner(K, K) = j_matrix(W_RF, H * F_C);
  return Z;
}

MisdpStep misdp_optimize_fc(const CMatrix& H, const CMatrix& F_S, const CMatrix& W_RF,
                            const CMatrix& F_C_start, int bits, const CommMseParams& prm) {
  check_common(H, F_S, prm);
  const int n_tx = static_cast<int>(H.cols());
  const int K = static_cast<int>(W_RF.cols());
  const int W = static_cast<int>(F_S.cols());
  const CMatrix Q = q_matrix(W_RF, sensing_gram(H * F_S, prm), prm.sigma2);
  const CMatrix A = W_RF.adjoint() * H;  // K x N_t; J = (A F)(A F)^H
  const double weight = static_cast<double>(K + W);
  const double inv_sqrt = 1.0 / std::sqrt(double(n_tx));

  PhaseBnb bnb;
  bnb.bits = bits;
  bnb.table = phase_values(bits, n_tx);
  bnb.order = free_entries(n_tx, K);
  bnb.value = [&](const CMatrix& X) {
    GenEig e = top_generalized_eig(Q, j_matrix(W_RF, H * X));
    e.value *= weight;
    return e;
  };
  bnb.partial_eig = [&](const CMatrix& X, int) {
    CMatrix J = (A * X) * (A * X).adjoint();
    J.diagonal().array() += 1e-9 * (J.trace().real() + A.squaredNorm() / n_tx) + 1e-300;
    return top_generalized_eig(Q, J);
  };
  bnb.bound = [&](const CMatrix& X, int depth, const CVector& v) {
    const double num = v.dot(Q * v).real();
    const CVector u = A.adjoint() * v;  // v^H J v = sum_k |u^H x_k|^2
    const auto mask = free_mask(bnb.order, depth, n_tx, K);
    double den = 0;
    for (int k = 0; k < K; ++k) {
      cplx fixed = 0;
      double slack = 0;
      for (int i = 0; i < n_tx; ++i) {
        if (mask[k][i])
          slack += std::abs(u[i]) * inv_sqrt;
        else
          fixed += std::conj(u[i]) * X(i, k);
      }
      const double m = std::abs(fixed) + slack;
      den += m * m;
    }
    if (!(den > 0)) return num > 0 ? kInf : 0.0;
    return weight * num / den;
  };
  bnb.run(F_C_start);
  return {bnb.best, bnb.best_w, bnb.nodes};
}

MisdpStep misdp_optimize_wrf(const CMatrix& H, const CMatrix& F_S, const CMatrix& F_C,
                             const CMatrix& W_RF_start, int bits, const CommMseParams& prm) {
  check_common(H, F_S, prm);
  const int n_rx = static_cast<int>(H.rows());
  const int K = static_cast<int>(F_C.cols());
  const int W = static_cast<int>(F_S.cols());
  const CMatrix HF = H * F_C;
  const CMatrix HFS = H * F_S;
  const CMatrix S = sensing_gram(HFS, prm);
  const RVector scale = (prm.t.array() * prm.d.array().sqrt()).matrix();
  const CMatrix Sh = scale.asDiagonal() * HFS.adjoint();  // S = Sh^H Sh
  const CMatrix C = HF.adjoint();                          // J = (C W)^H (C W)
  RVector c_norm(n_rx), s_norm(n_rx);
  for (int i = 0; i < n_rx; ++i) {
    c_norm[i] = C.col(i).norm();
    s_norm[i] = Sh.col(i).norm();
  }
  const double weight = static_cast<double>(K + W);
  const double inv_sqrt = 1.0 / std::sqrt(double(n_rx));

  PhaseBnb bnb;
  bnb.bits = bits;
  bnb.table = phase_values(bits, n_rx);
  bnb.order = free_entries(n_rx, K);
  bnb.value = [&](const CMatrix& X) {
    GenEig e = top_generalized_eig(q_matrix(X, S, prm.sigma2), j_matrix(X, HF));
    e.value *= weight;
    return e;
  };
  bnb.partial_eig = [&](const CMatrix& X, int) {
    CMatrix J = j_matrix(X, HF);
    J.diagonal().array() += 1e-9 * (J.trace().real() + C.squaredNorm() / n_rx) + 1e-300;
    return top_generalized_eig(q_matrix(X, S, prm.sigma2), J);
  };
  bnb.bound = [&](const CMatrix& X, int depth, const CVector& v) {
    const auto mask = free_mask(bnb.order, depth, n_rx, K);
    const CVector y = X * v;  // free entries of X are zero
    double spread_c = 0, spread_s = 0;
    for (int i = 0; i < n_rx; ++i) {
      double rho = 0;
      for (int k = 0; k < K; ++k)
        if (mask[k][i]) rho += std::abs(v[k]) * inv_sqrt;
      spread_c += rho * c_norm[i];
      spread_s += rho * s_norm[i];
    }
    const double den_root = (C * y).norm() + spread_c;
    const double num_root = std::max(0.0, (Sh * y).norm() - spread_s);
    const double num = num_root * num_root + prm.sigma2 * v.squaredNorm();
    const double den = den_root * den_root;
    if (!(den > 0)) return num > 0 ? kInf : 0.0;
    return weight * num / den;
  };
  bnb.run(W_RF_start);
  return {bnb.best, bnb.best_w, bnb.nodes};
}

MisdpInit misdp_init(const CMatrix& H, const CMatrix& F_S, int K, int bits,
                     const CommMseParams& prm) {
  check_common(H, F_S, prm);
  const int n_tx = static_cast<int>(H.cols());
  const int n_rx = static_cast<int>(H.rows());
  if (K < 1 || K > std::min(n_tx, n_rx)) throw InvalidParameter("misdp_init: K out of range");
  if (n_tx * K * bits > 24 || n_rx * K * bits > 24)
    throw SizeLimitError("misdp_init: exact search limited to N*K*B <= 24 per side, got N_t*K*B = " +
                         std::to_string(n_tx * K * bits) + ", N_r*K*B = " +
                         std::to_string(n_rx * K * bits));
  // All-ones starting blocks make J rank one, so start from the quantized
  // dominant singular subspaces instead.
  Eigen::JacobiSVD<CMatrix> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  MisdpInit out;
  out.F_C = pin_columns(quantize_phases(svd.matrixV().leftCols(K), bits));
  out.W_RF = pin_columns(quantize_phases(svd.matrixU().leftCols(K), bits));
  out.w = misdp_objective(H, F_S, out.F_C, out.W_RF, prm);
  for (out.rounds = 0; out.rounds < 20;) {
    const double before = out.w;
    const MisdpStep fs = misdp_optimize_fc(H, F_S, out.W_RF, out.F_C, bits, prm);
    out.F_C = fs.X;
    const MisdpStep ws = misdp_optimize_wrf(H, F_S, out.F_C, out.W_RF, bits, prm);
    out.W_RF = ws.X;
    out.w = ws.w;
    ++out.rounds;
    if (std::isfinite(before) && before - out.w < 1e-6) break;
  }
  return out;
}

}  // namespace bpmisac
