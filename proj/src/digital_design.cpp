#include "bpmisac/digital_design.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace bpmisac {

namespace {

void check_shapes(const CMatrix& H_C, const CMatrix& H_S, const RVector& p, const RVector& b,
                  const RVector& d) {
  if (H_C.rows() != H_C.cols() || H_S.rows() != H_C.rows() || p.size() != H_C.cols() ||
      b.size() != H_S.cols() || d.size() != H_S.cols()) {
    throw DimensionMismatch("digital design: H_C must be KxK, H_S KxW, p length K, b and d length W");
  }
}

// Solves X = ratio * A^-1 * B for Hermitian PSD A with the standard ridge.
CMatrix ridge_solve(CMatrix A, const CMatrix& rhs) {
  const Eigen::Index K = A.rows();
  const double tr = A.trace().real();
  if (!(tr > 0)) return CMatrix::Zero(rhs.rows(), rhs.cols());
  A.diagonal().array() += 1e-12 * tr / static_cast<double>(K);
  Eigen::LLT<CMatrix> llt(A);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  return A.ldlt().solve(rhs);
}

}  // namespace

CMatrix lmmse_equalizer(const CMatrix& H_C, const CMatrix& H_S, const RVector& p,
                        const RVector& b, const RVector& d, double sigma2, double ratio) {
  check_shapes(H_C, H_S, p, b, d);
  const Eigen::Index K = H_C.rows();
  const CMatrix HP = H_C * p.asDiagonal();
  const CMatrix HSB = H_S * (b.array() * d.array().sqrt()).matrix().asDiagonal();
  CMatrix A = ratio * HP * HP.adjoint() + HSB * HSB.adjoint();
  A.diagonal().array() += sigma2;
  (void)K;
  // W = ratio P H^H A^-1  =>  W^H = ratio A^-1 H P.
  return (ratio * ridge_solve(std::move(A), HP)).adjoint();
}

CMatrix initial_equalizer(const CMatrix& H_C, const CMatrix& H_S, const CommMseParams& prm) {
  return lmmse_equalizer(H_C, H_S, RVector::Ones(H_C.cols()), prm.t, prm.d, prm.sigma2,
                         prm.ratio);
}

SymbolMseTerms symbol_mse_terms(const CMatrix& H_C, const CMatrix& H_S, const RVector& p,
                                const RVector& b, const RVector& d, double sigma2, double ratio,
                                const CMatrix& W_BB) {
  check_shapes(H_C, H_S, p, b, d);
  if (W_BB.rows() != H_C.cols() || W_BB.cols() != H_C.rows())
    throw DimensionMismatch("symbol_mse: W_BB must be KxK");
  SymbolMseTerms terms;
  CMatrix residual = W_BB * H_C * p.asDiagonal();
  residual.diagonal().array() -= 1.0;
  terms.residual = ratio * residual.squaredNorm();
  terms.interference =
      (W_BB * H_S * (b.array() * d.array().sqrt()).matrix().asDiagonal()).squaredNorm();
  terms.noise = sigma2 * W_BB.squaredNorm();
  return terms;
}

double symbol_mse(const CMatrix& H_C, const CMatrix& H_S, const RVector& p, const RVector& b,
                  const RVector& d, double sigma2, double ratio, const CMatrix& W_BB) {
  return symbol_mse_terms(H_C, H_S, p, b, d, sigma2, ratio, W_BB).total();
}

double mse_threshold(const CMatrix& H_C, const CMatrix& H_S, double mu, const CommMseParams& prm) {
  if (!(mu >= 0.0 && mu <= 1.0))
    throw InvalidParameter("mse_threshold: mu must lie in [0,1], got " + std::to_string(mu));
  const RVector ones = RVector::Ones(H_C.cols());
  const CMatrix W0 = initial_equalizer(H_C, H_S, prm);
  const auto terms = symbol_mse_terms(H_C, H_S, ones, prm.t, prm.d, prm.sigma2, prm.ratio, W0);
  return terms.residual + mu * terms.interference + terms.noise;
}

double sensing_objective(const RVector& b, const RVector& gains, const RVector& t,
                         const RVector& d) {
  return (d.array() * (gains.array() * b.array() - t.array()).square()).sum();
}

double QcqpProblem::sensing_power_used(const RVector& b) const {
  return (d.array() * b.array().square()).sum();
}

double QcqpProblem::comm_mse(const RVector& p, const RVector& b) const {
  return (alpha.array() * p.array().square() - 2.0 * beta.array() * p.array()).sum() +
         (gamma_b.array() * b.array().square()).sum() + offset;
}

QcqpProblem make_qcqp(const CMatrix& W_BB, const CMatrix& H_C, const CMatrix& H_S,
                      const RVector& gains, const CommMseParams& prm, double sensing_power,
                      double gamma) {
  const Eigen::Index K = H_C.cols();
  const Eigen::Index W = H_S.cols();
  if (gains.size() != W || prm.t.size() != W || prm.d.size() != W)
    throw DimensionMismatch("make_qcqp: gains, t and d must have length W");
  QcqpProblem qp;
  qp.gains = gains;
  qp.t = prm.t;
  qp.d = prm.d;
  qp.sensing_power = sensing_power;
  qp.gamma = gamma;
  const CMatrix m = W_BB * H_C;
  const CMatrix ms = W_BB * H_S;
  qp.alpha.resize(K);
  qp.beta.resize(K);
  qp.gamma_b.resize(W);
  for (Eigen::Index j = 0; j < K; ++j) {
    qp.alpha[j] = prm.ratio * m.col(j).squaredNorm();
    qp.beta[j] = prm.ratio * m(j, j).real();
  }
  for (Eigen::Index j = 0; j < W; ++j) qp.gamma_b[j] = prm.d[j] * ms.col(j).squaredNorm();
  qp.offset = prm.ratio * static_cast<double>(K) + prm.sigma2 * W_BB.squaredNorm();
  return qp;
}

namespace {

// Log-barrier machinery over x = [p; b].
class BarrierQcqp {
 public:
  BarrierQcqp(const QcqpProblem& qp) : qp_(qp), K_(qp.K()), W_(qp.W()) {
    relax_[0] = 1e-10;
    relax_[1] = 1e-10;
    relax_[2] = 1e-9 * std::max(1.0, std::abs(qp.gamma));
  }

  // Constraint values c_i(x) <= 0 (relaxed).
  std::array<double, 3> constraints(const RVector& x) const {
    const auto p = x.head(K_);
    const auto b = x.tail(W_);
    return {p.squaredNorm() - K_ - relax_[0],
            (qp_.d.array() * b.array().square()).sum() - qp_.sensing_power - relax_[1],
            qp_.comm_mse(p, b) - qp_.gamma - relax_[2]};
  }

  bool strictly_feasible(const RVector& x) const {
    if ((x.array() <= 0.0).any()) return false;
    for (double c : constraints(x))
      if (!(c < 0.0)) return false;
    return true;
  }

  double objective(const RVector& x) const {
    return sensing_objective(x.tail(W_), qp_.gains, qp_.t, qp_.d);
  }

  double phi(const RVector& x, double tau) const {
    double barrier = 0;
    for (double c : constraints(x)) barrier -= std::log(-c);
    barrier -= x.array().log().sum();
    return objective(x) + tau * barrier;
  }

  void derivatives(const RVector& x, double tau, RVector& g, RMatrix& H) const {
    const int n = K_ + W_;
    g.setZero(n);
    H.setZero(n, n);
    const auto p = x.head(K_);
    const auto b = x.tail(W_);
    for (int i = 0; i < W_; ++i) {
      const double gi = qp_.gains[i];
      g[K_ + i] = 2.0 * qp_.d[i] * gi * (gi * b[i] - qp_.t[i]);
      H(K_ + i, K_ + i) = 2.0 * qp_.d[i] * gi * gi;
    }
    const auto c = constraints(x);
    RVector grad(n);
    RVector hess_diag(n);
    for (int k = 0; k < 3; ++k) {
      grad.setZero();
      hess_diag.setZero();
      if (k == 0) {
        grad.head(K_) = 2.0 * p;
        hess_diag.head(K_).setConstant(2.0);
      } else if (k == 1) {
        grad.tail(W_) = 2.0 * (qp_.d.array() * b.array()).matrix();
        hess_diag.tail(W_) = 2.0 * qp_.d;
      } else {
        grad.head(K_) = (2.0 * qp_.alpha.array() * p.array() - 2.0 * qp_.beta.array()).matrix();
        grad.tail(W_) = (2.0 * qp_.gamma_b.array() * b.array()).matrix();
        hess_diag.head(K_) = 2.0 * qp_.alpha;
        hess_diag.tail(W_) = 2.0 * qp_.gamma_b;
      }
      const double slack = -c[k];
      g += (tau / slack) * grad;
      H.diagonal() += (tau / slack) * hess_diag;
      H.noalias() += (tau / (slack * slack)) * grad * grad.transpose();
    }
    g.array() -= tau / x.array();
    H.diagonal().array() += tau / x.array().square();
  }

 private:
  const QcqpProblem& qp_;
  int K_;
  int W_;
  std::array<double, 3> relax_{};
};

}  // namespace

QcqpSolution solve_qcqp(const QcqpProblem& qp, const RVector& p_start, const RVector& b_start) {
  const int K = qp.K();
  const int W = qp.W();
  if (p_start.size() != K || b_start.size() != W || qp.beta.size() != K || qp.d.size() != W ||
      qp.t.size() != W || qp.gamma_b.size() != W)
    throw DimensionMismatch("solve_qcqp: inconsistent problem dimensions");

  const double v1 = qp.comm_power(p_start) - K;
  const double v2 = qp.sensing_power_used(b_start) - qp.sensing_power;
  const double v3 = qp.comm_mse(p_start, b_start) - qp.gamma;
  const double vneg = std::max(p_start.size() ? -p_start.minCoeff() : 0.0,
                               b_start.size() ? -b_start.minCoeff() : 0.0);
  if (v1 > 1e-9 || v2 > 1e-9 || v3 > 1e-9 || vneg > 1e-9) {
    throw InfeasibleStart("solve_qcqp: start point violates constraints (power " +
                          std::to_string(v1) + ", sensing " + std::to_string(v2) + ", mse " +
                          std::to_string(v3) + ", sign " + std::to_string(vneg) + ")");
  }

  BarrierQcqp barrier(qp);
  const int n = K + W;
  RVector x(n);
  x.head(K) = p_start.cwiseMax(1e-9);
  x.tail(W) = b_start.cwiseMax(1e-9);
  if (!barrier.strictly_feasible(x)) {
    // Boundary starts: pull the two power balls inward, which can only lower
    // the sensing part of the MSE constraint.
    x.head(K) *= 1.0 - 1e-11;
    x.tail(W) *= 1.0 - 1e-11;
    if (!barrier.strictly_feasible(x))
      throw InfeasibleStart("solve_qcqp: start point has no strictly feasible neighbourhood");
  }

  QcqpSolution sol;
  RVector g(n);
  RMatrix H(n, n);
  for (double tau = 1.0; tau >= 0.99e-9; tau *= 0.1) {
    for (int it = 0; it < 200; ++it) {
      barrier.derivatives(x, tau, g, H);
      const RVector step = -H.ldlt().solve(g);
      const double decrement = -g.dot(step);
      if (!(decrement > 2e-14)) break;
      double s = 1.0;
      while (!barrier.strictly_feasible(x + s * step) && s > 1e-30) s *= 0.5;
      const double phi0 = barrier.phi(x, tau);
      bool accepted = false;
      for (; s > 1e-30; s *= 0.5) {
        const RVector trial = x + s * step;
        if (barrier.strictly_feasible(trial) &&
            barrier.phi(trial, tau) <= phi0 - 0.25 * s * decrement) {
          x = trial;
          accepted = true;
          break;
        }
      }
      ++sol.newton_steps;
      if (!accepted) break;
    }
  }
  // The barrier stalls O(sqrt(tau)) short of an unconstrained minimizer that
  // sits on a constraint boundary; take it exactly when it is feasible.
  RVector ideal = x;
  for (int i = 0; i < W; ++i)
    if (qp.gains[i] > 0) ideal[K + i] = qp.t[i] / qp.gains[i];
  const auto c = barrier.constraints(ideal);
  if ((ideal.array() >= 0.0).all() && c[0] <= 0 && c[1] <= 0 && c[2] <= 0) x = ideal;
  sol.p = x.head(K);
  sol.b = x.tail(W);
  sol.objective = barrier.objective(x);
  return sol;
}

DigitalSolution optimize_digital(const DigitalProblem& prob, int max_iter, double tol) {
  const auto& prm = prob.prm;
  const Eigen::Index K = prob.H_C.cols();
  DigitalSolution out;
  out.gamma = mse_threshold(prob.H_C, prob.H_S, prob.mu, prm);

  CMatrix W_BB = initial_equalizer(prob.H_C, prob.H_S, prm);
  RVector p = RVector::Ones(K);
  RVector b = prob.mu * prm.t;

  for (int iter = 1; iter <= max_iter; ++iter) {
    const QcqpProblem qp =
        make_qcqp(W_BB, prob.H_C, prob.H_S, prob.gains, prm, prob.sensing_power, out.gamma);
    QcqpSolution sol = solve_qcqp(qp, p, b);
    if (iter > 1) {
      // The previous iterate stays feasible after the LMMSE update, so it is a
      // valid fallback when barrier inexactness would otherwise tick upward.
      const double prev = sensing_objective(b, prob.gains, prm.t, prm.d);
      if (sol.objective > prev) {
        sol.p = p;
        sol.b = b;
        sol.objective = prev;
      }
    }
    p = sol.p;
    b = sol.b;
    W_BB = lmmse_equalizer(prob.H_C, prob.H_S, p, b, prm.d, prm.sigma2, prm.ratio);
    out.trace.push_back(sol.objective);
    out.iterations = iter;
    if (iter > 1 && std::abs(out.trace[iter - 1] - out.trace[iter - 2]) < tol) break;
  }
  out.p = p;
  out.b = b;
  out.W_BB = W_BB;
  out.kkt_residual = kkt_residual(p, b, prob, out.gamma);
  return out;
}

RVector nnls(const RMatrix& A, const RVector& y) {
  const Eigen::Index n = A.cols();
  RVector x = RVector::Zero(n);
  if (n == 0) return x;
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * std::max(1.0, A.norm() * y.norm());
  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    const RVector w = A.transpose() * (y - A * x);
    Eigen::Index best = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    if (best < 0) break;
    passive[best] = true;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j]) idx.push_back(j);
      RMatrix Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(k) = A.col(idx[k]);
      const RVector z_p = Ap.colPivHouseholderQr().solve(y);
      RVector z = RVector::Zero(n);
      for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = z_p[k];
      bool all_positive = true;
      for (auto j : idx)
        if (z[j] <= 0) all_positive = false;
      if (all_positive) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (auto j : idx)
        if (z[j] <= 0) alpha = std::min(alpha, x[j] / (x[j] - z[j]));
      x += alpha * (z - x);
      for (auto j : idx)
        if (x[j] <= 1e-15) {
          passive[j] = false;
          x[j] = 0;
        }
    }
  }
  return x;
}

double kkt_residual(const RVector& p, const RVector& b, const DigitalProblem& prob, double gamma) {
  const auto& prm = prob.prm;
  const int K = static_cast<int>(p.size());
  const int W = static_cast<int>(b.size());
  const int n = K + W;
  const CMatrix W_BB = lmmse_equalizer(prob.H_C, prob.H_S, p, b, prm.d, prm.sigma2, prm.ratio);
  const QcqpProblem qp =
      make_qcqp(W_BB, prob.H_C, prob.H_S, prob.gains, prm, prob.sensing_power, gamma);

  RVector grad_f = RVector::Zero(n);
  for (int i = 0; i < W; ++i) {
    const double gi = qp.gains[i];
    grad_f[K + i] = 2.0 * qp.d[i] * gi * (gi * b[i] - qp.t[i]);
  }

  // Inequalities c(x) <= 0 with their gradients.
  std::vector<double> values;
  std::vector<RVector> grads;
  std::vector<double> scales;
  RVector g = RVector::Zero(n);
  g.head(K) = 2.0 * p;
  values.push_back(qp.comm_power(p) - K);
  grads.push_back(g);
  scales.push_back(std::max(1.0, static_cast<double>(K)));
  g.setZero();
  g.tail(W) = 2.0 * (qp.d.array() * b.array()).matrix();
  values.push_back(qp.sensing_power_used(b) - qp.sensing_power);
  grads.push_back(g);
  scales.push_back(std::max(1.0, qp.sensing_power));
  g.setZero();
  g.head(K) = (2.0 * qp.alpha.array() * p.array() - 2.0 * qp.beta.array()).matrix();
  g.tail(W) = (2.0 * qp.gamma_b.array() * b.array()).matrix();
  values.push_back(qp.comm_mse(p, b) - gamma);
  grads.push_back(g);
  scales.push_back(std::max(1.0, std::abs(gamma)));
  for (int j = 0; j < n; ++j) {
    g.setZero();
    g[j] = -1.0;
    values.push_back(j < K ? -p[j] : -b[j - K]);
    grads.push_back(g);
    scales.push_back(1.0);
  }

  std::vector<std::size_t> active;
  double residual = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    residual = std::max(residual, std::max(0.0, values[i]));
    if (values[i] >= -1e-6 * scales[i]) active.push_back(i);
  }
  RMatrix A(n, static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) A.col(k) = grads[active[k]];
  const RVector lambda = nnls(A, -grad_f);
  residual = std::max(residual, (grad_f + A * lambda).norm());
  for (std::size_t k = 0; k < active.size(); ++k)
    residual = std::max(residual, std::abs(lambda[k] * values[active[k]]));
  return residual;
}

}  // namespace bpmisac
