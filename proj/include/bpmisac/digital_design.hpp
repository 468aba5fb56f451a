#pragma once

#include <vector>

#include "bpmisac/types.hpp"

namespace bpmisac {

/// Inputs shared by the MSE formulas: ideal sensing pattern t, activation
/// probabilities d (diagonal of D), noise power and the active-beam ratio N_C/K.
struct CommMseParams {
  RVector t;
  RVector d;
  double sigma2 = 0;
  double ratio = 1;  // N_C / K
};

/// LMMSE combiner for x_C ~ (ratio) I, x_S ~ D:
///   W = ratio P_C H_C^H (ratio H_C P_C^2 H_C^H + H_S P_S D P_S H_S^H + sigma2 I)^-1,
/// solved with a 1e-12 * trace / K ridge.
CMatrix lmmse_equalizer(const CMatrix& H_C, const CMatrix& H_S, const RVector& p,
                        const RVector& b, const RVector& d, double sigma2, double ratio);

/// Combiner of the unoptimized digital part (p = 1, b = t).
CMatrix initial_equalizer(const CMatrix& H_C, const CMatrix& H_S, const CommMseParams& prm);

/// Residual + sensing interference + noise terms of E||W y - x_C||^2.
struct SymbolMseTerms {
  double residual = 0;
  double interference = 0;
  double noise = 0;
  double total() const { return residual + interference + noise; }
};

SymbolMseTerms symbol_mse_terms(const CMatrix& H_C, const CMatrix& H_S, const RVector& p,
                                const RVector& b, const RVector& d, double sigma2, double ratio,
                                const CMatrix& W_BB);

double symbol_mse(const CMatrix& H_C, const CMatrix& H_S, const RVector& p, const RVector& b,
                  const RVector& d, double sigma2, double ratio, const CMatrix& W_BB);

/// Relative threshold Gamma(mu): the unoptimized-digital MSE with the
/// interference term weighted by mu.
double mse_threshold(const CMatrix& H_C, const CMatrix& H_S, double mu, const CommMseParams& prm);

/// sum_i d_i (g_i b_i - t_i)^2.
double sensing_objective(const RVector& b, const RVector& gains, const RVector& t,
                         const RVector& d);

/// Power-allocation subproblem with the combiner held fixed. Every constraint
/// is a separable quadratic in (p, b), so the coefficients below describe it
/// completely:
///   ||p||^2 <= K,  sum d_i b_i^2 <= T_R,
///   sum_j (alpha_j p_j^2 - 2 beta_j p_j) + sum_j gamma_j b_j^2 + offset <= Gamma.
struct QcqpProblem {
  RVector gains;  // |a^H(theta_i) F_S[:,i]|
  RVector t;
  RVector d;
  double sensing_power = 0;  // T_R
  double gamma = 0;          // MSE threshold
  RVector alpha, beta, gamma_b;
  double offset = 0;

  int K() const { return static_cast<int>(alpha.size()); }
  int W() const { return static_cast<int>(gains.size()); }

  double comm_power(const RVector& p) const { return p.squaredNorm(); }
  double sensing_power_used(const RVector& b) const;
  double comm_mse(const RVector& p, const RVector& b) const;
};

QcqpProblem make_qcqp(const CMatrix& W_BB, const CMatrix& H_C, const CMatrix& H_S,
                      const RVector& gains, const CommMseParams& prm, double sensing_power,
                      double gamma);

struct QcqpSolution {
  RVector p;
  RVector b;
  double objective = 0;
  int newton_steps = 0;
};

/// Log-barrier interior point: Newton centering with Armijo backtracking,
/// barrier weight decimated 1 -> 1e-9. Throws InfeasibleStart when
/// (p_start, b_start) violates a constraint by more than 1e-9.
QcqpSolution solve_qcqp(const QcqpProblem& qp, const RVector& p_start, const RVector& b_start);

struct DigitalSolution {
  RVector p;
  RVector b;
  CMatrix W_BB;
  std::vector<double> trace;  // sensing objective after each iteration
  int iterations = 0;
  double gamma = 0;
  double kkt_residual = 0;
};

struct DigitalProblem {
  CMatrix H_C;
  CMatrix H_S;
  RVector gains;
  CommMseParams prm;
  double sensing_power = 0;
  double mu = 0.5;
};

/// Alternate the power-allocation QCQP and the LMMSE update until the
/// sensing objective moves by less than `tol`.
DigitalSolution optimize_digital(const DigitalProblem& prob, int max_iter = 50, double tol = 1e-3);

/// Largest of: Lagrangian stationarity norm with multipliers fitted by NNLS
/// over the active constraints, primal infeasibility, complementary slackness.
double kkt_residual(const RVector& p, const RVector& b, const DigitalProblem& prob, double gamma);

/// Nonnegative least squares min ||A x - y||, x >= 0 (Lawson-Hanson).
RVector nnls(const RMatrix& A, const RVector& y);

}  // namespace bpmisac
