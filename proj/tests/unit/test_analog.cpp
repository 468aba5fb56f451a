#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bpmisac/analog_design.hpp"
#include "bpmisac/channel.hpp"
#include "oracles.hpp"

using namespace bpmisac;

namespace {

CommMseParams params(int W, double sigma2, int K = 2, int N_C = 1) {
  CommMseParams p;
  p.t = RVector::Constant(W, std::sqrt(5.0));
  p.d = RVector::Constant(W, 1.0 / W);
  p.sigma2 = sigma2;
  p.ratio = double(N_C) / K;
  return p;
}

struct Pick {
  std::vector<int> rows, cols;
  double value = std::numeric_limits<double>::infinity();
};

// Every K-subset of (row, column) pairs with distinct rows and columns,
// columns outside omega, scored with the oracle's direct formula.
Pick exhaustive_selection(const CMatrix& Hb, const std::vector<int>& omega, const CommMseParams& p) {
  const int nr = int(Hb.rows()), nt = int(Hb.cols()), W = int(omega.size());
  Pick best;
  CMatrix H_S(2, W);
  for (int r1 = 0; r1 < nr; ++r1)
    for (int r2 = r1 + 1; r2 < nr; ++r2)
      for (int c1 = 0; c1 < nt; ++c1)
        for (int c2 = 0; c2 < nt; ++c2) {
          if (c1 == c2) continue;
          if (std::count(omega.begin(), omega.end(), c1) || std::count(omega.begin(), omega.end(), c2))
            continue;
          CMatrix H_C(2, 2);
          H_C << Hb(r1, c1), Hb(r1, c2), Hb(r2, c1), Hb(r2, c2);
          for (int w = 0; w < W; ++w) H_S(0, w) = Hb(r1, omega[w]), H_S(1, w) = Hb(r2, omega[w]);
          const double v = oracle::unoptimized_mse(H_C, H_S, p.t, p.d, p.sigma2, p.ratio);
          if (v < best.value) best = {{r1, r2}, {c1, c2}, v};
        }
  return best;
}

double selection_value(const CMatrix& Hb, const BeamSelection& s, const std::vector<int>& omega,
                       const CommMseParams& p) {
  const int K = int(s.rx_rows.size()), W = int(omega.size());
  CMatrix H_C(K, K), H_S(K, W);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < K; ++l) H_C(k, l) = Hb(s.rx_rows[k], s.tx_cols[l]);
    for (int w = 0; w < W; ++w) H_S(k, w) = Hb(s.rx_rows[k], omega[w]);
  }
  return oracle::unoptimized_mse(H_C, H_S, p.t, p.d, p.sigma2, p.ratio);
}

}  // namespace

TEST_SUITE("analog") {

TEST_CASE("MBS sensing beams") {
  RVector on(1);
  on[0] = dft_grid_angle(32, 3);
  const SensingDesign a = design_sensing_mbs(on, 32);
  CHECK(a.omega == std::vector<int>{3});
  CHECK(sensing_gains(a.F_S, on)[0] == doctest::Approx(1.0).epsilon(1e-12));

  // Midway between two grid points: the pick must be the best of an independent re-scan.
  RVector mid(1);
  mid[0] = std::asin(0.5 * (std::sin(dft_grid_angle(32, 3)) + std::sin(dft_grid_angle(32, 4))));
  const SensingDesign b = design_sensing_mbs(mid, 32);
  double best = 0;
  for (int k = 0; k < 32; ++k)
    best = std::max(best, std::abs(oracle::ula(32, mid[0]).dot(oracle::ula(32, dft_grid_angle(32, k)))));
  CHECK(sensing_gains(b.F_S, mid)[0] == doctest::Approx(best).epsilon(1e-12));

  RVector reference_scans(3);
  reference_scans << deg2rad(38), deg2rad(44), deg2rad(50);
  const SensingDesign c = design_sensing_mbs(reference_scans, 32);
  CHECK(c.omega.size() == 3);
  CHECK(c.omega[0] != c.omega[1]);
  CHECK(c.omega[1] != c.omega[2]);
  CHECK(c.omega[0] != c.omega[2]);

  RVector dup(2);
  dup << deg2rad(38), deg2rad(38.2);
  CHECK_THROWS_AS(design_sensing_mbs(dup, 32), InfeasibleSelection);
}

TEST_CASE("branch and bound sensing beam") {
  for (int B : {1, 2, 3}) {
    const BnbResult r = design_sensing_mas_bnb(0.0, 8, B);
    CHECK(r.gain == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 1; i < 8; ++i) CHECK(std::abs(r.column[i] - r.column[0]) < 1e-12);
  }
  CHECK(design_sensing_mas_bnb(deg2rad(30), 4, 1).gain ==
        doctest::Approx(oracle::best_phase_gain(deg2rad(30), 4, 1)).epsilon(1e-12));

  RngStream rng(31);
  for (int s = 0; s < 100; ++s) {
    const double th = (rng.uniform() - 0.5) * kPi;
    const BnbResult r = design_sensing_mas_bnb(th, 8, 2);
    CHECK(std::abs(r.gain - oracle::best_phase_gain(th, 8, 2)) < 1e-12);
    CHECK(std::abs(r.gain - std::abs(oracle::ula(8, th).dot(r.column))) < 1e-12);
  }
  CHECK_THROWS_AS(design_sensing_mas_bnb(0.1, 8, 0), InvalidParameter);
}

TEST_CASE("phase quantization") {
  CMatrix X(2, 1);
  X << std::polar(3.0, 0.1), std::polar(0.2, 1.7);
  const CMatrix Q = quantize_phases(X, 2);
  CHECK(std::abs(Q(0, 0) - cplx(1 / std::sqrt(2.0), 0)) < 1e-12);
  CHECK(std::abs(Q(1, 0) - cplx(0, 1 / std::sqrt(2.0))) < 1e-12);
}

TEST_CASE("unoptimized communication MSE") {
  const CommMseParams p = params(1, 1e-12, 2, 2);
  CMatrix H_C(2, 2);
  H_C << 1.0, 0.3, cplx(0, 0.2), 0.9;
  CHECK(mse_bar(H_C, CMatrix::Zero(2, 1), p) < 1e-9);

  CommMseParams q = params(1, 0.5, 4, 3);
  CHECK(mse_bar(CMatrix::Zero(4, 4), CMatrix::Zero(4, 1), q) == doctest::Approx(3.0));

  RngStream rng(12);
  for (int s = 0; s < 20; ++s) {
    CMatrix A(4, 4), B(4, 3);
    for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = rng.complex_normal();
    for (Eigen::Index i = 0; i < B.size(); ++i) B(i) = rng.complex_normal();
    CommMseParams r = params(3, 0.1 + rng.uniform(), 4, 3);
    r.d << 0.2, 0.3, 0.5;
    r.t << 1.0, 2.0, 0.5;
    CHECK(mse_bar(A, B, r) ==
          doctest::Approx(oracle::unoptimized_mse(A, B, r.t, r.d, r.sigma2, r.ratio)).epsilon(1e-10));
  }
}

TEST_CASE("selection with one dominant path") {
  CVector g(1);
  g[0] = 1.0;
  RVector aod(1), aoa(1);
  aod[0] = dft_grid_angle(8, 5);
  aoa[0] = dft_grid_angle(8, 2);
  const CMatrix Hb = beamspace_transform(assemble_channel(8, 8, g, aod, aoa));
  const BeamSelection s = select_comm_beams_mbs(Hb, {0}, 1, 4, SelectionCriterion::MinMse,
                                                params(1, 0.1, 1, 1));
  CHECK(s.tx_cols == std::vector<int>{5});
  CHECK(s.rx_rows == std::vector<int>{2});
  CHECK(s.sensing_cols == std::vector<int>{0});
}

TEST_CASE("selection agrees with exhaustive search") {
  const std::vector<int> omega{1};
  const CommMseParams p = params(1, 0.05);
  RngStream rng(77);
  int matches_l8 = 0;
  for (int s = 0; s < 20; ++s) {
    RngStream r = rng.split(s);
    const CMatrix Hb = beamspace_transform(generate_channel(8, 8, 4, r).H);
    const Pick ex = exhaustive_selection(Hb, omega, p);

    const BeamSelection all = select_comm_beams_mbs(Hb, omega, 2, 64, SelectionCriterion::MinMse, p);
    CHECK(selection_value(Hb, all, omega, p) == doctest::Approx(ex.value).epsilon(1e-10));

    const BeamSelection l8 = select_comm_beams_mbs(Hb, omega, 2, 8, SelectionCriterion::MinMse, p);
    matches_l8 += std::abs(selection_value(Hb, l8, omega, p) - ex.value) <= 1e-10 * ex.value;
  }
  // With eight candidates the shortlist still contains the optimum.
  CHECK(matches_l8 == 20);
}

TEST_CASE("selection never uses sensing columns or repeats rows") {
  RngStream rng(5);
  const CommMseParams p = params(3, 0.1, 4, 3);
  for (int s = 0; s < 10; ++s) {
    RngStream r = rng.split(s);
    const CMatrix Hb = beamspace_transform(generate_channel(32, 32, 8, r).H);
    const std::vector<int> omega{20, 23, 26};
    const BeamSelection sel = select_comm_beams_mbs(Hb, omega, 4, 20, SelectionCriterion::MinMse, p);
    std::vector<int> rows = sel.rx_rows, cols = sel.tx_cols;
    std::sort(rows.begin(), rows.end());
    std::sort(cols.begin(), cols.end());
    CHECK(std::adjacent_find(rows.begin(), rows.end()) == rows.end());
    CHECK(std::adjacent_find(cols.begin(), cols.end()) == cols.end());
    for (int c : cols) CHECK(std::count(omega.begin(), omega.end(), c) == 0);
  }
  CHECK_THROWS_AS(select_comm_beams_mbs(CMatrix::Zero(2, 2), {0}, 2, 4, SelectionCriterion::MinMse,
                                        params(1, 0.1)),
                  InfeasibleSelection);
}

TEST_CASE("entry-wise MAS refinement never increases the objective") {
  RngStream rng(14);
  const RVector dirs = (RVector(2) << deg2rad(20), deg2rad(40)).finished();
  const CMatrix F_S = design_sensing_mas(dirs, 8, 1);
  const CommMseParams p = params(2, 0.05);
  for (int s = 0; s < 5; ++s) {
    RngStream r = rng.split(s);
    const ChannelRealization ch = generate_channel(8, 8, 4, r);
    RngStream init = rng.split(100 + s);
    const AnalogCommDesign d = design_comm_analog_mas(ch.H, F_S, 2, 1, MasInit::Random, p, init);
    for (std::size_t i = 1; i < d.trace.size(); ++i) CHECK(d.trace[i] <= d.trace[i - 1] + 1e-12);
    const auto e = effective_digital_channels(ch.H, d.F_C, F_S, d.W_RF);
    CHECK(mse_bar(e.H_C, e.H_S, p) == doctest::Approx(d.objective).epsilon(1e-9));
    for (Eigen::Index i = 0; i < d.F_C.size(); ++i)
      CHECK(std::abs(d.F_C(i)) == doctest::Approx(1 / std::sqrt(8.0)));
  }
}

TEST_CASE("MISDP start is no worse than random starts on average") {
  RngStream rng(2024);
  const RVector dirs = (RVector(1) << deg2rad(30)).finished();
  const CMatrix F_S = design_sensing_mas(dirs, 8, 1);
  const CommMseParams p = params(1, 0.1);
  double misdp = 0, random = 0;
  const int n = 50;
  for (int s = 0; s < n; ++s) {
    RngStream r = rng.split(s);
    const ChannelRealization ch = generate_channel(8, 8, 4, r);
    RngStream init = rng.split(1000 + s);
    misdp += design_comm_analog_mas(ch.H, F_S, 2, 1, MasInit::Misdp, p, init).objective;
    random += design_comm_analog_mas(ch.H, F_S, 2, 1, MasInit::Random, p, init).objective;
  }
  MESSAGE("mean MSE: misdp " << misdp / n << ", random " << random / n);
  CHECK(misdp <= random);
}

}
