#include <doctest.h>

#include <cmath>

#include "bpmisac/baselines.hpp"
#include "bpmisac/harness.hpp"
#include "oracles.hpp"

using namespace bpmisac;

namespace {

DesignParams reference_params(double mu = 0.5) {
  const ExperimentConfig cfg;
  return design_params(cfg, mu, noise_power_for(10, cfg.N_C, 8));
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("fully active patterns carry the same rate") {
  const BpmCodebook full = build_codebook(4, 4, 4);
  CHECK(full.patterns.size() == 1);
  CHECK(full.total_bits == 8);
  CHECK(method_codebook(ExperimentConfig{}, "pbpm").N_C == 4);
}

TEST_CASE("SPIM points matched beams at a single path") {
  CVector g(1);
  g[0] = cplx(0.3, 0.9);
  RVector aod(1), aoa(1);
  aod[0] = 0.2;
  aoa[0] = -0.4;
  ChannelRealization ch{32, 8, g, aod, aoa, assemble_channel(32, 8, g, aod, aoa)};
  DesignParams prm = reference_params();
  prm.K = prm.N_C = 1;
  RngStream rng(1);
  const TransceiverDesign D = design_baseline(BaselineKind::SPIM, ch, prm, rng);
  CHECK((D.F_C.col(0) - oracle::ula(32, 0.2)).norm() < 1e-12);
  CHECK((D.W_RF.col(0) - oracle::ula(8, -0.4)).norm() < 1e-12);
  CHECK(std::abs(D.H_C(0, 0)) == doctest::Approx(std::abs(g[0]) * std::sqrt(256.0)).epsilon(1e-12));
}

TEST_CASE("EDC keeps the dominant singular values") {
  RngStream rng(4);
  for (int s = 0; s < 5; ++s) {
    RngStream r = rng.split(s);
    const ChannelRealization ch = generate_channel(32, 32, 8, r);
    const TransceiverDesign D = design_baseline(BaselineKind::EDC, ch, reference_params(), r);
    Eigen::JacobiSVD<CMatrix> full(ch.H), small(D.H_C);
    for (int k = 0; k < 4; ++k)
      CHECK(small.singularValues()[k] == doctest::Approx(full.singularValues()[k]).epsilon(1e-10));
  }
}

TEST_CASE("every baseline respects the power budgets") {
  RngStream rng(9);
  const DesignParams prm = reference_params();
  for (auto kind : {BaselineKind::MaxSINR, BaselineKind::SPIM, BaselineKind::EDC}) {
    for (int s = 0; s < 3; ++s) {
      RngStream r = rng.split(s);
      const ChannelRealization ch = generate_channel(32, 32, 8, r);
      const TransceiverDesign D = design_baseline(kind, ch, prm, r);
      CHECK(D.p.squaredNorm() <= prm.K + 1e-9);
      CHECK((prm.d.array() * D.b.array().square()).sum() <= prm.sensing_power + 1e-9);
      CHECK(D.W_BB.rows() == prm.K);
    }
  }
  DesignParams full = prm;
  full.N_C = full.K;
  RngStream r(2);
  const ChannelRealization ch = generate_channel(32, 32, 8, r);
  CHECK_NOTHROW(design_baseline(BaselineKind::PBPM, ch, full, r));
  CHECK_THROWS_AS(design_baseline(BaselineKind::PBPM, ch, prm, r), InvalidParameter);
  CHECK_THROWS_AS(parse_baseline("nope"), InvalidParameter);
}

}
