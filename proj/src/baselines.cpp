#include "bpmisac/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace bpmisac {

namespace {

void finish_digital(TransceiverDesign& out, const DesignParams& prm) {
  const CommMseParams comm = prm.comm();
  if (prm.optimize_digital) {
    DigitalProblem problem{out.H_C, out.H_S, out.sensing_gains, comm, prm.sensing_power, prm.mu};
    out.digital = optimize_digital(problem, prm.max_iter, prm.tol);
    out.p = out.digital.p;
    out.b = out.digital.b;
    out.W_BB = out.digital.W_BB;
  } else {
    out.p = RVector::Ones(out.H_C.cols());
    out.b = prm.t;
    out.W_BB = initial_equalizer(out.H_C, out.H_S, comm);
  }
}

void attach_channels(TransceiverDesign& out, const ChannelRealization& ch, const DesignParams& prm) {
  const auto edc = effective_digital_channels(ch.H, out.F_C, out.F_S, out.W_RF);
  out.H_C = edc.H_C;
  out.H_S = edc.H_S;
  out.sensing_gains = sensing_gains(out.F_S, prm.scan_dirs);
}

TransceiverDesign mbs_design(const ChannelRealization& ch, const DesignParams& prm,
                             SelectionCriterion criterion) {
  TransceiverDesign out;
  const SensingDesign sensing = design_sensing_mbs(prm.scan_dirs, ch.n_tx);
  out.F_S = sensing.F_S;
  out.omega = sensing.omega;
  const BeamSelection sel = select_comm_beams_mbs(beamspace_transform(ch.H), sensing.omega, prm.K,
                                                  prm.L_cand, criterion, prm.comm());
  const CMatrix Ft = dft_codebook(ch.n_tx);
  const CMatrix Fr = dft_codebook(ch.n_rx);
  out.F_C.resize(ch.n_tx, prm.K);
  out.W_RF.resize(ch.n_rx, prm.K);
  for (int k = 0; k < prm.K; ++k) {
    out.F_C.col(k) = Ft.col(sel.tx_cols[k]);
    out.W_RF.col(k) = Fr.col(sel.rx_rows[k]);
  }
  return out;
}

}  // namespace

SensingDesign design_sensing(const DesignParams& prm, int n_tx) {
  if (prm.bits == 0) return design_sensing_mbs(prm.scan_dirs, n_tx);
  return {design_sensing_mas(prm.scan_dirs, n_tx, prm.bits), {}};
}

TransceiverDesign design_bpm_isac(const ChannelRealization& ch, const DesignParams& prm,
                                  RngStream& rng) {
  TransceiverDesign out;
  if (prm.bits == 0) {
    out = mbs_design(ch, prm, prm.criterion);
  } else {
    out.F_S = design_sensing_mas(prm.scan_dirs, ch.n_tx, prm.bits);
    const AnalogCommDesign comm =
        design_comm_analog_mas(ch.H, out.F_S, prm.K, prm.bits, prm.mas_init, prm.comm(), rng);
    out.F_C = comm.F_C;
    out.W_RF = comm.W_RF;
  }
  attach_channels(out, ch, prm);
  finish_digital(out, prm);
  return out;
}

BaselineKind parse_baseline(const std::string& name) {
  if (name == "pbpm") return BaselineKind::PBPM;
  if (name == "maxsinr") return BaselineKind::MaxSINR;
  if (name == "spim") return BaselineKind::SPIM;
  if (name == "edc") return BaselineKind::EDC;
  throw InvalidParameter("unsupported baseline '" + name + "'");
}

TransceiverDesign design_baseline(BaselineKind kind, const ChannelRealization& ch,
                                  const DesignParams& prm, RngStream& rng) {
  switch (kind) {
    case BaselineKind::PBPM: {
      if (prm.N_C != prm.K) throw InvalidParameter("P-BPM baseline needs N_C == K");
      return design_bpm_isac(ch, prm, rng);
    }
    case BaselineKind::MaxSINR: {
      TransceiverDesign out = mbs_design(ch, prm, SelectionCriterion::MaxSinr);
      attach_channels(out, ch, prm);
      finish_digital(out, prm);
      return out;
    }
    case BaselineKind::SPIM: {
      if (ch.num_paths() < prm.K) throw InfeasibleSelection("SPIM baseline needs at least K paths");
      TransceiverDesign out;
      const SensingDesign sensing = design_sensing(prm, ch.n_tx);
      out.F_S = sensing.F_S;
      out.omega = sensing.omega;
      std::vector<int> order(ch.num_paths());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(ch.gains[a]) > std::abs(ch.gains[b]);
      });
      out.F_C.resize(ch.n_tx, prm.K);
      out.W_RF.resize(ch.n_rx, prm.K);
      for (int k = 0; k < prm.K; ++k) {
        out.F_C.col(k) = steering_vector(ch.n_tx, ch.aod[order[k]]);
        out.W_RF.col(k) = steering_vector(ch.n_rx, ch.aoa[order[k]]);
      }
      attach_channels(out, ch, prm);
      // Equal communication power; sensing amplitude scaled by mu.
      out.p = RVector::Ones(prm.K);
      out.b = prm.mu * prm.t;
      out.W_BB = lmmse_equalizer(out.H_C, out.H_S, out.p, out.b, prm.d, prm.sigma2,
                                 static_cast<double>(prm.N_C) / prm.K);
      return out;
    }
    case BaselineKind::EDC: {
      TransceiverDesign out;
      const SensingDesign sensing = design_sensing(prm, ch.n_tx);
      out.F_S = sensing.F_S;
      out.omega = sensing.omega;
      Eigen::JacobiSVD<CMatrix> svd(ch.H, Eigen::ComputeThinU | Eigen::ComputeThinV);
      out.F_C = svd.matrixV().leftCols(prm.K);
      out.W_RF = svd.matrixU().leftCols(prm.K);
      attach_channels(out, ch, prm);
      finish_digital(out, prm);
      return out;
    }
  }
  throw InvalidParameter("unsupported baseline kind");
}

}  // namespace bpmisac
