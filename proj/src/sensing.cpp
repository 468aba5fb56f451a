#include "bpmisac/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bpmisac/channel.hpp"

namespace bpmisac {

void SensingScene::validate() const {
  const Eigen::Index W = scan_dirs.size();
  if (t.size() != W || d.size() != W)
    throw DimensionMismatch("scene: t and d need one entry per scan direction");
  if (reflections.size() != target_angles.size())
    throw DimensionMismatch("scene: one reflection coefficient per target");
  if ((d.array() < 0).any() || std::abs(d.sum() - 1.0) > 1e-9)
    throw InvalidParameter("scene: activation probabilities must be nonnegative and sum to 1");
  const double power = (d.array() * t.array().square()).sum();
  if (std::abs(power - sensing_power) > 1e-9 * std::max(1.0, sensing_power))
    throw InvalidParameter("scene: sum d t^2 = " + std::to_string(power) +
                           " differs from sensing power " + std::to_string(sensing_power));
}

RVector beampattern(const CMatrix& F_S, const RVector& b, const RVector& scan_dirs) {
  if (F_S.cols() != b.size() || b.size() != scan_dirs.size())
    throw DimensionMismatch("beampattern: F_S columns, b and scan_dirs must agree");
  RVector v(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i)
    v[i] = std::abs(b[i] *
                    steering_vector(static_cast<int>(F_S.rows()), scan_dirs[i]).dot(F_S.col(i)));
  return v;
}

double beampattern_mse(const RVector& v, const RVector& t, const RVector& d) {
  if (v.size() != t.size() || t.size() != d.size())
    throw DimensionMismatch("beampattern_mse: lengths differ");
  return (d.array() * (v.array() - t.array()).square()).sum();
}

CMatrix simulate_echo(const SensingScene& scene, const CMatrix& F_S, const RVector& b, int beam,
                      int n_samples, RngStream& rng) {
  const int n = static_cast<int>(F_S.rows());
  const Eigen::Index W = F_S.cols();
  if (beam < 0 || beam >= W) throw InvalidParameter("simulate_echo: beam index out of range");
  if (b.size() != W) throw DimensionMismatch("simulate_echo: b length must equal W");
  CVector signal = CVector::Zero(W);
  for (Eigen::Index i = 0; i < scene.target_angles.size(); ++i) {
    const CVector a = steering_vector(n, scene.target_angles[i]);
    const double phase = 2.0 * kPi * rng.uniform();
    const cplx beta = std::polar(std::abs(scene.reflections[i]), phase);
    signal += beta * (a.dot(F_S.col(beam))) * b[beam] * (F_S.adjoint() * a);
  }
  const double sd = std::sqrt(scene.echo_noise_power);
  CMatrix Y(W, n_samples);
  CVector xi(n);
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < n; ++i) xi[i] = sd * rng.complex_normal();
    Y.col(s) = signal + F_S.adjoint() * xi;
  }
  return Y;
}

CMatrix simulate_coherent_block(const SensingScene& scene, const CMatrix& F_S, const RVector& b,
                                int n_samples, RngStream& rng) {
  const Eigen::Index W = F_S.cols();
  CMatrix Y(W, W * n_samples);
  for (Eigen::Index w = 0; w < W; ++w)
    Y.middleCols(w * n_samples, n_samples) =
        simulate_echo(scene, F_S, b, static_cast<int>(w), n_samples, rng);
  return Y;
}

MusicGrid default_music_grid(const RVector& scan_dirs) {
  MusicGrid g;
  g.lo = scan_dirs.minCoeff() - deg2rad(5.0);
  g.hi = scan_dirs.maxCoeff() + deg2rad(5.0);
  g.step = deg2rad(0.02);
  return g;
}

std::vector<double> music_doa(const CMatrix& snapshots, const CMatrix& F_S, int n_targets,
                              const MusicGrid& grid) {
  const Eigen::Index W = F_S.cols();
  if (n_targets == 0) return {};
  if (n_targets < 0 || n_targets >= W)
    throw InvalidParameter("music_doa: need 0 <= targets < W, got " + std::to_string(n_targets));
  if (snapshots.rows() != W) throw DimensionMismatch("music_doa: snapshot rows must equal W");
  if (snapshots.cols() < W)
    throw InsufficientSnapshots("music_doa: " + std::to_string(snapshots.cols()) +
                                " snapshots for " + std::to_string(W) + " beams");
  if (!(grid.step > 0) || !(grid.hi > grid.lo)) throw InvalidParameter("music_doa: empty grid");

  // Whiten by the beamspace noise shape F_S^H F_S.
  const Eigen::LLT<CMatrix> llt(F_S.adjoint() * F_S);
  if (llt.info() != Eigen::Success) throw DegenerateGeometry("music_doa: F_S columns are dependent");
  const CMatrix Yw = llt.matrixL().solve(snapshots);
  const CMatrix R = Yw * Yw.adjoint() / static_cast<double>(snapshots.cols());
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(R);
  const CMatrix En = es.eigenvectors().leftCols(W - n_targets);

  const int n = static_cast<int>(F_S.rows());
  const int points = static_cast<int>(std::floor((grid.hi - grid.lo) / grid.step)) + 1;
  std::vector<double> spectrum(points);
  for (int k = 0; k < points; ++k) {
    CVector v = llt.matrixL().solve(F_S.adjoint() * steering_vector(n, grid.lo + k * grid.step));
    v.normalize();
    spectrum[k] = 1.0 / std::max((En.adjoint() * v).squaredNorm(), 1e-300);
  }

  struct Peak {
    double angle, height;
  };
  std::vector<Peak> peaks;
  for (int k = 1; k + 1 < points; ++k) {
    if (spectrum[k] > spectrum[k - 1] && spectrum[k] >= spectrum[k + 1]) {
      const double l = spectrum[k - 1], c = spectrum[k], r = spectrum[k + 1];
      const double denom = l - 2 * c + r;
      const double offset = denom < 0 ? 0.5 * (l - r) / denom : 0.0;
      peaks.push_back({grid.lo + (k + offset) * grid.step, c});
    }
  }
  if (peaks.empty()) {
    const auto it = std::max_element(spectrum.begin(), spectrum.end());
    peaks.push_back({grid.lo + (it - spectrum.begin()) * grid.step, *it});
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.height > b.height; });
  std::vector<double> out;
  for (int i = 0; i < n_targets; ++i)
    out.push_back(peaks[std::min<std::size_t>(i, peaks.size() - 1)].angle);
  std::sort(out.begin(), out.end());
  return out;
}

double crb_doa(const SensingScene& scene, const CMatrix& F_S, const RVector& b, int target) {
  if (target < 0 || target >= scene.target_angles.size())
    throw InvalidParameter("crb_doa: target index out of range");
  if (b.size() != F_S.cols() || scene.d.size() != F_S.cols())
    throw DimensionMismatch("crb_doa: b and d must have one entry per sensing beam");
  const double beta2 = std::norm(scene.reflections[target]);
  if (!(beta2 > 0)) throw DegenerateGeometry("crb_doa: zero reflection coefficient");
  const int n = static_cast<int>(F_S.rows());
  const double psi = scene.target_angles[target];
  const CVector a = steering_vector(n, psi);
  const CVector da = steering_derivative(n, psi);
  const CMatrix Adot = da * a.adjoint() + a * da.adjoint();
  const CMatrix T = F_S.adjoint() * Adot * F_S;
  CMatrix R = scene.echo_noise_power * (F_S.adjoint() * F_S);
  const CMatrix M = T.adjoint() * R.ldlt().solve(T);
  double trace = 0;
  for (Eigen::Index w = 0; w < b.size(); ++w) trace += b[w] * b[w] * scene.d[w] * M(w, w).real();
  if (!(trace > 1e-15))
    throw DegenerateGeometry("crb_doa: no angular sensitivity for target " + std::to_string(target));
  return 1.0 / (2.0 * beta2 * trace);
}

double assignment_rmse(const std::vector<double>& estimates, const RVector& truth) {
  const std::size_t N = estimates.size();
  if (N != static_cast<std::size_t>(truth.size()))
    throw DimensionMismatch("assignment_rmse: estimate count differs from target count");
  if (N == 0) return 0.0;
  std::vector<int> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = estimates[perm[i]] - truth[static_cast<Eigen::Index>(i)];
      s += e * e;
    }
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / static_cast<double>(N));
}

}  // namespace bpmisac
