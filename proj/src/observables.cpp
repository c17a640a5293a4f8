#include "phq/observables.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace phq {

namespace {

constexpr double kUnderflow = 1e-300;

// d^n psi_n as a vacuum amplitude.
cplx lower_to_vacuum(const MetastableState &state, const HeffBlocks &blocks, const DetectionMode &mode, int n) {
  CVec v = state.psi[static_cast<std::size_t>(n)];
  for (int k = n; k >= 1; --k) {
    const auto &from = blocks.bases[static_cast<std::size_t>(k)];
    const auto &to = blocks.bases[static_cast<std::size_t>(k - 1)];
    const SparseOperator d = build_lowering(from, to, mode);
    CVec w(static_cast<Eigen::Index>(d.rows));
    kernels::spmv(d, {v.data(), static_cast<std::size_t>(v.size())}, {w.data(), d.rows});
    v = std::move(w);
  }
  return v(0);
}

void require_manifold(const MetastableState &state, const HeffBlocks &blocks, int n) {
  if (n < 1 || n > state.nmax() || n > blocks.nmax()) {
    throw std::invalid_argument("state has no component for manifold " + std::to_string(n));
  }
}

} // namespace

double Gn_leading(const MetastableState &state, const HeffBlocks &blocks, const DetectionMode &mode, int n) {
  require_manifold(state, blocks, n);
  return std::norm(lower_to_vacuum(state, blocks, mode, n));
}

double gn_detection_mode(const MetastableState &state, const HeffBlocks &blocks, const DetectionMode &mode, int n) {
  require_manifold(state, blocks, n);
  if (state.psi[static_cast<std::size_t>(n)].norm() < kUnderflow) {
    throw std::domain_error("manifold component below underflow guard");
  }
  const double first = std::norm(lower_to_vacuum(state, blocks, mode, 1));
  if (!(first > 0.0)) {
    throw std::domain_error("g(n) undefined: <d^dag d> vanishes");
  }
  const double num = n == 1 ? first : std::norm(lower_to_vacuum(state, blocks, mode, n));
  return num / std::pow(first, n);
}

double gn_relative_correction(const MetastableState &state, int n) {
  const auto sq = [&state](int k) { return state.psi[static_cast<std::size_t>(k)].squaredNorm(); };
  if (state.nmax() < 1 || sq(1) == 0.0) {
    return 0.0;
  }
  const double q1 = state.nmax() >= 2 ? sq(2) / sq(1) : sq(1);
  double qn = q1;
  if (n + 1 <= state.nmax() && sq(n) > 0.0) {
    qn = sq(n + 1) / sq(n);
  } else if (n <= state.nmax() && n >= 2 && sq(n - 1) > 0.0) {
    qn = sq(n) / sq(n - 1);
  }
  return double(n + 1) * qn + 2.0 * double(n) * q1;
}

Eigen::MatrixXd two_point_projected(const MetastableState &state, const HeffBlocks &blocks, int n_ph) {
  require_manifold(state, blocks, n_ph);
  const auto &basis = blocks.bases[static_cast<std::size_t>(n_ph)];
  const CVec &psi = state.psi[static_cast<std::size_t>(n_ph)];
  const double norm2 = psi.squaredNorm();
  if (!(norm2 > 0.0)) {
    throw std::domain_error("empty manifold component");
  }
  const int ns = basis.num_sites();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(ns, ns);
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const double w = std::norm(psi(static_cast<Eigen::Index>(k))) / norm2;
    if (w == 0.0) {
      continue;
    }
    const auto s = basis.state(k);
    for (int i = 0; i < ns; ++i) {
      const double ni = s[static_cast<std::size_t>(i)];
      if (ni == 0.0) {
        continue;
      }
      for (int j = 0; j < ns; ++j) {
        const double nj = s[static_cast<std::size_t>(j)];
        g(i, j) += w * ni * (i == j ? nj - 1.0 : nj);
      }
    }
  }
  return g;
}

double overlap_with_manifold(const CVec &psi, const CMat &targets) {
  if (targets.rows() != psi.size()) {
    throw std::invalid_argument("target vectors live in a different manifold");
  }
  const CMat gram = targets.adjoint() * targets;
  const CMat defect = gram - CMat::Identity(gram.rows(), gram.cols());
  if (defect.cwiseAbs().maxCoeff() > 1e-8) {
    throw std::invalid_argument("overlap targets are not orthonormal");
  }
  const double n2 = psi.squaredNorm();
  if (!(n2 > 0.0)) {
    throw std::domain_error("overlap of a zero vector");
  }
  return (targets.adjoint() * psi).squaredNorm() / n2;
}

double mean_photon_number(const MetastableState &state) {
  double num = 0.0;
  double den = 0.0;
  for (int n = 0; n <= state.nmax(); ++n) {
    const double w = state.psi[static_cast<std::size_t>(n)].squaredNorm();
    num += n * w;
    den += w;
  }
  return num / den;
}

NonlinearityEstimate nonlinearity_estimate(const HeffBlocks &blocks, unsigned seed) {
  if (blocks.nmax() < 2) {
    throw std::invalid_argument("nonlinearity estimate needs manifolds 1 and 2");
  }
  NonlinearityEstimate est;
  est.e1 = lowest_eigenpairs(blocks.sys[1], 1, 1e-10, seed).values(0);
  est.e2 = lowest_eigenpairs(blocks.sys[2], 1, 1e-10, seed).values(0);
  est.delta_u = 0.5 * est.e2 - est.e1;
  const double r = est.delta_u / blocks.params.kappa;
  est.g_max = 1.0 + r * r;
  return est;
}

CorrelationReport correlation_report(const MetastableState &state, const HeffBlocks &blocks, int n_ph) {
  CorrelationReport rep;
  const int ns = blocks.bases.front().num_sites();
  const DetectionMode cm = DetectionMode::uniform(ns);
  const int top = std::min(state.nmax(), blocks.nmax());
  const double solver = state.max_solve_residual();
  if (top >= 2) {
    rep.g2_cm = gn_detection_mode(state, blocks, cm, 2);
    rep.g2_cm_error = rep.g2_cm * (gn_relative_correction(state, 2) + 4.0 * solver);
    rep.onsite_g2.reserve(static_cast<std::size_t>(ns));
    for (int i = 0; i < ns; ++i) {
      rep.onsite_g2.push_back(gn_detection_mode(state, blocks, DetectionMode::single_site(ns, i), 2));
    }
  }
  if (top >= 3) {
    rep.g3_cm = gn_detection_mode(state, blocks, cm, 3);
    rep.g3_cm_error = rep.g3_cm * (gn_relative_correction(state, 3) + 6.0 * solver);
  }
  if (n_ph >= 1 && n_ph <= top) {
    rep.two_point = two_point_projected(state, blocks, n_ph);
  }
  rep.n_tot = mean_photon_number(state);
  return rep;
}

} // namespace phq
