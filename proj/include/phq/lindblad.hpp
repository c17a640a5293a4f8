#pragma once

#include <Eigen/SparseCore>

#include "phq/observables.hpp"

namespace phq {

/// Rotating-frame Liouvillian on the full truncated space (manifolds 0..nmax)
///   L[rho] = -i [H, rho] + kappa sum_i (2 a_i rho a_i^dag - a_i^dag a_i rho - rho a_i^dag a_i)
/// with H = H_sys - Delta N + kappa beta sum_i (a_i + a_i^dag). Acts on
/// column-stacked rho.
struct Liouvillian {
  HeffBlocks blocks;
  std::size_t hilbert_dim = 0;
  Eigen::SparseMatrix<cplx> matrix;
};

constexpr std::size_t kMaxLindbladHilbertDim = 256;

/// cap <= 0 picks the default per-site cap of assemble_heff.
Liouvillian build_liouvillian(const LatticeGeometry &geometry, const ModelParams &params, int nmax, int cap = 0);

/// Unique steady state: solves L rho = 0 with one equation replaced by tr rho = 1,
/// then Hermitizes. Throws when the null space is not one-dimensional.
CMat exact_steady_state(const Liouvillian &l);

/// ||L[rho]|| for a density matrix over the same space.
double liouvillian_residual(const Liouvillian &l, const CMat &rho);

/// tr(rho d^dag^n d^n) for a detection mode.
double Gn_exact(const Liouvillian &l, const CMat &rho, const DetectionMode &mode, int n);

/// Population of each photon-number manifold.
std::vector<double> manifold_populations(const Liouvillian &l, const CMat &rho);

/// |G_exact - G_metastable| / G_exact with the metastable value at leading order.
double compare_Gn(const Liouvillian &l, const CMat &rho, const MetastableState &state, const DetectionMode &mode,
                  int n);

} // namespace phq
