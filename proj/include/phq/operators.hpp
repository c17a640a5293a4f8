#pragma once

#include <vector>

#include "phq/kernels.hpp"
#include "phq/lattice.hpp"

namespace phq {

/// Drive, loss and interaction parameters. Energies are in units of the
/// tunneling rate J, which is fixed to 1.
struct ModelParams {
  double J = 1.0;
  double U = 0.0;
  bool hard_core = false; ///< U -> infinity, realized by a per-site cap of 1
  double Delta = 0.0;     ///< pump detuning omega_p - omega_0
  double kappa = 0.01;
  double beta = 0.01;

  void validate() const;
};

/// Peierls phases of the forward links of every site.
///
/// x_link[i] multiplies a^dag_{x+1,y} a_{x,y} and y_link[i] multiplies
/// a^dag_{x,y+1} a_{x,y}; the reverse hops carry the conjugates. Landau gauge
/// puts exp(i 2 pi alpha y) on x-links; the y-links closing the torus carry
/// exp(-i 2 pi alpha Ny x). With this choice the counterclockwise product
/// around every plaquette is exp(-i 2 pi alpha).
///
/// A direction of extent 1 has no links.
struct LinkPhaseTable {
  int nx = 0;
  int ny = 0;
  std::vector<cplx> x_link;
  std::vector<cplx> y_link;
};

LinkPhaseTable build_link_phases(const LatticeGeometry &geometry);

/// Same gauge for an arbitrary real flux per plaquette. When alpha*Nx*Ny is
/// not an integer the mismatch sits in the corner plaquette (Nx-1, Ny-1).
LinkPhaseTable build_link_phases(int nx, int ny, double alpha);

/// Counterclockwise product of link phases around the plaquette with lower-left corner (x, y).
cplx plaquette_product(const LinkPhaseTable &links, int x, int y);

/// Applies a_i -> exp(i chi_i) a_i to every link.
LinkPhaseTable gauge_transform(const LinkPhaseTable &links, const std::vector<double> &chi);

/// Mode d = sum_i c_i a_i with unit-norm coefficients.
struct DetectionMode {
  std::vector<cplx> c;

  static DetectionMode uniform(int num_sites);
  static DetectionMode single_site(int num_sites, int site);
  static DetectionMode from_coefficients(std::vector<cplx> c);
};

/// -J sum (phased hops + h.c.) restricted to one manifold.
SparseOperator build_hopping_block(const ManifoldBasis &basis, const LinkPhaseTable &links, double J = 1.0);

/// Diagonal U * sum_i n_i (n_i - 1).
SparseOperator build_interaction_block(const ManifoldBasis &basis, const ModelParams &params);

/// Diagonal sum_i w_i n_i for a site potential w.
SparseOperator build_potential_block(const ManifoldBasis &basis, const std::vector<double> &w);

/// Matrix of sum_i coeffs_i a^dag_i from manifold n to n+1.
SparseOperator build_raising(const ManifoldBasis &from, const ManifoldBasis &to, const std::vector<cplx> &coeffs);

/// d^dag for a unit-normalized detection mode.
SparseOperator build_raising(const ManifoldBasis &from, const ManifoldBasis &to, const DetectionMode &mode);

/// Matrix of sum_i conj(c_i) a_i from manifold n+1 to n, i.e. the adjoint of build_raising.
SparseOperator build_lowering(const ManifoldBasis &from, const ManifoldBasis &to, const DetectionMode &mode);

/// Block-tridiagonal truncated H_eff in photon number.
///
/// diag[n] = H_hop + H_int - n (Delta + i kappa), raise[n] maps manifold n to
/// n+1 and equals kappa*beta*sum_i a^dag_i; lower[n] is its adjoint. sys[n]
/// keeps the undriven Hermitian H_hop + H_int, and drive_raise[n] is the bare
/// sum_i a^dag_i.
struct HeffBlocks {
  ModelParams params;
  std::vector<ManifoldBasis> bases;
  std::vector<SparseOperator> sys;
  std::vector<SparseOperator> diag;
  std::vector<SparseOperator> drive_raise;
  std::vector<SparseOperator> raise;
  std::vector<SparseOperator> lower;

  int nmax() const { return static_cast<int>(bases.size()) - 1; }
  std::size_t total_dim() const;
  std::size_t offset(int n) const;
};

HeffBlocks assemble_heff_blocks(const ModelParams &params, std::vector<ManifoldBasis> bases,
                                const LinkPhaseTable &links);

/// Convenience: bases for 0..nmax with the cap implied by params (1 for hard
/// core, min(nmax, 3) otherwise), link phases from the geometry.
HeffBlocks assemble_heff(const LatticeGeometry &geometry, const ModelParams &params, int nmax);

int default_cap(const ModelParams &params, int nmax);

/// All blocks of H_eff as one CSR matrix over manifolds 0..nmax.
SparseOperator full_heff(const HeffBlocks &blocks);

/// Undriven Hermitian H_sys over manifolds 0..nmax as one CSR matrix.
SparseOperator full_hsys(const HeffBlocks &blocks);

} // namespace phq
