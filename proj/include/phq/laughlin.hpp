#pragma once

#include <string>
#include <vector>

#include "phq/linear_solvers.hpp"
#include "phq/operators.hpp"

namespace phq {

/// Discrete choices left open by the analytic torus Laughlin form.
///
/// imag_sign selects the holomorphic coordinate w = x + i*imag_sign*y and
/// b_char is the second characteristic of the center-of-mass theta function.
struct LaughlinConvention {
  int imag_sign = -1;
  double b_char = 0.0;

  std::string tag() const;
};

/// The four conventions tried by select_laughlin_convention.
std::vector<LaughlinConvention> laughlin_convention_candidates();

/// One nu = 1/2 torus Laughlin state over a fixed photon-number basis.
///
///   psi(w_1..w_N) = theta[a; b](2W/Lx | 2 tau) * prod_{i<j} theta_1(pi (w_i - w_j)/Lx | tau)^2
///                   * exp(-sum_j y_j^2 / (2 l_B^2))
///
/// with tau = i Ny/Nx, W = sum_j w_j, a = l/2 + (Nphi - 2)/4 and
/// l_B^2 = 1/(2 pi alpha). Amplitudes on multiply occupied states are zero.
struct LaughlinTorusState {
  int n_ph = 0;
  int l = 0;
  double magnetic_length_sq = 0.0;
  LaughlinConvention convention;
  CVec amplitudes; ///< unit norm, over the basis passed to build_laughlin
};

LaughlinTorusState build_laughlin(const ManifoldBasis &basis, int l, const LaughlinConvention &conv = {});

/// Both degeneracy partners as orthonormal columns (l = 1 Gram-Schmidt
/// orthogonalized against l = 0).
CMat build_laughlin_pair(const ManifoldBasis &basis, const LaughlinConvention &conv = {});

/// k lowest eigenpairs of the undriven hopping block of `basis`.
EigenPairs ed_ground_manifold(const ManifoldBasis &basis, const LinkPhaseTable &links, int k,
                              double tol = 1e-10, unsigned seed = 12345);

/// (1/k) tr(P_a P_b) for two sets of orthonormal columns of equal count k.
double subspace_overlap(const CMat &a, const CMat &b);

struct ConventionChoice {
  LaughlinConvention convention;
  CMat pair;                          ///< orthonormal Laughlin pair for the chosen convention
  EigenPairs ed;                      ///< two lowest hard-core eigenpairs
  double ed_overlap = 0.0;            ///< subspace overlap of `pair` with the ED pair
  std::vector<double> candidate_overlaps; ///< same order as laughlin_convention_candidates()
};

/// Builds the pair under every candidate convention and keeps the one whose
/// span best matches the two lowest eigenstates of the hard-core hopping block.
ConventionChoice select_laughlin_convention(const ManifoldBasis &basis, const LinkPhaseTable &links,
                                            unsigned seed = 12345);

} // namespace phq
