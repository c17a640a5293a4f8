#pragma once

#include <vector>

#include "phq/steady_state.hpp"

namespace phq {

/// Leading-order g^(n) = <d^dag^n d^n> / <d^dag d>^n of a detection mode.
///
/// The numerator uses psi_n only and the denominator psi_1 only; quantum
/// jumps enter at relative O(beta^2) and are dropped.
double gn_detection_mode(const MetastableState &state, const HeffBlocks &blocks, const DetectionMode &mode, int n);

/// Relative size of the dropped O(beta^2) terms for g^(n), built from the
/// norm ratios of successive manifolds.
double gn_relative_correction(const MetastableState &state, int n);

/// Unnormalized leading-order G^(n) = |d^n psi_n|^2.
double Gn_leading(const MetastableState &state, const HeffBlocks &blocks, const DetectionMode &mode, int n);

/// g(i,j) = <a_i^dag a_j^dag a_j a_i> in the normalized psi_{n_ph}.
/// Row-major Ns x Ns.
Eigen::MatrixXd two_point_projected(const MetastableState &state, const HeffBlocks &blocks, int n_ph);

/// ||P psi||^2 / ||psi||^2 for the projector onto the span of the columns of
/// `targets`, which must be orthonormal.
double overlap_with_manifold(const CVec &psi, const CMat &targets);

/// Mean total photon number of the metastable state.
double mean_photon_number(const MetastableState &state);

struct NonlinearityEstimate {
  double e1 = 0.0;
  double e2 = 0.0;
  double delta_u = 0.0; ///< E2/2 - E1
  double g_max = 1.0;   ///< 1 + (delta_u / kappa)^2
};

/// Single-mode estimate from the lowest one- and two-photon energies.
NonlinearityEstimate nonlinearity_estimate(const HeffBlocks &blocks, unsigned seed = 12345);

struct CorrelationReport {
  double g2_cm = 0.0;
  double g3_cm = 0.0;
  double g2_cm_error = 0.0; ///< absolute annotation: dropped jump terms plus solver residual
  double g3_cm_error = 0.0;
  std::vector<double> onsite_g2;
  Eigen::MatrixXd two_point;
  double n_tot = 0.0;
};

/// Everything that needs only the metastable state. Entries that need a
/// manifold beyond nmax are left at zero.
CorrelationReport correlation_report(const MetastableState &state, const HeffBlocks &blocks, int n_ph);

} // namespace phq
