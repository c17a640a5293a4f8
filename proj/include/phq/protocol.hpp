#pragma once

#include <string>
#include <vector>

#include "phq/laughlin.hpp"

namespace phq {

/// Stages of the Mott-melting preparation, numbered as in the usual
/// description of the procedure (stage i, loading photons, is implicit).
enum class ProtocolStage { Pin = 2, Impurity = 3, Flux = 4, Melt = 5, Release = 6 };

const char *stage_name(ProtocolStage stage);

/// Controls of the quasi-static preparation. Every stage ramps one control
/// linearly over its own s grid; the others hold their current value.
///
///   ii   V_sl   0 -> v_sl
///   iii  V_pert 0 -> v_pert
///   iv   alpha  0 -> alpha_final
///   v    V_sl   v_sl -> 0
///   vi   V_pert v_pert -> 0
struct ProtocolSchedule {
  int nx = 4;
  int ny = 4;
  int pin_nx = 2; ///< pinning sublattice N'x x N'y; photon count is their product
  int pin_ny = 1;
  int impurity_x = 0; ///< default sits on a pinning site
  int impurity_y = 0;
  double v_sl = 20.0;
  double v_pert = 1.0;
  double alpha_final = 0.25;
  int points_per_stage = 64;
  bool impurity_on = true;

  void validate() const;
  int photons() const { return pin_nx * pin_ny; }
  int final_nphi() const;
  /// Maximally spaced regular sublattice, site indices x + Nx*y.
  std::vector<int> pinning_sites() const;
  int impurity_site() const { return impurity_x + nx * impurity_y; }
};

struct ProtocolControls {
  ProtocolStage stage = ProtocolStage::Pin;
  double s = 0.0;
  double v_sl = 0.0;
  double v_pert = 0.0;
  double alpha = 0.0;
};

ProtocolControls controls_at(const ProtocolSchedule &schedule, ProtocolStage stage, double s);

/// points_per_stage values of s in [0, 1] for each stage, in stage order.
std::vector<ProtocolControls> protocol_grid(const ProtocolSchedule &schedule);

/// Closed-system H = hopping(alpha) - V_sl sum_pinned n_i - V_pert n_imp on a
/// fixed photon-number hard-core basis.
SparseOperator build_protocol_hamiltonian(const ManifoldBasis &basis, const ProtocolSchedule &schedule,
                                          const ProtocolControls &controls);

struct TrackingRecord {
  ProtocolControls controls;
  double e0 = 0.0;
  double e1 = 0.0;
  double gap = 0.0;
  double overlap0 = 0.0;   ///< ground state vs Laughlin pair at alpha_final
  double overlap1 = 0.0;
  double continuity = 1.0; ///< |<previous ground|ground>|^2
  bool level_crossing = false;
  double residual = 0.0;   ///< worst eigenpair residual
};

struct ProtocolResult {
  std::vector<TrackingRecord> records;
  LaughlinConvention convention;
  double laughlin_ed_overlap = 0.0;

  /// Smallest gap over records whose stage lies in [first, last].
  double min_gap(ProtocolStage first, ProtocolStage last) const;
  std::size_t flagged() const;
};

/// Two lowest eigenpairs at every grid point. Eigensolves run in parallel;
/// ordering and phases are then stitched serially by maximal overlap with
/// the previous point. A degenerate pair is rotated so the ground state
/// follows the previous one.
ProtocolResult track_spectrum(const ProtocolSchedule &schedule, const std::vector<ProtocolControls> &grid,
                              double tol = 1e-10);

ProtocolResult track_spectrum(const ProtocolSchedule &schedule);

} // namespace phq
