#include "phq/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "phq/observables.hpp"

namespace phq {

namespace {

constexpr double kDegenerate = 1e-9;
constexpr double kResidualLimit = 1e-9;

double ramp_up(double s, double v) { return s * v; }
double ramp_down(double s, double v) { return (1.0 - s) * v; }

} // namespace

const char *stage_name(ProtocolStage stage) {
  switch (stage) {
  case ProtocolStage::Pin:
    return "ii";
  case ProtocolStage::Impurity:
    return "iii";
  case ProtocolStage::Flux:
    return "iv";
  case ProtocolStage::Melt:
    return "v";
  case ProtocolStage::Release:
    return "vi";
  }
  return "?";
}

void ProtocolSchedule::validate() const {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("protocol lattice extents must be positive");
  }
  if (pin_nx < 1 || pin_ny < 1 || pin_nx > nx || pin_ny > ny) {
    throw std::invalid_argument("pinning sublattice must fit inside the lattice");
  }
  if (impurity_x < 0 || impurity_x >= nx || impurity_y < 0 || impurity_y >= ny) {
    throw std::invalid_argument("impurity site outside the lattice");
  }
  if (!(v_sl >= 0.0) || !(v_pert >= 0.0)) {
    throw std::invalid_argument("potential depths must be non-negative");
  }
  if (points_per_stage < 1) {
    throw std::invalid_argument("protocol needs at least one point per stage");
  }
  const double flux = alpha_final * nx * ny;
  if (!(alpha_final >= 0.0) || std::abs(flux - std::round(flux)) > 1e-9) {
    throw std::invalid_argument("alpha_final * Nx * Ny must be a non-negative integer");
  }
  if (static_cast<int>(pinning_sites().size()) != photons()) {
    throw std::invalid_argument("pinning sites collide; photon count mismatch");
  }
}

int ProtocolSchedule::final_nphi() const { return static_cast<int>(std::lround(alpha_final * nx * ny)); }

std::vector<int> ProtocolSchedule::pinning_sites() const {
  std::vector<int> sites;
  for (int j = 0; j < pin_ny; ++j) {
    for (int i = 0; i < pin_nx; ++i) {
      sites.push_back((i * nx) / pin_nx + nx * ((j * ny) / pin_ny));
    }
  }
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return sites;
}

ProtocolControls controls_at(const ProtocolSchedule &schedule, ProtocolStage stage, double s) {
  const double pert = schedule.impurity_on ? schedule.v_pert : 0.0;
  ProtocolControls c;
  c.stage = stage;
  c.s = s;
  switch (stage) {
  case ProtocolStage::Pin:
    c.v_sl = ramp_up(s, schedule.v_sl);
    break;
  case ProtocolStage::Impurity:
    c.v_sl = schedule.v_sl;
    c.v_pert = ramp_up(s, pert);
    break;
  case ProtocolStage::Flux:
    c.v_sl = schedule.v_sl;
    c.v_pert = pert;
    c.alpha = ramp_up(s, schedule.alpha_final);
    break;
  case ProtocolStage::Melt:
    c.v_sl = ramp_down(s, schedule.v_sl);
    c.v_pert = pert;
    c.alpha = schedule.alpha_final;
    break;
  case ProtocolStage::Release:
    c.v_pert = ramp_down(s, pert);
    c.alpha = schedule.alpha_final;
    break;
  }
  return c;
}

std::vector<ProtocolControls> protocol_grid(const ProtocolSchedule &schedule) {
  schedule.validate();
  const int m = schedule.points_per_stage;
  std::vector<ProtocolControls> grid;
  for (auto stage : {ProtocolStage::Pin, ProtocolStage::Impurity, ProtocolStage::Flux, ProtocolStage::Melt,
                     ProtocolStage::Release}) {
    for (int k = 0; k < m; ++k) {
      const double s = m == 1 ? 1.0 : double(k) / double(m - 1);
      grid.push_back(controls_at(schedule, stage, s));
    }
  }
  return grid;
}

SparseOperator build_protocol_hamiltonian(const ManifoldBasis &basis, const ProtocolSchedule &schedule,
                                          const ProtocolControls &controls) {
  schedule.validate();
  const LatticeGeometry &g = basis.geometry();
  if (g.nx() != schedule.nx || g.ny() != schedule.ny) {
    throw std::invalid_argument("basis lattice differs from the schedule lattice");
  }
  if (basis.cap() != 1) {
    throw std::invalid_argument("protocol runs on the hard-core basis");
  }
  if (basis.photons() != schedule.photons()) {
    throw std::invalid_argument("pinning count " + std::to_string(schedule.photons()) + " does not match N_ph " +
                                std::to_string(basis.photons()));
  }
  const SparseOperator hop = build_hopping_block(basis, build_link_phases(g.nx(), g.ny(), controls.alpha));
  std::vector<double> w(static_cast<std::size_t>(g.num_sites()), 0.0);
  for (int i : schedule.pinning_sites()) {
    w[static_cast<std::size_t>(i)] -= controls.v_sl;
  }
  w[static_cast<std::size_t>(schedule.impurity_site())] -= controls.v_pert;
  const SparseOperator pot = build_potential_block(basis, w);

  std::vector<Triplet> t;
  t.reserve(hop.nnz() + pot.nnz());
  for (const SparseOperator *op : {&hop, &pot}) {
    for (std::size_t r = 0; r < op->rows; ++r) {
      for (std::size_t p = op->row_ptr[r]; p < op->row_ptr[r + 1]; ++p) {
        t.push_back({r, op->col[p], op->val[p]});
      }
    }
  }
  return from_triplets(basis.dim(), basis.dim(), std::move(t), basis.photons(), basis.photons());
}

double ProtocolResult::min_gap(ProtocolStage first, ProtocolStage last) const {
  double best = INFINITY;
  for (const auto &r : records) {
    const int st = static_cast<int>(r.controls.stage);
    if (st >= static_cast<int>(first) && st <= static_cast<int>(last)) {
      best = std::min(best, r.gap);
    }
  }
  return best;
}

std::size_t ProtocolResult::flagged() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const TrackingRecord &r) { return r.level_crossing; }));
}

ProtocolResult track_spectrum(const ProtocolSchedule &schedule, const std::vector<ProtocolControls> &grid,
                              double tol) {
  schedule.validate();
  const int nph = schedule.photons();
  if (schedule.final_nphi() != 2 * nph) {
    throw std::invalid_argument("Laughlin tracking needs alpha_final * Nx * Ny = 2 N_ph");
  }
  const LatticeGeometry gfinal = build_geometry(schedule.nx, schedule.ny, schedule.final_nphi());
  const ManifoldBasis basis(gfinal, nph, 1);
  if (basis.dim() < 2) {
    throw std::invalid_argument("protocol sector has fewer than two states");
  }

  ProtocolResult out;
  const ConventionChoice choice = select_laughlin_convention(basis, build_link_phases(gfinal));
  out.convention = choice.convention;
  out.laughlin_ed_overlap = choice.ed_overlap;

  const auto npts = static_cast<std::ptrdiff_t>(grid.size());
  std::vector<EigenPairs> pairs(grid.size());
  std::vector<std::string> errors(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < npts; ++k) {
    try {
      const auto uk = static_cast<std::size_t>(k);
      pairs[uk] = lowest_eigenpairs(build_protocol_hamiltonian(basis, schedule, grid[uk]), 2, tol);
    } catch (const std::exception &e) {
      errors[static_cast<std::size_t>(k)] = e.what();
    }
  }
  for (const auto &e : errors) {
    if (!e.empty()) {
      throw SolverError("protocol eigensolve failed: " + e, -1.0);
    }
  }

  CVec prev0;
  CVec prev1;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const EigenPairs &ep = pairs[k];
    CVec v0 = ep.vectors.col(0);
    CVec v1 = ep.vectors.col(1);
    TrackingRecord rec;
    rec.controls = grid[k];
    rec.e0 = ep.values(0);
    rec.e1 = ep.values(1);
    rec.gap = rec.e1 - rec.e0;
    rec.residual = ep.residuals.maxCoeff();
    if (rec.residual > kResidualLimit) {
      throw SolverError("protocol eigenpair residual above limit", rec.residual);
    }
    if (prev0.size() > 0) {
      if (rec.gap < kDegenerate * std::max(1.0, std::abs(rec.e0))) {
        // Follow the previous ground state inside the degenerate plane.
        const cplx c0 = v0.dot(prev0);
        const cplx c1 = v1.dot(prev0);
        const double nrm = std::sqrt(std::norm(c0) + std::norm(c1));
        if (nrm > 0.0) {
          const CVec a = (c0 * v0 + c1 * v1) / nrm;
          const CVec b = (-std::conj(c1) * v0 + std::conj(c0) * v1) / nrm;
          v0 = a;
          v1 = b;
        }
      }
      for (auto [v, p] : {std::pair<CVec *, const CVec *>{&v0, &prev0}, {&v1, &prev1}}) {
        const cplx ov = p->dot(*v);
        if (std::abs(ov) > 0.0) {
          *v *= std::conj(ov) / std::abs(ov);
        }
      }
      rec.continuity = std::norm(prev0.dot(v0));
      rec.level_crossing = rec.continuity < 0.5;
    }
    rec.overlap0 = overlap_with_manifold(v0, choice.pair);
    rec.overlap1 = overlap_with_manifold(v1, choice.pair);
    out.records.push_back(rec);
    prev0 = std::move(v0);
    prev1 = std::move(v1);
  }
  return out;
}

ProtocolResult track_spectrum(const ProtocolSchedule &schedule) {
  return track_spectrum(schedule, protocol_grid(schedule));
}

} // namespace phq
