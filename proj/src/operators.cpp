#include "phq/operators.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <stdexcept>

namespace phq {

void ModelParams::validate() const {
  if (!(J > 0.0)) {
    throw std::invalid_argument("J must be positive");
  }
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("kappa must be positive");
  }
  if (!hard_core && !(U >= 0.0)) {
    throw std::invalid_argument("U must be non-negative");
  }
  if (!(beta >= 0.0) || !std::isfinite(Delta)) {
    throw std::invalid_argument("beta must be non-negative and Delta finite");
  }
}

namespace {

cplx unit_phase(double turns) {
  const double angle = 2.0 * std::numbers::pi * turns;
  return {std::cos(angle), std::sin(angle)};
}

// exp(i 2 pi num/den) with the numerator reduced first so the angle stays exact.
cplx rational_phase(long num, long den) {
  long r = num % den;
  if (r < 0) {
    r += den;
  }
  return unit_phase(static_cast<double>(r) / static_cast<double>(den));
}

struct Hop {
  int from;
  int to;
  cplx phase;
};

std::vector<Hop> forward_hops(const LinkPhaseTable &links) {
  std::vector<Hop> hops;
  for (int y = 0; y < links.ny; ++y) {
    for (int x = 0; x < links.nx; ++x) {
      const int i = x + links.nx * y;
      if (links.nx > 1) {
        hops.push_back({i, (x + 1) % links.nx + links.nx * y, links.x_link[static_cast<std::size_t>(i)]});
      }
      if (links.ny > 1) {
        hops.push_back({i, x + links.nx * ((y + 1) % links.ny), links.y_link[static_cast<std::size_t>(i)]});
      }
    }
  }
  return hops;
}

} // namespace

LinkPhaseTable build_link_phases(const LatticeGeometry &g) {
  LinkPhaseTable t;
  t.nx = g.nx();
  t.ny = g.ny();
  const auto ns = static_cast<std::size_t>(g.num_sites());
  t.x_link.assign(ns, cplx(1.0));
  t.y_link.assign(ns, cplx(1.0));
  const long p = g.alpha_num();
  const long q = g.alpha_den();
  for (int y = 0; y < g.ny(); ++y) {
    for (int x = 0; x < g.nx(); ++x) {
      const auto i = static_cast<std::size_t>(g.site(x, y));
      t.x_link[i] = rational_phase(p * y, q);
      if (y == g.ny() - 1) {
        t.y_link[i] = rational_phase(-p * g.ny() * x, q);
      }
    }
  }
  return t;
}

LinkPhaseTable build_link_phases(int nx, int ny, double alpha) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("lattice dimensions must be >= 1");
  }
  LinkPhaseTable t;
  t.nx = nx;
  t.ny = ny;
  const auto ns = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  t.x_link.assign(ns, cplx(1.0));
  t.y_link.assign(ns, cplx(1.0));
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const auto i = static_cast<std::size_t>(x + nx * y);
      t.x_link[i] = unit_phase(alpha * y);
      if (y == ny - 1) {
        t.y_link[i] = unit_phase(-alpha * ny * x);
      }
    }
  }
  return t;
}

cplx plaquette_product(const LinkPhaseTable &links, int x, int y) {
  const int nx = links.nx;
  const int ny = links.ny;
  const auto at = [nx](int xx, int yy) { return static_cast<std::size_t>(xx + nx * yy); };
  const int x1 = (x + 1) % nx;
  const int y1 = (y + 1) % ny;
  return links.x_link[at(x, y)] * links.y_link[at(x1, y)] * std::conj(links.x_link[at(x, y1)]) *
         std::conj(links.y_link[at(x, y)]);
}

LinkPhaseTable gauge_transform(const LinkPhaseTable &links, const std::vector<double> &chi) {
  const auto ns = static_cast<std::size_t>(links.nx) * static_cast<std::size_t>(links.ny);
  if (chi.size() != ns) {
    throw std::invalid_argument("gauge angle per site required");
  }
  LinkPhaseTable out = links;
  for (int y = 0; y < links.ny; ++y) {
    for (int x = 0; x < links.nx; ++x) {
      const auto i = static_cast<std::size_t>(x + links.nx * y);
      const auto jx = static_cast<std::size_t>((x + 1) % links.nx + links.nx * y);
      const auto jy = static_cast<std::size_t>(x + links.nx * ((y + 1) % links.ny));
      out.x_link[i] *= std::polar(1.0, chi[jx] - chi[i]);
      out.y_link[i] *= std::polar(1.0, chi[jy] - chi[i]);
    }
  }
  return out;
}

DetectionMode DetectionMode::uniform(int num_sites) {
  if (num_sites < 1) {
    throw std::invalid_argument("mode needs at least one site");
  }
  return {std::vector<cplx>(static_cast<std::size_t>(num_sites), cplx(1.0 / std::sqrt(double(num_sites))))};
}

DetectionMode DetectionMode::single_site(int num_sites, int site) {
  if (site < 0 || site >= num_sites) {
    throw std::out_of_range("mode site out of range");
  }
  DetectionMode m{std::vector<cplx>(static_cast<std::size_t>(num_sites), cplx(0.0))};
  m.c[static_cast<std::size_t>(site)] = 1.0;
  return m;
}

DetectionMode DetectionMode::from_coefficients(std::vector<cplx> c) {
  double n2 = 0.0;
  for (const auto &v : c) {
    n2 += std::norm(v);
  }
  if (c.empty() || std::abs(n2 - 1.0) > 1e-12) {
    throw std::invalid_argument("detection mode coefficients must have unit norm");
  }
  return {std::move(c)};
}

SparseOperator build_hopping_block(const ManifoldBasis &basis, const LinkPhaseTable &links, double J) {
  const LatticeGeometry &g = basis.geometry();
  if (links.nx != g.nx() || links.ny != g.ny()) {
    throw std::invalid_argument("link table and basis have different geometries");
  }
  const auto hops = forward_hops(links);
  const int cap = basis.cap();
  std::vector<Triplet> t;
  t.reserve(basis.dim() * hops.size() * 2);
  Occupation work(static_cast<std::size_t>(basis.num_sites()));
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const auto s = basis.state(k);
    std::copy(s.begin(), s.end(), work.begin());
    for (const auto &h : hops) {
      // Both a^dag_to a_from (phase) and a^dag_from a_to (conjugate phase).
      for (int dir = 0; dir < 2; ++dir) {
        const auto src = static_cast<std::size_t>(dir == 0 ? h.from : h.to);
        const auto dst = static_cast<std::size_t>(dir == 0 ? h.to : h.from);
        const cplx ph = dir == 0 ? h.phase : std::conj(h.phase);
        if (work[src] == 0 || work[dst] >= cap) {
          continue;
        }
        const double amp = std::sqrt(double(work[src]) * double(work[dst] + 1));
        --work[src];
        ++work[dst];
        t.push_back({basis.rank_unchecked(work), k, -J * ph * amp});
        ++work[src];
        --work[dst];
      }
    }
  }
  return from_triplets(basis.dim(), basis.dim(), std::move(t), basis.photons(), basis.photons());
}

SparseOperator build_interaction_block(const ManifoldBasis &basis, const ModelParams &params) {
  if (params.hard_core && basis.cap() > 1) {
    throw std::invalid_argument("hard-core interaction requires a basis with cap 1");
  }
  std::vector<Triplet> t;
  if (!params.hard_core) {
    for (std::size_t k = 0; k < basis.dim(); ++k) {
      double e = 0.0;
      for (auto v : basis.state(k)) {
        e += double(v) * double(v - 1);
      }
      if (e != 0.0) {
        t.push_back({k, k, params.U * e});
      }
    }
  }
  return from_triplets(basis.dim(), basis.dim(), std::move(t), basis.photons(), basis.photons());
}

SparseOperator build_potential_block(const ManifoldBasis &basis, const std::vector<double> &w) {
  if (w.size() != static_cast<std::size_t>(basis.num_sites())) {
    throw std::invalid_argument("potential needs one value per site");
  }
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const auto s = basis.state(k);
    double e = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      e += w[i] * s[i];
    }
    t.push_back({k, k, e});
  }
  return from_triplets(basis.dim(), basis.dim(), std::move(t), basis.photons(), basis.photons());
}

SparseOperator build_raising(const ManifoldBasis &from, const ManifoldBasis &to, const std::vector<cplx> &coeffs) {
  if (to.photons() != from.photons() + 1 || to.cap() != from.cap() || !(to.geometry() == from.geometry())) {
    throw std::invalid_argument("raising operator needs manifolds n and n+1 of one lattice and cap");
  }
  if (coeffs.size() != static_cast<std::size_t>(from.num_sites())) {
    throw std::invalid_argument("mode needs one coefficient per site");
  }
  std::vector<Triplet> t;
  t.reserve(from.dim() * coeffs.size());
  Occupation work(static_cast<std::size_t>(from.num_sites()));
  for (std::size_t k = 0; k < from.dim(); ++k) {
    const auto s = from.state(k);
    std::copy(s.begin(), s.end(), work.begin());
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      if (coeffs[i] == cplx(0.0) || work[i] >= from.cap()) {
        continue;
      }
      const double amp = std::sqrt(double(work[i]) + 1.0);
      ++work[i];
      t.push_back({to.rank_unchecked(work), k, coeffs[i] * amp});
      --work[i];
    }
  }
  return from_triplets(to.dim(), from.dim(), std::move(t), from.photons(), to.photons());
}

SparseOperator build_raising(const ManifoldBasis &from, const ManifoldBasis &to, const DetectionMode &mode) {
  return build_raising(from, to, mode.c);
}

SparseOperator build_lowering(const ManifoldBasis &from, const ManifoldBasis &to, const DetectionMode &mode) {
  return adjoint(build_raising(to, from, mode.c));
}

std::size_t HeffBlocks::total_dim() const {
  std::size_t d = 0;
  for (const auto &b : bases) {
    d += b.dim();
  }
  return d;
}

std::size_t HeffBlocks::offset(int n) const {
  std::size_t d = 0;
  for (int k = 0; k < n; ++k) {
    d += bases[static_cast<std::size_t>(k)].dim();
  }
  return d;
}

namespace {

SparseOperator add_scaled_identity(const SparseOperator &a, cplx shift) {
  std::vector<Triplet> t;
  t.reserve(a.nnz() + a.rows);
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      t.push_back({r, a.col[p], a.val[p]});
    }
    t.push_back({r, r, shift});
  }
  return from_triplets(a.rows, a.cols, std::move(t), a.source, a.target);
}

SparseOperator sum(const SparseOperator &a, const SparseOperator &b) {
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (const SparseOperator *m : {&a, &b}) {
    for (std::size_t r = 0; r < m->rows; ++r) {
      for (std::size_t p = m->row_ptr[r]; p < m->row_ptr[r + 1]; ++p) {
        t.push_back({r, m->col[p], m->val[p]});
      }
    }
  }
  return from_triplets(a.rows, a.cols, std::move(t), a.source, a.target);
}

SparseOperator scaled(SparseOperator a, cplx s) {
  for (auto &v : a.val) {
    v *= s;
  }
  return a;
}

} // namespace

HeffBlocks assemble_heff_blocks(const ModelParams &params, std::vector<ManifoldBasis> bases,
                                const LinkPhaseTable &links) {
  params.validate();
  if (bases.empty()) {
    throw std::invalid_argument("missing manifold: at least the vacuum is required");
  }
  for (std::size_t n = 0; n < bases.size(); ++n) {
    if (bases[n].photons() != static_cast<int>(n)) {
      throw std::invalid_argument("missing manifold " + std::to_string(n));
    }
  }
  HeffBlocks h;
  h.params = params;
  h.bases = std::move(bases);
  const int ns = h.bases.front().num_sites();
  const std::vector<cplx> ones(static_cast<std::size_t>(ns), cplx(1.0));
  const cplx shift = -(params.Delta + cplx(0.0, params.kappa));
  for (std::size_t n = 0; n < h.bases.size(); ++n) {
    const auto &b = h.bases[n];
    h.sys.push_back(sum(build_hopping_block(b, links, params.J), build_interaction_block(b, params)));
    h.diag.push_back(add_scaled_identity(h.sys.back(), shift * double(n)));
    if (n + 1 < h.bases.size()) {
      h.drive_raise.push_back(build_raising(b, h.bases[n + 1], ones));
      h.raise.push_back(scaled(h.drive_raise.back(), params.kappa * params.beta));
      h.lower.push_back(adjoint(h.raise.back()));
    }
  }
  return h;
}

int default_cap(const ModelParams &params, int nmax) { return params.hard_core ? 1 : std::max(1, std::min(nmax, 3)); }

HeffBlocks assemble_heff(const LatticeGeometry &geometry, const ModelParams &params, int nmax) {
  return assemble_heff_blocks(params, enumerate_manifolds(geometry, nmax, default_cap(params, nmax)),
                              build_link_phases(geometry));
}

namespace {

SparseOperator stitch(const HeffBlocks &h, bool driven) {
  const std::size_t dim = h.total_dim();
  std::vector<Triplet> t;
  const auto append = [&t](const SparseOperator &m, std::size_t ro, std::size_t co) {
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) {
        t.push_back({ro + r, co + m.col[p], m.val[p]});
      }
    }
  };
  for (int n = 0; n <= h.nmax(); ++n) {
    const auto on = h.offset(n);
    append(driven ? h.diag[static_cast<std::size_t>(n)] : h.sys[static_cast<std::size_t>(n)], on, on);
    if (driven && n < h.nmax()) {
      const auto on1 = h.offset(n + 1);
      append(h.raise[static_cast<std::size_t>(n)], on1, on);
      append(h.lower[static_cast<std::size_t>(n)], on, on1);
    }
  }
  return from_triplets(dim, dim, std::move(t));
}

} // namespace

SparseOperator full_heff(const HeffBlocks &blocks) { return stitch(blocks, true); }
SparseOperator full_hsys(const HeffBlocks &blocks) { return stitch(blocks, false); }

} // namespace phq
