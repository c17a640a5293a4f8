#include "phq/lindblad.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseLU>

namespace phq {

namespace {

using SpMat = Eigen::SparseMatrix<cplx>;

SpMat to_eigen(const SparseOperator &a) {
  std::vector<Eigen::Triplet<cplx>> t;
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      t.emplace_back(static_cast<int>(r), static_cast<int>(a.col[p]), a.val[p]);
    }
  }
  SpMat m(static_cast<int>(a.rows), static_cast<int>(a.cols));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SpMat kron(const SpMat &a, const SpMat &b) {
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka) {
    for (SpMat::InnerIterator ia(a, ka); ia; ++ia) {
      for (int kb = 0; kb < b.outerSize(); ++kb) {
        for (SpMat::InnerIterator ib(b, kb); ib; ++ib) {
          t.emplace_back(static_cast<int>(ia.row() * b.rows() + ib.row()),
                         static_cast<int>(ia.col() * b.cols() + ib.col()), ia.value() * ib.value());
        }
      }
    }
  }
  SpMat m(a.rows() * b.rows(), a.cols() * b.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// Site lowering operator a_i on the full truncated space.
SpMat site_lowering(const HeffBlocks &h, int site) {
  const int ns = h.bases.front().num_sites();
  const DetectionMode mode = DetectionMode::single_site(ns, site);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int n = 0; n < h.nmax(); ++n) {
    const SparseOperator d = build_lowering(h.bases[static_cast<std::size_t>(n + 1)], h.bases[static_cast<std::size_t>(n)], mode);
    const auto ro = h.offset(n);
    const auto co = h.offset(n + 1);
    for (std::size_t r = 0; r < d.rows; ++r) {
      for (std::size_t p = d.row_ptr[r]; p < d.row_ptr[r + 1]; ++p) {
        t.emplace_back(static_cast<int>(ro + r), static_cast<int>(co + d.col[p]), d.val[p]);
      }
    }
  }
  const auto dim = static_cast<int>(h.total_dim());
  SpMat m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SpMat mode_lowering(const HeffBlocks &h, const DetectionMode &mode) {
  const auto dim = static_cast<int>(h.total_dim());
  SpMat m(dim, dim);
  for (std::size_t i = 0; i < mode.c.size(); ++i) {
    if (mode.c[i] != cplx(0.0)) {
      m += std::conj(mode.c[i]) * site_lowering(h, static_cast<int>(i));
    }
  }
  return m;
}

SpMat identity(int dim) {
  SpMat m(dim, dim);
  m.setIdentity();
  return m;
}

CVec vec(const CMat &m) { return Eigen::Map<const CVec>(m.data(), m.size()); }

} // namespace

Liouvillian build_liouvillian(const LatticeGeometry &geometry, const ModelParams &params, int nmax, int cap) {
  Liouvillian l;
  if (cap > 0) {
    l.blocks = assemble_heff_blocks(params, enumerate_manifolds(geometry, nmax, cap), build_link_phases(geometry));
  } else {
    l.blocks = assemble_heff(geometry, params, nmax);
  }
  l.hilbert_dim = l.blocks.total_dim();
  if (l.hilbert_dim > kMaxLindbladHilbertDim) {
    throw std::invalid_argument("Hilbert dimension " + std::to_string(l.hilbert_dim) +
                                " exceeds the exact Lindblad guard");
  }
  const int d = static_cast<int>(l.hilbert_dim);
  const SpMat eye = identity(d);

  // Hermitian part of H_eff: H_sys - Delta N + drive.
  SpMat h = to_eigen(full_hsys(l.blocks));
  for (int n = 0; n <= l.blocks.nmax(); ++n) {
    const auto off = static_cast<int>(l.blocks.offset(n));
    const auto dn = static_cast<int>(l.blocks.bases[static_cast<std::size_t>(n)].dim());
    for (int k = 0; k < dn; ++k) {
      h.coeffRef(off + k, off + k) -= params.Delta * n;
    }
  }
  const int ns = geometry.num_sites();
  SpMat lower_sum(d, d);
  std::vector<SpMat> a(static_cast<std::size_t>(ns));
  for (int i = 0; i < ns; ++i) {
    a[static_cast<std::size_t>(i)] = site_lowering(l.blocks, i);
    lower_sum += a[static_cast<std::size_t>(i)];
  }
  const SpMat lower_adj = SpMat(lower_sum.adjoint());
  h += params.kappa * params.beta * (lower_sum + lower_adj);

  // vec(A rho B) = (B^T kron A) vec(rho)
  const SpMat ht = SpMat(h.transpose());
  SpMat lv = cplx(0.0, -1.0) * (kron(eye, h) - kron(ht, eye));
  for (const auto &ai : a) {
    const SpMat adag = SpMat(ai.adjoint());
    const SpMat num = adag * ai;
    const SpMat numt = SpMat(num.transpose());
    const SpMat aconj = SpMat(ai.conjugate());
    lv += params.kappa * (2.0 * kron(aconj, ai) - kron(eye, num) - kron(numt, eye));
  }
  lv.prune(cplx(0.0));
  lv.makeCompressed();
  l.matrix = std::move(lv);
  return l;
}

CMat exact_steady_state(const Liouvillian &l) {
  const int d = static_cast<int>(l.hilbert_dim);
  const int d2 = d * d;
  // Replace the first equation (row for rho_00) by the trace condition.
  SpMat m = l.matrix;
  std::vector<Eigen::Triplet<cplx>> t;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      if (it.row() != 0) {
        t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      }
    }
  }
  for (int i = 0; i < d; ++i) {
    t.emplace_back(0, i * d + i, cplx(1.0));
  }
  SpMat a(d2, d2);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    throw std::runtime_error("steady state is not unique: bordered Liouvillian is singular");
  }
  CVec rhs = CVec::Zero(d2);
  rhs(0) = 1.0;
  const CVec x = lu.solve(rhs);
  CMat rho = Eigen::Map<const CMat>(x.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace();
  return rho;
}

double liouvillian_residual(const Liouvillian &l, const CMat &rho) { return (l.matrix * vec(rho)).norm(); }

double Gn_exact(const Liouvillian &l, const CMat &rho, const DetectionMode &mode, int n) {
  const SpMat d = mode_lowering(l.blocks, mode);
  const int dim = static_cast<int>(l.hilbert_dim);
  SpMat dn = identity(dim);
  for (int k = 0; k < n; ++k) {
    dn = SpMat(d * dn);
  }
  const CMat dnd = CMat(dn);
  return std::real((dnd.adjoint() * dnd * rho).trace());
}

std::vector<double> manifold_populations(const Liouvillian &l, const CMat &rho) {
  std::vector<double> out;
  for (int n = 0; n <= l.blocks.nmax(); ++n) {
    const auto off = static_cast<Eigen::Index>(l.blocks.offset(n));
    const auto dn = static_cast<Eigen::Index>(l.blocks.bases[static_cast<std::size_t>(n)].dim());
    out.push_back(std::real(rho.diagonal().segment(off, dn).sum()));
  }
  return out;
}

double compare_Gn(const Liouvillian &l, const CMat &rho, const MetastableState &state, const DetectionMode &mode,
                  int n) {
  const double exact = Gn_exact(l, rho, mode, n);
  if (!(std::abs(exact) > 1e-300)) {
    throw std::domain_error("exact G(n) below underflow guard");
  }
  const double meta = Gn_leading(state, l.blocks, mode, n);
  return std::abs(exact - meta) / std::abs(exact);
}

} // namespace phq
