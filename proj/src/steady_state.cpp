#include "phq/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace phq {

namespace {

std::span<const cplx> cspan(const CVec &v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<cplx> mspan(CVec &v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

CVec apply_op(const SparseOperator &a, const CVec &x) {
  CVec y(static_cast<Eigen::Index>(a.rows));
  kernels::spmv(a, cspan(x), mspan(y));
  return y;
}

Eigen::SparseMatrix<cplx> to_eigen(const SparseOperator &a) {
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(a.nnz());
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      t.emplace_back(static_cast<int>(r), static_cast<int>(a.col[p]), a.val[p]);
    }
  }
  Eigen::SparseMatrix<cplx> m(static_cast<int>(a.rows), static_cast<int>(a.cols));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

double inf_norm(const SparseOperator &a) {
  double best = 0.0;
  for (std::size_t r = 0; r < a.rows; ++r) {
    double s = 0.0;
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      s += std::abs(a.val[p]);
    }
    best = std::max(best, s);
  }
  return best;
}

struct Candidate {
  cplx lambda;
  CVec vec; // unit norm
  double residual;
};

// Selection rule shared by the sparse and dense paths.
std::size_t select_metastable(const std::vector<Candidate> &cands, double kappa, double im_window,
                              bool strict) {
  double best_im = INFINITY;
  for (const auto &c : cands) {
    best_im = std::min(best_im, std::abs(c.lambda.imag()));
  }
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (std::abs(cands[i].lambda.imag()) <= best_im + im_window * kappa) {
      pool.push_back(i);
    }
  }
  std::sort(pool.begin(), pool.end(), [&cands](std::size_t a, std::size_t b) {
    return std::abs(cands[a].vec(0)) > std::abs(cands[b].vec(0));
  });
  if (strict && pool.size() > 1) {
    const double v0 = std::abs(cands[pool[0]].vec(0));
    const double v1 = std::abs(cands[pool[1]].vec(0));
    if (v1 > 0.5 * v0 && std::abs(cands[pool[0]].lambda - cands[pool[1]].lambda) > 1e-10) {
      throw AmbiguousEigenpair("two eigenvectors compete for the metastable state", cands[pool[0]].lambda,
                               cands[pool[1]].lambda);
    }
  }
  return pool.front();
}

} // namespace

double MetastableState::norm_squared() const {
  double s = 0.0;
  for (const auto &p : psi) {
    s += p.squaredNorm();
  }
  return s;
}

double MetastableState::max_solve_residual() const {
  double m = 0.0;
  for (double r : solve_residuals) {
    m = std::max(m, r);
  }
  return m;
}

MetastableState solve_perturbative_chain(const HeffBlocks &blocks, int nmax, double rel_tol) {
  if (nmax < 0 || nmax > blocks.nmax()) {
    throw std::invalid_argument("nmax " + std::to_string(nmax) + " exceeds the assembled manifolds");
  }
  const ModelParams &p = blocks.params;
  MetastableState st;
  st.psi.push_back(CVec::Ones(1));
  st.solve_residuals.push_back(0.0);
  st.solve_iterations.push_back(0);
  for (int n = 1; n <= nmax; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const CVec drive = apply_op(blocks.raise[un - 1], st.psi[un - 1]);
    const CVec rhs = -drive;
    SolveStats stats;
    const cplx shift = double(n) * cplx(p.Delta, p.kappa);
    CVec psi_n = solve_shifted_hermitian(as_matvec(blocks.sys[un]), shift, rhs, rel_tol, &stats);
    // Smallest singular value of the shifted block is at least n kappa.
    if (psi_n.norm() > (1.0 + 1e-6) * drive.norm() / (double(n) * p.kappa)) {
      st.scaling_ok = false;
    }
    st.psi.push_back(std::move(psi_n));
    st.solve_residuals.push_back(stats.relative_residual);
    st.solve_iterations.push_back(stats.iterations);
  }
  if (nmax >= 1) {
    st.lambda = apply_op(blocks.lower[0], st.psi[1])(0);
  }
  return st;
}

MetastableState split_vacuum_normalized(const HeffBlocks &blocks, const CVec &v, cplx lambda) {
  if (v(0) == cplx(0.0)) {
    throw SolverError("eigenvector has no vacuum component", 0.0);
  }
  MetastableState st;
  st.lambda = lambda;
  const cplx scale = 1.0 / v(0);
  for (int n = 0; n <= blocks.nmax(); ++n) {
    const auto off = static_cast<Eigen::Index>(blocks.offset(n));
    const auto d = static_cast<Eigen::Index>(blocks.bases[static_cast<std::size_t>(n)].dim());
    st.psi.push_back(v.segment(off, d) * scale);
  }
  st.psi[0](0) = 1.0;
  st.solve_residuals.assign(st.psi.size(), 0.0);
  st.solve_iterations.assign(st.psi.size(), 0);
  return st;
}

MetastableState solve_eigen_metastable(const HeffBlocks &blocks, const EigenSolveOptions &opts) {
  const SparseOperator h = full_heff(blocks);
  const auto dim = static_cast<Eigen::Index>(h.rows);
  const double hnorm = std::max(inf_norm(h), 1.0);
  const double kappa = blocks.params.kappa;
  const cplx sigma(0.0, 0.5 * kappa);

  Eigen::SparseMatrix<cplx> shifted = to_eigen(h);
  for (Eigen::Index i = 0; i < dim; ++i) {
    shifted.coeffRef(i, i) -= sigma;
  }
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) {
    throw SolverError("sparse LU of shifted H_eff failed", -1.0);
  }

  const Eigen::Index m = std::min<Eigen::Index>(opts.krylov_dim, dim);
  CVec start = CVec::Ones(dim) / std::sqrt(double(dim));
  CVec hv(dim);
  Candidate chosen;
  bool have = false;

  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    CMat v = CMat::Zero(dim, m + 1);
    CMat hess = CMat::Zero(m + 1, m);
    v.col(0) = start / start.norm();
    Eigen::Index built = m;
    for (Eigen::Index j = 0; j < m; ++j) {
      CVec w = lu.solve(v.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        const CVec c = v.leftCols(j + 1).adjoint() * w;
        hess.col(j).head(j + 1) += c;
        w -= v.leftCols(j + 1) * c;
      }
      const double b = w.norm();
      hess(j + 1, j) = b;
      if (b < 1e-14) {
        built = j + 1;
        break;
      }
      v.col(j + 1) = w / b;
    }
    Eigen::ComplexEigenSolver<CMat> es(hess.topLeftCorner(built, built));
    if (es.info() != Eigen::Success) {
      throw SolverError("Arnoldi Hessenberg eigensolve failed", -1.0);
    }
    std::vector<Candidate> cands;
    for (Eigen::Index i = 0; i < built; ++i) {
      const cplx theta = es.eigenvalues()(i);
      if (std::abs(theta) < 1e-300) {
        continue;
      }
      CVec y = v.leftCols(built) * es.eigenvectors().col(i);
      y /= y.norm();
      kernels::spmv(h, cspan(y), mspan(hv));
      const cplx lam = y.dot(hv);
      cands.push_back({lam, y, (hv - lam * y).norm()});
    }
    // Only pairs resolved well enough to rank take part in the selection.
    std::vector<Candidate> resolved;
    for (const auto &c : cands) {
      if (c.residual < 1e-3 * hnorm) {
        resolved.push_back(c);
      }
    }
    const auto &pool = resolved.empty() ? cands : resolved;
    const std::size_t pick = select_metastable(pool, kappa, opts.im_window, false);
    chosen = pool[pick];
    have = true;
    if (chosen.residual <= opts.tol * hnorm) {
      break;
    }
    start = chosen.vec;
  }
  if (!have) {
    throw SolverError("Arnoldi produced no candidates", -1.0);
  }

  // Inverse-iteration polish: drives the small high-manifold components to
  // full relative accuracy.
  CVec y = chosen.vec;
  cplx lam = chosen.lambda;
  double res = chosen.residual;
  for (int it = 0; it < 200; ++it) {
    CVec next = lu.solve(y);
    next /= next.norm();
    if (std::abs(next(0)) > 0.0) {
      next *= std::abs(next(0)) / next(0);
    }
    const double change = (next - y).norm();
    y = next;
    kernels::spmv(h, cspan(y), mspan(hv));
    lam = y.dot(hv);
    res = (hv - lam * y).norm();
    if (change < 1e-15 * 4 && it > 3) {
      break;
    }
  }
  if (!(res <= opts.tol * hnorm)) {
    throw SolverError("metastable eigenpair residual above tolerance", res / hnorm);
  }
  MetastableState st = split_vacuum_normalized(blocks, y, lam);
  st.solve_residuals.assign(st.psi.size(), res / hnorm);
  return st;
}

MetastableState solve_eigen_dense(const HeffBlocks &blocks) {
  const CMat h = to_dense(full_heff(blocks));
  Eigen::ComplexEigenSolver<CMat> es(h);
  if (es.info() != Eigen::Success) {
    throw SolverError("dense complex eigensolver failed", -1.0);
  }
  std::vector<Candidate> cands;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    CVec y = es.eigenvectors().col(i);
    y /= y.norm();
    const cplx lam = es.eigenvalues()(i);
    cands.push_back({lam, y, (h * y - lam * y).norm()});
  }
  const std::size_t pick = select_metastable(cands, blocks.params.kappa, 0.25, true);
  MetastableState st = split_vacuum_normalized(blocks, cands[pick].vec, cands[pick].lambda);
  st.solve_residuals.assign(st.psi.size(), cands[pick].residual);
  return st;
}

std::vector<double> residual_report(const MetastableState &state, const HeffBlocks &blocks) {
  const int nmax = std::min(state.nmax(), blocks.nmax());
  std::vector<double> out;
  for (int n = 0; n <= nmax; ++n) {
    const auto un = static_cast<std::size_t>(n);
    CVec r = apply_op(blocks.diag[un], state.psi[un]) - state.lambda * state.psi[un];
    if (n > 0) {
      r += apply_op(blocks.raise[un - 1], state.psi[un - 1]);
    }
    if (n < nmax) {
      r += apply_op(blocks.lower[un], state.psi[un + 1]);
    }
    out.push_back(r.norm());
  }
  // Drive out of the top manifold, which the truncation discards.
  const auto &top = blocks.bases[static_cast<std::size_t>(nmax)];
  const long capacity = static_cast<long>(top.cap()) * top.num_sites();
  if (nmax + 1 <= capacity) {
    const ManifoldBasis next(top.geometry(), nmax + 1, top.cap());
    const std::vector<cplx> ones(static_cast<std::size_t>(top.num_sites()), cplx(1.0));
    const SparseOperator up = build_raising(top, next, ones);
    out.push_back(blocks.params.kappa * blocks.params.beta * apply_op(up, state.psi[static_cast<std::size_t>(nmax)]).norm());
  } else {
    out.push_back(0.0);
  }
  return out;
}

} // namespace phq
