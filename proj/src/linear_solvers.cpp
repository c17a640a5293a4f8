#include "phq/linear_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace phq {

namespace {

std::span<const cplx> cspan(const CVec &v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<cplx> mspan(CVec &v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Unitary G = [c s; -conj(s) c] with real c, chosen so G [a; b] = [r; 0].
struct Givens {
  double c = 1.0;
  cplx s = 0.0;

  static Givens zeroing(cplx a, cplx b, cplx *r) {
    const double na = std::abs(a);
    const double nb = std::abs(b);
    Givens g;
    if (nb == 0.0) {
      *r = a;
      return g;
    }
    if (na == 0.0) {
      g.c = 0.0;
      g.s = 1.0;
      *r = b;
      return g;
    }
    const double h = std::hypot(na, nb);
    const cplx phase = a / na;
    g.c = na / h;
    g.s = phase * std::conj(b) / h;
    *r = phase * h;
    return g;
  }

  void apply(cplx &a, cplx &b) const {
    const cplx ta = c * a + s * b;
    const cplx tb = -std::conj(s) * a + c * b;
    a = ta;
    b = tb;
  }
};

// One MINRES sweep from x = 0. Returns the iterate and the recurrence's residual estimate.
CVec minres_pass(const MatVec &h, cplx shift, const CVec &b, double abs_tol, int max_iterations, int *iterations,
                 double *estimate) {
  const auto n = b.size();
  CVec x = CVec::Zero(n);
  const double beta1 = b.norm();
  *iterations = 0;
  *estimate = beta1;
  if (beta1 == 0.0) {
    return x;
  }
  CVec v_prev = CVec::Zero(n);
  CVec v = b / beta1;
  CVec w_prev = CVec::Zero(n);
  CVec w_prev2 = CVec::Zero(n);
  CVec hv(n);
  Givens g_prev2;
  Givens g_prev;
  double beta = 0.0; // beta_k, couples v_{k-1} and v_k
  cplx eta = beta1;

  for (int k = 0; k < max_iterations; ++k) {
    h(cspan(v), mspan(hv));
    const double alpha = std::real(v.dot(hv));
    hv -= alpha * v + beta * v_prev;
    const double beta_next = hv.norm();

    // Column k of the shifted tridiagonal: rows k-1, k, k+1.
    cplx eps = 0.0;
    cplx delta = beta;
    g_prev2.apply(eps, delta);
    cplx gamma = alpha - shift;
    g_prev.apply(delta, gamma);
    cplx r;
    const Givens g = Givens::zeroing(gamma, cplx(beta_next), &r);

    const cplx tau = g.c * eta;
    eta = -std::conj(g.s) * eta;

    CVec w = (v - delta * w_prev - eps * w_prev2) / r;
    x += tau * w;

    w_prev2 = std::move(w_prev);
    w_prev = std::move(w);
    g_prev2 = g_prev;
    g_prev = g;
    *iterations = k + 1;
    *estimate = std::abs(eta);
    if (*estimate <= abs_tol || beta_next < 1e-300) {
      break;
    }
    v_prev = std::move(v);
    v = hv / beta_next;
    beta = beta_next;
  }
  return x;
}

} // namespace

MatVec as_matvec(const SparseOperator &a) {
  return [&a](std::span<const cplx> x, std::span<cplx> y) { kernels::spmv(a, x, y); };
}

CVec solve_shifted_hermitian(const MatVec &h, cplx shift, const CVec &b, double rel_tol, SolveStats *stats,
                             int max_iterations) {
  const double bnorm = b.norm();
  CVec x = CVec::Zero(b.size());
  SolveStats local;
  if (bnorm == 0.0) {
    if (stats) {
      *stats = local;
    }
    return x;
  }
  CVec r = b;
  CVec hx(b.size());
  double rel = 1.0;
  for (int restart = 0; restart < 8; ++restart) {
    int its = 0;
    double est = 0.0;
    // Aim a little below the target so the true residual clears it.
    x += minres_pass(h, shift, r, 0.25 * rel_tol * bnorm, max_iterations, &its, &est);
    local.iterations += its;
    h(cspan(x), mspan(hx));
    r = b - (hx - shift * x);
    rel = r.norm() / bnorm;
    if (rel <= rel_tol) {
      break;
    }
  }
  local.relative_residual = rel;
  if (stats) {
    *stats = local;
  }
  if (!(rel <= rel_tol)) {
    throw SolverError("shifted MINRES did not reach tolerance", rel);
  }
  return x;
}

CMat to_dense(const SparseOperator &a) {
  CMat m = CMat::Zero(static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(a.cols));
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a.col[p])) += a.val[p];
    }
  }
  return m;
}

EigenPairs dense_lowest(const SparseOperator &h, int k) {
  const CMat m = to_dense(h);
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  if (es.info() != Eigen::Success) {
    throw SolverError("dense Hermitian eigensolver failed", -1.0);
  }
  const auto kk = std::min<Eigen::Index>(k, m.rows());
  EigenPairs out;
  out.values = es.eigenvalues().head(kk);
  out.vectors = es.eigenvectors().leftCols(kk);
  out.residuals.resize(kk);
  for (Eigen::Index i = 0; i < kk; ++i) {
    out.residuals(i) = (m * out.vectors.col(i) - out.values(i) * out.vectors.col(i)).norm();
  }
  return out;
}

namespace {

void project_out(const CMat &q, Eigen::Index count, CVec &v) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < count; ++j) {
      v -= q.col(j) * q.col(j).dot(v);
    }
  }
}

} // namespace

EigenPairs lanczos_lowest(const MatVec &h, std::size_t dim, int k, double tol, unsigned seed) {
  const auto n = static_cast<Eigen::Index>(dim);
  const Eigen::Index want = std::min<Eigen::Index>(k, n);
  const Eigen::Index max_basis = std::min<Eigen::Index>(n, 400);
  EigenPairs out;
  out.values.resize(want);
  out.vectors.resize(n, want);
  out.residuals.resize(want);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  CVec hv(n);

  for (Eigen::Index found = 0; found < want; ++found) {
    CVec start(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      start(i) = cplx(normal(rng), normal(rng));
    }
    bool converged = false;
    double theta = 0.0;
    CVec ritz;
    double true_res = 0.0;
    for (int restart = 0; restart < 60 && !converged; ++restart) {
      project_out(out.vectors, found, start);
      CMat v(n, max_basis);
      std::vector<double> alphas;
      std::vector<double> betas;
      v.col(0) = start / start.norm();
      Eigen::Index m = 0;
      for (Eigen::Index j = 0; j < max_basis; ++j) {
        h({v.col(j).data(), dim}, {hv.data(), dim});
        project_out(out.vectors, found, hv);
        const double a = std::real(v.col(j).dot(hv));
        alphas.push_back(a);
        // Full reorthogonalization against the current Krylov basis, twice.
        for (int pass = 0; pass < 2; ++pass) {
          hv -= v.leftCols(j + 1) * (v.leftCols(j + 1).adjoint() * hv);
        }
        const double b = hv.norm();
        m = j + 1;
        const bool exhausted = b < 1e-12 || m == max_basis || m + found >= n;
        if (m % 10 == 0 || exhausted) {
          Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
          for (Eigen::Index i = 0; i < m; ++i) {
            t(i, i) = alphas[static_cast<std::size_t>(i)];
            if (i + 1 < m) {
              t(i, i + 1) = t(i + 1, i) = betas[static_cast<std::size_t>(i)];
            }
          }
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
          theta = es.eigenvalues()(0);
          const Eigen::VectorXd y = es.eigenvectors().col(0);
          const double estimate = b * std::abs(y(m - 1));
          if (estimate < 0.5 * tol || exhausted) {
            ritz = v.leftCols(m) * y.cast<cplx>();
            ritz /= ritz.norm();
            project_out(out.vectors, found, ritz);
            ritz /= ritz.norm();
            h({ritz.data(), dim}, {hv.data(), dim});
            theta = std::real(ritz.dot(hv));
            true_res = (hv - theta * ritz).norm();
            if (true_res < tol) {
              converged = true;
            }
            break;
          }
        }
        betas.push_back(b);
        v.col(j + 1) = hv / b;
      }
      if (!converged) {
        if (ritz.size() == 0) {
          Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
          for (Eigen::Index i = 0; i < m; ++i) {
            t(i, i) = alphas[static_cast<std::size_t>(i)];
            if (i + 1 < m) {
              t(i, i + 1) = t(i + 1, i) = betas[static_cast<std::size_t>(i)];
            }
          }
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
          ritz = v.leftCols(m) * es.eigenvectors().col(0).cast<cplx>();
        }
        start = ritz;
        ritz.resize(0);
      }
    }
    if (!converged) {
      throw SolverError("Lanczos did not converge", true_res);
    }
    out.values(found) = theta;
    out.vectors.col(found) = ritz;
    out.residuals(found) = true_res;
  }

  // Deflated runs return pairs in discovery order; sort ascending.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(want));
  for (Eigen::Index i = 0; i < want; ++i) {
    order[static_cast<std::size_t>(i)] = i;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&out](Eigen::Index a, Eigen::Index b) { return out.values(a) < out.values(b); });
  EigenPairs sorted;
  sorted.values.resize(want);
  sorted.vectors.resize(n, want);
  sorted.residuals.resize(want);
  for (Eigen::Index i = 0; i < want; ++i) {
    const auto src = order[static_cast<std::size_t>(i)];
    sorted.values(i) = out.values(src);
    sorted.vectors.col(i) = out.vectors.col(src);
    sorted.residuals(i) = out.residuals(src);
  }
  return sorted;
}

EigenPairs lowest_eigenpairs(const SparseOperator &h, int k, double tol, unsigned seed) {
  if (h.rows <= 1500) {
    return dense_lowest(h, k);
  }
  return lanczos_lowest(as_matvec(h), h.rows, k, tol, seed);
}

} // namespace phq
