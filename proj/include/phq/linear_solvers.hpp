#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "phq/kernels.hpp"

namespace phq {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Raised when an iterative method stops short of its tolerance.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string &what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

using MatVec = std::function<void(std::span<const cplx>, std::span<cplx>)>;

MatVec as_matvec(const SparseOperator &a);

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves (H - shift) x = b for Hermitian H and complex shift by MINRES.
///
/// The Lanczos recurrence runs on H alone; the shift only enters the
/// tridiagonal least-squares problem, which is reduced with complex Givens
/// rotations. The true residual is checked on exit and the iteration is
/// restarted from the current iterate if it drifted.
CVec solve_shifted_hermitian(const MatVec &h, cplx shift, const CVec &b, double rel_tol, SolveStats *stats = nullptr,
                             int max_iterations = 20000);

struct EigenPairs {
  Eigen::VectorXd values;
  CMat vectors; ///< columns, unit norm
  Eigen::VectorXd residuals;
};

/// k lowest eigenpairs of a Hermitian operator by Lanczos with full
/// reorthogonalization. Each pair comes from its own run deflated against the
/// pairs already found, so exact degeneracies are resolved.
EigenPairs lanczos_lowest(const MatVec &h, std::size_t dim, int k, double tol, unsigned seed = 12345);

/// Dense reference: Hermitian eigen-decomposition of the whole operator.
EigenPairs dense_lowest(const SparseOperator &h, int k);

/// Dispatches to dense_lowest for small dimensions, lanczos_lowest otherwise.
EigenPairs lowest_eigenpairs(const SparseOperator &h, int k, double tol = 1e-10, unsigned seed = 12345);

CMat to_dense(const SparseOperator &a);

} // namespace phq
