#pragma once

#include <vector>

#include "phq/linear_solvers.hpp"
#include "phq/operators.hpp"

namespace phq {

/// Weak-drive metastable state, one component per photon-number manifold.
/// Normalized so the vacuum amplitude psi[0](0) is exactly 1.
struct MetastableState {
  std::vector<CVec> psi;
  cplx lambda = 0.0;                   ///< eigenvalue of H_eff (O(beta^2) estimate for the chain)
  std::vector<double> solve_residuals; ///< relative residual of each manifold solve
  std::vector<int> solve_iterations;
  bool scaling_ok = true;              ///< the norm bound between successive manifolds held

  int nmax() const { return static_cast<int>(psi.size()) - 1; }
  double norm_squared() const;
  double max_solve_residual() const;
};

/// Order-by-order solution: psi_n solves
/// (H_n - n (Delta + i kappa)) psi_n = -kappa beta D^dag psi_{n-1}.
MetastableState solve_perturbative_chain(const HeffBlocks &blocks, int nmax, double rel_tol = 1e-10);

struct EigenSolveOptions {
  double tol = 1e-12;     ///< residual target relative to ||H_eff||_inf
  int krylov_dim = 24;
  int max_restarts = 40;
  /// Candidates whose |Im lambda| lies within this many kappa of the smallest
  /// one compete on vacuum overlap.
  double im_window = 0.25;
};

/// Eigenvector of the full truncated H_eff closest to the vacuum: the pair
/// with the smallest |Im lambda|, ties broken by vacuum overlap.
///
/// Shift-invert Arnoldi around i kappa / 2 with a sparse LU of H_eff,
/// followed by inverse-iteration refinement.
MetastableState solve_eigen_metastable(const HeffBlocks &blocks, const EigenSolveOptions &opts = {});

/// Reference path: dense complex eigendecomposition of H_eff with the same
/// selection rule. Only meant for small truncated spaces.
MetastableState solve_eigen_dense(const HeffBlocks &blocks);

/// Raised when two eigenvectors are equally good metastable candidates.
class AmbiguousEigenpair : public std::runtime_error {
public:
  AmbiguousEigenpair(const std::string &what, cplx first, cplx second)
      : std::runtime_error(what), first_(first), second_(second) {}
  cplx first() const { return first_; }
  cplx second() const { return second_; }

private:
  cplx first_;
  cplx second_;
};

/// ||(H_eff - lambda) Psi|| restricted to each manifold 0..nmax, plus one
/// trailing entry for the drive leaking into manifold nmax+1 (0 when that
/// manifold does not exist).
std::vector<double> residual_report(const MetastableState &state, const HeffBlocks &blocks);

/// Splits a vector over manifolds 0..nmax into components, rescaled so that
/// the vacuum amplitude is 1.
MetastableState split_vacuum_normalized(const HeffBlocks &blocks, const CVec &v, cplx lambda);

} // namespace phq
