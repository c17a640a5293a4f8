#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace phq {

using cplx = std::complex<double>;

/// Complex sparse matrix in compressed-row form.
///
/// `source` and `target` are the photon numbers of the column and row
/// manifolds (-1 when the operator spans several manifolds).
struct SparseOperator {
  int source = -1;
  int target = -1;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col;
  std::vector<cplx> val;

  std::size_t nnz() const { return val.size(); }
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  cplx value;
};

/// Builds CSR from unsorted triplets; duplicates are summed and exact zeros dropped.
SparseOperator from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets, int source = -1,
                             int target = -1);

SparseOperator adjoint(const SparseOperator &a);

/// Largest |a_ij - conj(a_ji)|.
double hermiticity_defect(const SparseOperator &a);

namespace kernels {

/// y = A x, one thread.
void spmv_serial(const SparseOperator &a, std::span<const cplx> x, std::span<cplx> y);

/// y = A x, rows split across OpenMP threads. Each row is reduced by a
/// single thread so the result is bit-identical to spmv_serial.
void spmv_omp(const SparseOperator &a, std::span<const cplx> x, std::span<cplx> y);

/// Dispatches to spmv_omp above a size threshold, spmv_serial otherwise.
void spmv(const SparseOperator &a, std::span<const cplx> x, std::span<cplx> y);

/// y += A x
void spmv_add(const SparseOperator &a, std::span<const cplx> x, std::span<cplx> y);

/// <x, y> with x conjugated.
cplx dot_serial(std::span<const cplx> x, std::span<const cplx> y);

/// Fixed-block parallel dot; block partials are combined in order, so the
/// value does not depend on the thread count.
cplx dot_omp(std::span<const cplx> x, std::span<const cplx> y);

cplx dot(std::span<const cplx> x, std::span<const cplx> y);
double norm(std::span<const cplx> x);

} // namespace kernels
} // namespace phq
