#include "phq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phq {

SparseOperator from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets, int source,
                             int target) {
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet &a, const Triplet &b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  SparseOperator out;
  out.source = source;
  out.target = target;
  out.rows = rows;
  out.cols = cols;
  out.row_ptr.assign(rows + 1, 0);
  out.col.reserve(triplets.size());
  out.val.reserve(triplets.size());
  std::size_t k = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    while (k < triplets.size() && triplets[k].row == r) {
      const std::size_t c = triplets[k].col;
      if (c >= cols) {
        throw std::out_of_range("triplet column out of range");
      }
      cplx sum = 0.0;
      while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
        sum += triplets[k].value;
        ++k;
      }
      if (sum != cplx(0.0)) {
        out.col.push_back(c);
        out.val.push_back(sum);
      }
    }
    out.row_ptr[r + 1] = out.val.size();
  }
  if (k != triplets.size()) {
    throw std::out_of_range("triplet row out of range");
  }
  return out;
}

SparseOperator adjoint(const SparseOperator &a) {
  std::vector<Triplet> t;
  t.reserve(a.nnz());
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      t.push_back({a.col[p], r, std::conj(a.val[p])});
    }
  }
  return from_triplets(a.cols, a.rows, std::move(t), a.target, a.source);
}

double hermiticity_defect(const SparseOperator &a) {
  if (a.rows != a.cols) {
    throw std::invalid_argument("hermiticity check needs a square operator");
  }
  const SparseOperator ah = adjoint(a);
  double worst = 0.0;
  // Both are sorted CSR over the same shape; merge row by row.
  for (std::size_t r = 0; r < a.rows; ++r) {
    std::size_t p = a.row_ptr[r];
    std::size_t q = ah.row_ptr[r];
    while (p < a.row_ptr[r + 1] || q < ah.row_ptr[r + 1]) {
      const std::size_t cp = p < a.row_ptr[r + 1] ? a.col[p] : a.cols;
      const std::size_t cq = q < ah.row_ptr[r + 1] ? ah.col[q] : ah.cols;
      if (cp == cq) {
        worst = std::max(worst, std::abs(a.val[p++] - ah.val[q++]));
      } else if (cp < cq) {
        worst = std::max(worst, std::abs(a.val[p++]));
      } else {
        worst = std::max(worst, std::abs(ah.val[q++]));
      }
    }
  }
  return worst;
}

namespace kernels {

namespace {

constexpr std::size_t kParallelRows = 4096;
constexpr std::size_t kDotBlock = 2048;

void check_shapes(const SparseOperator &a, std::span<const cplx> x, std::span<cplx> y) {
  if (x.size() != a.cols || y.size() != a.rows) {
    throw std::invalid_argument("spmv shape mismatch");
  }
}

} // namespace

void spmv_serial(const SparseOperator &a, std::span<const cplx> x, std::span<cplx> y) {
  check_shapes(a, x, y);
  for (std::size_t r = 0; r < a.rows; ++r) {
    cplx acc = 0.0;
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      acc += a.val[p] * x[a.col[p]];
    }
    y[r] = acc;
  }
}

void spmv_omp(const SparseOperator &a, std::span<const cplx> x, std::span<cplx> y) {
  check_shapes(a, x, y);
  const auto rows = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    cplx acc = 0.0;
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      acc += a.val[p] * x[a.col[p]];
    }
    y[r] = acc;
  }
}

void spmv(const SparseOperator &a, std::span<const cplx> x, std::span<cplx> y) {
  if (a.rows >= kParallelRows) {
    spmv_omp(a, x, y);
  } else {
    spmv_serial(a, x, y);
  }
}

void spmv_add(const SparseOperator &a, std::span<const cplx> x, std::span<cplx> y) {
  check_shapes(a, x, y);
  for (std::size_t r = 0; r < a.rows; ++r) {
    cplx acc = 0.0;
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      acc += a.val[p] * x[a.col[p]];
    }
    y[r] += acc;
  }
}

cplx dot_serial(std::span<const cplx> x, std::span<const cplx> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("dot size mismatch");
  }
  // Same blocking as dot_omp so both return identical bits.
  cplx total = 0.0;
  for (std::size_t b = 0; b < x.size(); b += kDotBlock) {
    const std::size_t e = std::min(x.size(), b + kDotBlock);
    cplx part = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      part += std::conj(x[i]) * y[i];
    }
    total += part;
  }
  return total;
}

cplx dot_omp(std::span<const cplx> x, std::span<const cplx> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("dot size mismatch");
  }
  const std::size_t blocks = (x.size() + kDotBlock - 1) / kDotBlock;
  std::vector<cplx> partial(blocks);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t s = static_cast<std::size_t>(b) * kDotBlock;
    const std::size_t e = std::min(x.size(), s + kDotBlock);
    cplx part = 0.0;
    for (std::size_t i = s; i < e; ++i) {
      part += std::conj(x[i]) * y[i];
    }
    partial[static_cast<std::size_t>(b)] = part;
  }
  cplx total = 0.0;
  for (const auto &p : partial) {
    total += p;
  }
  return total;
}

cplx dot(std::span<const cplx> x, std::span<const cplx> y) {
  return x.size() >= 4 * kDotBlock ? dot_omp(x, y) : dot_serial(x, y);
}

double norm(std::span<const cplx> x) { return std::sqrt(std::real(dot(x, x))); }

} // namespace kernels
} // namespace phq
