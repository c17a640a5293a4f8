#include "phq/lattice.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace phq {

LatticeGeometry::LatticeGeometry(int nx, int ny, int nphi) : nx_(nx), ny_(ny), nphi_(nphi) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("lattice dimensions must be >= 1");
  }
  if (nphi < 0) {
    throw std::invalid_argument("total flux must be non-negative");
  }
  const long sites = static_cast<long>(nx) * ny;
  const long g = std::gcd(static_cast<long>(nphi), sites);
  alpha_num_ = nphi / g;
  alpha_den_ = sites / g;
}

LatticeGeometry build_geometry(int nx, int ny, int nphi) { return LatticeGeometry(nx, ny, nphi); }

ManifoldBasis::ManifoldBasis(const LatticeGeometry &geometry, int n, int cap)
    : geometry_(geometry), n_(n), cap_(cap), sites_(geometry.num_sites()) {
  if (n < 0) {
    throw std::invalid_argument("photon number must be non-negative");
  }
  if (cap < 1) {
    throw std::invalid_argument("per-site cap must be >= 1");
  }
  if (static_cast<long>(n) > static_cast<long>(cap) * sites_) {
    throw std::invalid_argument("empty manifold: n=" + std::to_string(n) + " exceeds cap*sites");
  }
  const std::size_t width = static_cast<std::size_t>(n_) + 1;
  ways_.assign((static_cast<std::size_t>(sites_) + 1) * width, 0);
  ways_[0] = 1;
  for (int k = 1; k <= sites_; ++k) {
    for (int m = 0; m <= n_; ++m) {
      std::size_t total = 0;
      for (int v = 0; v <= std::min(cap_, m); ++v) {
        total += ways_[static_cast<std::size_t>(k - 1) * width + (m - v)];
      }
      ways_[static_cast<std::size_t>(k) * width + m] = total;
    }
  }
  dim_ = count(sites_, n_);

  occ_.resize(dim_ * static_cast<std::size_t>(sites_));
  for (std::size_t k = 0; k < dim_; ++k) {
    Occupation s = unrank(k);
    std::copy(s.begin(), s.end(), occ_.begin() + static_cast<std::ptrdiff_t>(k * sites_));
  }
}

std::size_t ManifoldBasis::rank_unchecked(std::span<const std::uint8_t> occ) const {
  std::size_t r = 0;
  int remaining = n_;
  for (int i = sites_ - 1; i >= 0; --i) {
    const int v = occ[static_cast<std::size_t>(i)];
    for (int u = 0; u < v; ++u) {
      r += count(i, remaining - u);
    }
    remaining -= v;
  }
  return r;
}

std::size_t ManifoldBasis::rank(std::span<const std::uint8_t> occ) const {
  if (occ.size() != static_cast<std::size_t>(sites_)) {
    throw std::invalid_argument("occupation vector has wrong length");
  }
  int total = 0;
  for (auto v : occ) {
    if (v > cap_) {
      throw std::invalid_argument("occupation exceeds per-site cap");
    }
    total += v;
  }
  if (total != n_) {
    throw std::invalid_argument("occupation does not belong to this manifold");
  }
  return rank_unchecked(occ);
}

Occupation ManifoldBasis::unrank(std::size_t k) const {
  if (k >= dim_) {
    throw std::out_of_range("basis index out of range");
  }
  Occupation s(static_cast<std::size_t>(sites_), 0);
  int remaining = n_;
  for (int i = sites_ - 1; i >= 0; --i) {
    int v = 0;
    // Smallest value at site i whose block still contains k.
    while (true) {
      const std::size_t block = count(i, remaining - v);
      if (k < block) {
        break;
      }
      k -= block;
      ++v;
    }
    s[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
    remaining -= v;
  }
  return s;
}

ManifoldBasis enumerate_manifold(const LatticeGeometry &geometry, int n, int cap) {
  return ManifoldBasis(geometry, n, cap);
}

std::vector<ManifoldBasis> enumerate_manifolds(const LatticeGeometry &geometry, int nmax, int cap) {
  if (nmax < 0) {
    throw std::invalid_argument("nmax must be non-negative");
  }
  std::vector<ManifoldBasis> out;
  out.reserve(static_cast<std::size_t>(nmax) + 1);
  for (int n = 0; n <= nmax; ++n) {
    out.emplace_back(geometry, n, cap);
  }
  return out;
}

} // namespace phq
