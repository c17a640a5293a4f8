#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace phq {

/// Square lattice on a torus with uniform magnetic flux.
///
/// The flux per plaquette is kept as the exact rational Nphi / (Nx * Ny) so
/// that link phases are 2*pi times a ratio of integers.
class LatticeGeometry {
public:
  LatticeGeometry(int nx, int ny, int nphi);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nphi() const { return nphi_; }
  int num_sites() const { return nx_ * ny_; }

  /// Reduced numerator/denominator of alpha.
  long alpha_num() const { return alpha_num_; }
  long alpha_den() const { return alpha_den_; }
  double alpha() const { return static_cast<double>(alpha_num_) / static_cast<double>(alpha_den_); }

  int site(int x, int y) const { return x + nx_ * y; }
  int site_x(int i) const { return i % nx_; }
  int site_y(int i) const { return i / nx_; }

  bool operator==(const LatticeGeometry &other) const = default;

private:
  int nx_;
  int ny_;
  int nphi_;
  long alpha_num_;
  long alpha_den_;
};

LatticeGeometry build_geometry(int nx, int ny, int nphi);

/// Occupation numbers of one Fock state, one entry per site.
using Occupation = std::vector<std::uint8_t>;

/// Fixed-photon-number block of the truncated Fock space.
///
/// States are ordered lexicographically with the last site as the most
/// significant digit, so rank 0 is (n, 0, ..., 0) when cap >= n and the
/// single-photon states come out in site order.
class ManifoldBasis {
public:
  ManifoldBasis(const LatticeGeometry &geometry, int n, int cap);

  const LatticeGeometry &geometry() const { return geometry_; }
  int photons() const { return n_; }
  int cap() const { return cap_; }
  int num_sites() const { return sites_; }
  std::size_t dim() const { return dim_; }

  /// Occupations of state k, a view into the flat table.
  std::span<const std::uint8_t> state(std::size_t k) const {
    return {occ_.data() + k * static_cast<std::size_t>(sites_), static_cast<std::size_t>(sites_)};
  }

  std::size_t rank(std::span<const std::uint8_t> occ) const;
  Occupation unrank(std::size_t k) const;

  /// Like rank() but skips validation; occ must belong to this manifold.
  std::size_t rank_unchecked(std::span<const std::uint8_t> occ) const;

private:
  // Number of occupation vectors on `k` sites holding `m` photons.
  std::size_t count(int k, int m) const { return ways_[static_cast<std::size_t>(k) * (n_ + 1) + m]; }

  LatticeGeometry geometry_;
  int n_;
  int cap_;
  int sites_;
  std::size_t dim_ = 0;
  std::vector<std::size_t> ways_;
  std::vector<std::uint8_t> occ_;
};

ManifoldBasis enumerate_manifold(const LatticeGeometry &geometry, int n, int cap);

/// Bases for manifolds 0..nmax sharing one per-site cap.
std::vector<ManifoldBasis> enumerate_manifolds(const LatticeGeometry &geometry, int nmax, int cap);

} // namespace phq
