#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "phq/lattice.hpp"

using namespace phq;

namespace {

// Occupation vectors on k sites, each <= cap, summing to n, by
// inclusion-exclusion over the sites that overflow.
long long bounded_compositions(int k, int n, int cap) {
  const auto binom = [](long long a, long long b) -> long long {
    if (b < 0 || a < b) {
      return 0;
    }
    long long r = 1;
    for (long long i = 1; i <= b; ++i) {
      r = r * (a - b + i) / i;
    }
    return r;
  };
  long long total = 0;
  for (int j = 0; j <= k; ++j) {
    const long long rest = n - static_cast<long long>(j) * (cap + 1);
    if (rest < 0) {
      break;
    }
    const long long term = binom(k, j) * binom(rest + k - 1, k - 1);
    total += (j % 2 == 0) ? term : -term;
  }
  return total;
}

} // namespace

TEST(Geometry, ReducedFlux) {
  const auto g = build_geometry(6, 6, 4);
  EXPECT_EQ(g.alpha_num(), 1);
  EXPECT_EQ(g.alpha_den(), 9);
  EXPECT_EQ(build_geometry(6, 6, 0).alpha(), 0.0);
  const auto h = build_geometry(4, 4, 2);
  EXPECT_EQ(h.alpha_num(), 1);
  EXPECT_EQ(h.alpha_den(), 8);
}

TEST(Geometry, RejectsBadInput) {
  EXPECT_THROW(build_geometry(0, 3, 1), std::invalid_argument);
  EXPECT_THROW(build_geometry(3, 3, -1), std::invalid_argument);
}

TEST(Basis, Dimensions) {
  const auto g = build_geometry(6, 6, 4);
  EXPECT_EQ(enumerate_manifold(g, 0, 1).dim(), 1u);
  EXPECT_EQ(enumerate_manifold(g, 0, 3).dim(), 1u);
  EXPECT_EQ(enumerate_manifold(g, 2, 1).dim(), 630u);
  EXPECT_EQ(enumerate_manifold(g, 2, 3).dim(), 666u);
}

TEST(Basis, DimensionMatchesInclusionExclusion) {
  for (int nx : {1, 2, 3, 4}) {
    for (int ny : {1, 2, 3, 4}) {
      const auto g = build_geometry(nx, ny, 0);
      for (int cap = 1; cap <= 3; ++cap) {
        for (int n = 0; n <= std::min(3, cap * nx * ny); ++n) {
          EXPECT_EQ(static_cast<long long>(enumerate_manifold(g, n, cap).dim()),
                    bounded_compositions(nx * ny, n, cap))
              << nx << "x" << ny << " n=" << n << " cap=" << cap;
        }
      }
    }
  }
}

TEST(Basis, DeclaredOrder) {
  const auto b = enumerate_manifold(build_geometry(2, 1, 0), 1, 1);
  ASSERT_EQ(b.dim(), 2u);
  EXPECT_EQ(b.rank(Occupation{1, 0}), 0u);
  EXPECT_EQ(b.rank(Occupation{0, 1}), 1u);

  const auto c = enumerate_manifold(build_geometry(3, 3, 0), 2, 3);
  const Occupation first = c.unrank(0);
  EXPECT_EQ(first[0], 2);
  EXPECT_EQ(std::accumulate(first.begin() + 1, first.end(), 0), 0);
}

TEST(Basis, StatesStrictlyIncreaseInDeclaredOrder) {
  const auto b = enumerate_manifold(build_geometry(3, 2, 0), 3, 2);
  // Last site most significant.
  const auto key = [&](std::size_t k) {
    auto s = b.state(k);
    return std::vector<int>(s.rbegin(), s.rend());
  };
  for (std::size_t k = 1; k < b.dim(); ++k) {
    EXPECT_LT(key(k - 1), key(k));
  }
}

TEST(Basis, RankRoundTrip) {
  for (int ns = 1; ns <= 16; ++ns) {
    const auto g = build_geometry(ns, 1, 0);
    for (int cap = 1; cap <= 3; ++cap) {
      for (int n = 0; n <= std::min(3, cap * ns); ++n) {
        const auto b = enumerate_manifold(g, n, cap);
        for (std::size_t k = 0; k < b.dim(); ++k) {
          const Occupation occ = b.unrank(k);
          ASSERT_EQ(b.rank(occ), k);
          ASSERT_EQ(b.rank_unchecked(occ), k);
          ASSERT_TRUE(std::equal(occ.begin(), occ.end(), b.state(k).begin()));
        }
      }
    }
  }
}

TEST(Basis, RejectsForeignOccupations) {
  const auto b = enumerate_manifold(build_geometry(3, 1, 0), 2, 1);
  EXPECT_THROW(b.rank(Occupation{2, 0, 0}), std::invalid_argument);
  EXPECT_THROW(b.rank(Occupation{1, 0, 0}), std::invalid_argument);
  EXPECT_THROW(b.rank(Occupation{1, 1}), std::invalid_argument);
  EXPECT_THROW(b.unrank(b.dim()), std::out_of_range);
  EXPECT_THROW(enumerate_manifold(build_geometry(2, 1, 0), 3, 1), std::invalid_argument);
}
