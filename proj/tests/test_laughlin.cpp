#include <gtest/gtest.h>

#include <numbers>

#include "phq/laughlin.hpp"
#include "phq/theta.hpp"

using namespace phq;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

// Direct q-series for theta_1.
cplx theta1_series(cplx z, cplx tau) {
  const cplx q = std::exp(I * kPi * tau);
  cplx sum = 0.0;
  for (int n = 0; n < 40; ++n) {
    sum += ((n % 2 == 0) ? 1.0 : -1.0) * std::pow(q, (n + 0.5) * (n + 0.5)) * std::sin((2.0 * n + 1.0) * z);
  }
  return 2.0 * sum;
}

} // namespace

TEST(Theta, Theta1MatchesSeries) {
  for (cplx tau : {cplx(0, 1), cplx(0, 1.5), cplx(0.2, 0.8)}) {
    for (cplx z : {cplx(0.3, 0.1), cplx(-1.2, 0.4), cplx(2.0, -0.3)}) {
      const cplx ref = theta1_series(z, tau);
      EXPECT_NEAR(std::abs(std::exp(log_theta1(z, tau)) - ref), 0.0, 1e-13 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(Theta, QuasiPeriodicity) {
  const cplx tau(0.1, 1.3);
  for (auto [a, b] : {std::pair{0.0, 0.0}, {0.5, 0.0}, {0.25, 0.5}, {-0.75, 0.5}}) {
    for (cplx u : {cplx(0.17, 0.05), cplx(-0.4, 2.5), cplx(0.3, 20.0)}) {
      const cplx base = log_theta_char(a, b, u, tau);
      const cplx shift1 = log_theta_char(a, b, u + 1.0, tau) - base - 2.0 * kPi * I * a;
      const cplx shiftt = log_theta_char(a, b, u + tau, tau) - base - (-I * kPi * tau - 2.0 * kPi * I * (u + b));
      // Equal up to a multiple of 2 pi i in the imaginary part.
      EXPECT_NEAR(std::abs(std::exp(shift1) - 1.0), 0.0, 1e-11) << a << " " << b << " " << u;
      EXPECT_NEAR(std::abs(std::exp(shiftt) - 1.0), 0.0, 1e-11) << a << " " << b << " " << u;
    }
  }
}

TEST(Theta, Theta1IsOddWithZeroAtOrigin) {
  const cplx tau(0, 1);
  const cplx z(0.4, 0.2);
  EXPECT_NEAR(std::abs(std::exp(log_theta1(-z, tau)) + std::exp(log_theta1(z, tau))), 0.0, 1e-13);
  EXPECT_LT(std::abs(std::exp(log_theta1(cplx(1e-9, 0), tau))), 1e-8);
}

TEST(Laughlin, VanishesOnDoubleOccupancyAndIsNormalized) {
  const auto g = build_geometry(4, 4, 4);
  const auto basis = enumerate_manifold(g, 2, 2);
  for (int l : {0, 1}) {
    const auto st = build_laughlin(basis, l);
    EXPECT_NEAR(st.amplitudes.norm(), 1.0, 1e-14);
    for (std::size_t k = 0; k < basis.dim(); ++k) {
      const auto occ = basis.state(k);
      if (std::any_of(occ.begin(), occ.end(), [](std::uint8_t n) { return n > 1; })) {
        EXPECT_EQ(st.amplitudes(static_cast<Eigen::Index>(k)), cplx(0.0));
      }
    }
  }
}

TEST(Laughlin, PairIsOrthonormal) {
  const auto basis = enumerate_manifold(build_geometry(6, 6, 4), 2, 1);
  const CMat pair = build_laughlin_pair(basis);
  ASSERT_EQ(pair.cols(), 2);
  EXPECT_LE((pair.adjoint() * pair - CMat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_NEAR(subspace_overlap(pair, pair), 1.0, 1e-13);
}

TEST(Ed, FreeBandBottom) {
  const auto g = build_geometry(6, 6, 0);
  const auto ed = ed_ground_manifold(enumerate_manifold(g, 1, 1), build_link_phases(g), 1);
  EXPECT_NEAR(ed.values(0), -4.0, 1e-10);
}

TEST(Ed, TwoPhotonTorusDoublet) {
  const auto g = build_geometry(6, 6, 4);
  const auto ed = ed_ground_manifold(enumerate_manifold(g, 2, 1), build_link_phases(g), 3);
  const double split = ed.values(1) - ed.values(0);
  const double gap = ed.values(2) - ed.values(1);
  EXPECT_GE(gap, 5.0 * split);
}

TEST(Ed, LanczosResidual) {
  const auto g = build_geometry(6, 6, 6);
  const auto basis = enumerate_manifold(g, 3, 1);
  ASSERT_GT(basis.dim(), 1500u);
  const auto ed = ed_ground_manifold(basis, build_link_phases(g), 1);
  EXPECT_LT(ed.residuals(0), 1e-9);
}

TEST(Laughlin, ConventionSelectionMatchesEd) {
  const auto g = build_geometry(6, 6, 4);
  const auto choice = select_laughlin_convention(enumerate_manifold(g, 2, 1), build_link_phases(g));
  EXPECT_GE(choice.ed_overlap, 0.95);
  ASSERT_EQ(choice.candidate_overlaps.size(), laughlin_convention_candidates().size());
  for (double o : choice.candidate_overlaps) {
    EXPECT_LE(o, choice.ed_overlap);
  }
  EXPECT_FALSE(choice.convention.tag().empty());
}
