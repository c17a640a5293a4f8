#include <gtest/gtest.h>

#include "phq/protocol.hpp"

using namespace phq;

namespace {

EigenPairs lowest(const ProtocolSchedule &s, const ProtocolControls &c, int k) {
  const auto basis = enumerate_manifold(build_geometry(s.nx, s.ny, 0), s.photons(), 1);
  return lowest_eigenpairs(build_protocol_hamiltonian(basis, s, c), k);
}

} // namespace

TEST(Schedule, ControlsFollowStageRamps) {
  const ProtocolSchedule s;
  auto c = controls_at(s, ProtocolStage::Pin, 0.5);
  EXPECT_DOUBLE_EQ(c.v_sl, 10.0);
  EXPECT_EQ(c.v_pert, 0.0);
  EXPECT_EQ(c.alpha, 0.0);
  c = controls_at(s, ProtocolStage::Impurity, 1.0);
  EXPECT_DOUBLE_EQ(c.v_sl, 20.0);
  EXPECT_DOUBLE_EQ(c.v_pert, 1.0);
  c = controls_at(s, ProtocolStage::Flux, 0.5);
  EXPECT_DOUBLE_EQ(c.alpha, 0.125);
  c = controls_at(s, ProtocolStage::Melt, 0.25);
  EXPECT_DOUBLE_EQ(c.v_sl, 15.0);
  EXPECT_DOUBLE_EQ(c.alpha, 0.25);
  c = controls_at(s, ProtocolStage::Release, 1.0);
  EXPECT_EQ(c.v_sl, 0.0);
  EXPECT_EQ(c.v_pert, 0.0);
  EXPECT_DOUBLE_EQ(c.alpha, 0.25);

  const auto grid = protocol_grid(s);
  ASSERT_EQ(grid.size(), 5u * 64u);
  EXPECT_EQ(grid.front().stage, ProtocolStage::Pin);
  EXPECT_EQ(grid.back().stage, ProtocolStage::Release);
  EXPECT_EQ(s.final_nphi(), 4);
}

TEST(Schedule, PinningSublattice) {
  ProtocolSchedule s;
  EXPECT_EQ(s.pinning_sites(), (std::vector<int>{0, 2}));
  s.pin_ny = 2;
  EXPECT_EQ(s.pinning_sites(), (std::vector<int>{0, 2, 8, 10}));
  s.pin_nx = 5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Hamiltonian, DeepPinningGivesMottProductState) {
  ProtocolSchedule s;
  s.v_sl = 40.0;
  s.impurity_on = false;
  const auto c = controls_at(s, ProtocolStage::Pin, 1.0);
  const auto basis = enumerate_manifold(build_geometry(4, 4, 0), 2, 1);
  const auto ed = lowest_eigenpairs(build_protocol_hamiltonian(basis, s, c), 1);
  Occupation pinned(16, 0);
  for (int i : s.pinning_sites()) {
    pinned[static_cast<std::size_t>(i)] = 1;
  }
  const cplx amp = ed.vectors(static_cast<Eigen::Index>(basis.rank(pinned)), 0);
  EXPECT_GE(std::norm(amp), 0.99);
}

TEST(Hamiltonian, SinglePhotonWithoutPotentials) {
  ProtocolSchedule s;
  s.pin_nx = 1;
  s.pin_ny = 1;
  ProtocolControls c;
  EXPECT_NEAR(lowest(s, c, 1).values(0), -4.0, 1e-10);
}

TEST(Hamiltonian, ImpuritySplitsTheTorusDoublet) {
  ProtocolSchedule on;
  ProtocolSchedule off = on;
  off.impurity_on = false;
  const auto end_on = lowest(on, controls_at(on, ProtocolStage::Melt, 1.0), 2);
  const auto end_off = lowest(off, controls_at(off, ProtocolStage::Melt, 1.0), 2);
  const double gap_on = end_on.values(1) - end_on.values(0);
  const double gap_off = end_off.values(1) - end_off.values(0);
  EXPECT_GT(gap_on, 1e-3);
  EXPECT_GT(gap_on, 100.0 * gap_off);
}

TEST(Tracking, SinglePointMatchesDirectSolve) {
  const ProtocolSchedule s;
  const auto c = controls_at(s, ProtocolStage::Flux, 0.7);
  const auto res = track_spectrum(s, {c});
  ASSERT_EQ(res.records.size(), 1u);
  const auto ed = lowest(s, c, 2);
  EXPECT_NEAR(res.records[0].e0, ed.values(0), 1e-10);
  EXPECT_NEAR(res.records[0].e1, ed.values(1), 1e-10);
  EXPECT_NEAR(res.records[0].gap, ed.values(1) - ed.values(0), 1e-10);
}

TEST(Tracking, CoarseScheduleEndsInLaughlinPair) {
  ProtocolSchedule s;
  s.points_per_stage = 16;
  const auto res = track_spectrum(s);
  ASSERT_EQ(res.records.size(), 80u);
  EXPECT_EQ(res.flagged(), 0u);
  EXPECT_GT(res.records.back().overlap0, 0.9);
  EXPECT_GT(res.min_gap(ProtocolStage::Flux, ProtocolStage::Melt), 0.0);
  for (const auto &r : res.records) {
    EXPECT_LT(r.residual, 1e-9);
  }
}
