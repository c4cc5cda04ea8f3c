#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "fixtures.hpp"
#include "mcbf/errors.hpp"
#include "mcbf/network.hpp"
#include "oracles.hpp"

namespace mcbf {
namespace {

TEST(Topology, RoundRobinLayout) {
  TopologyConfig c;
  c.B = 2;
  c.G = 4;
  c.U = 8;
  c.A = 12;
  const Topology t = BuildTopology(c);
  for (int b = 0; b < 2; ++b) EXPECT_EQ(t.groups_of_bs(b).size(), 2u);
  for (int g = 0; g < 4; ++g) EXPECT_EQ(t.users_of_group(g).size(), 2u);
  EXPECT_EQ(t.group_of_user[5], 1);
  EXPECT_EQ(t.bs_of_group[3], 1);
  EXPECT_EQ(t.bs_of_user(6), 0);
  EXPECT_EQ(t.out_of_cell_users(0), (std::vector<int>{1, 3, 5, 7}));
}

TEST(Topology, TrivialSingleCell) {
  TopologyConfig c;
  c.A = 2;
  const Topology t = BuildTopology(c);
  EXPECT_EQ(t.B, 1);
  EXPECT_EQ(t.users_of_bs(0), (std::vector<int>{0}));
  EXPECT_TRUE(t.out_of_cell_users(0).empty());
}

TEST(Topology, RejectsUnevenSplits) {
  TopologyConfig c;
  c.B = 2;
  c.G = 3;
  c.U = 6;
  EXPECT_THROW(BuildTopology(c), ConfigError);
  c.G = 4;
  c.U = 6;
  EXPECT_THROW(BuildTopology(c), ConfigError);
  c.U = 8;
  c.d = 0.5;
  EXPECT_THROW(BuildTopology(c), ConfigError);
  c.d = 1.0;
  c.gamma = 0.0;
  EXPECT_THROW(BuildTopology(c), ConfigError);
}

TEST(Topology, GroupsCoverUsersOnce) {
  const auto in = fixtures::Make(3, 6, 18, 4, 0.0, 0.0, 1);
  std::vector<int> seen(18, 0);
  for (int g = 0; g < 6; ++g) {
    for (int u : in.topology.users_of_group(g)) ++seen[u];
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(Channels, DeterministicInSeed) {
  const auto a = fixtures::Make(2, 2, 4, 3, 0.0, 1.0, 42);
  const auto b = fixtures::Make(2, 2, 4, 3, 0.0, 1.0, 42);
  const auto c = fixtures::Make(2, 2, 4, 3, 0.0, 1.0, 43);
  bool differs = false;
  for (int j = 0; j < 2; ++j) {
    for (int u = 0; u < 4; ++u) {
      EXPECT_EQ(a.channels.h(j, u), b.channels.h(j, u));
      differs = differs || a.channels.h(j, u) != c.channels.h(j, u);
    }
  }
  EXPECT_TRUE(differs);
}

TEST(Channels, CrossCellScaling) {
  // Same seed, different separation: cross-cell vectors shrink by sqrt(1/d),
  // serving vectors are untouched.
  const auto near = fixtures::Make(2, 2, 4, 3, 0.0, 0.0, 7);
  const auto far = fixtures::Make(2, 2, 4, 3, 0.0, 20.0, 7);
  for (int j = 0; j < 2; ++j) {
    for (int u = 0; u < 4; ++u) {
      if (near.topology.bs_of_user(u) == j) {
        EXPECT_EQ(near.channels.h(j, u), far.channels.h(j, u));
      } else {
        EXPECT_NEAR((far.channels.h(j, u) - near.channels.h(j, u) * std::sqrt(0.01)).norm(), 0.0, 1e-14);
      }
    }
  }
}

TEST(Channels, OuterProductsAreRankOne) {
  const auto in = fixtures::Make(2, 2, 4, 4, 0.0, 1.0, 3);
  for (int j = 0; j < 2; ++j) {
    for (int u = 0; u < 4; ++u) {
      const auto& H = in.channels.H(j, u);
      EXPECT_NEAR((H - H.adjoint()).norm(), 0.0, 1e-14);
      EXPECT_NEAR(H.trace().real(), in.channels.h(j, u).squaredNorm(), 1e-12);
      const auto ev = oracle::HermitianEigenvalues(H);
      EXPECT_NEAR(ev.back(), in.channels.h(j, u).squaredNorm(), 1e-9);
      EXPECT_NEAR(ev[ev.size() - 2], 0.0, 1e-9);
    }
  }
}

TEST(Channels, UnitPowerPerCoefficient) {
  TopologyConfig c;
  c.A = 100;
  c.U = 100;
  c.G = 1;
  const Topology t = BuildTopology(c);
  const ChannelSet ch = SampleChannels(t, 9);
  double total = 0.0;
  for (int u = 0; u < 100; ++u) total += ch.h(0, u).squaredNorm();
  EXPECT_NEAR(total / 1e4, 1.0, 0.05);
}

TEST(Channels, EdgeUsersLookLikeServedUsers) {
  // With d = 1 cross-cell coefficients have the same power as in-cell ones.
  const auto in = fixtures::Make(2, 2, 200, 50, 0.0, 0.0, 5);
  double served = 0.0;
  double cross = 0.0;
  for (int u = 0; u < 200; ++u) {
    const int b = in.topology.bs_of_user(u);
    served += in.channels.h(b, u).squaredNorm();
    cross += in.channels.h(1 - b, u).squaredNorm();
  }
  EXPECT_NEAR(cross / served, 1.0, 0.05);
}

BeamformingSolution WithBeams(std::vector<CVector> w) {
  BeamformingSolution s;
  s.p.clear();
  for (const auto& v : w) s.p.push_back(v.squaredNorm());
  s.w = std::move(w);
  return s;
}

TEST(Sinr, SingleGroupNoInterference) {
  TopologyConfig c;
  c.A = 2;
  const Topology t = BuildTopology(c);
  CVector h(2);
  h << 2.0, 0.0;
  const ChannelSet ch({{h}});
  CVector w(2);
  w << 1.0, 0.0;
  EXPECT_DOUBLE_EQ(EvaluateSinr(ch, t, WithBeams({w}), 0), 4.0);
}

TEST(Sinr, OrthogonalInterfererIsHarmless) {
  TopologyConfig c;
  c.A = 2;
  c.G = 2;
  c.U = 2;
  const Topology t = BuildTopology(c);
  CVector h0(2), h1(2), w0(2), w1(2);
  h0 << 2.0, 0.0;
  h1 << 0.0, 1.0;
  w0 << 1.0, 0.0;
  w1 << 0.0, 3.0;
  const ChannelSet ch({{h0, h1}});
  EXPECT_DOUBLE_EQ(EvaluateSinr(ch, t, WithBeams({w0, w1}), 0), 4.0);
  EXPECT_DOUBLE_EQ(EvaluateSinr(ch, t, WithBeams({w0, w1}), 1), 9.0);
}

TEST(Sinr, MatchesScalarOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto in = fixtures::Make(2, 4, 8, 3, 0.0, 1.0, seed);
    Rng rng(seed + 100);
    std::vector<CVector> w;
    for (int g = 0; g < 4; ++g) w.push_back(ComplexNormal(3, rng));
    const auto s = WithBeams(w);
    const auto h = fixtures::RawChannels(in);
    for (int u = 0; u < 8; ++u) {
      const double expected =
          oracle::Sinr(h, w, in.topology.group_of_user, in.topology.bs_of_group, u, in.topology.sigma2[u]);
      EXPECT_NEAR(EvaluateSinr(in.channels, in.topology, s, u), expected, 1e-12 * (1 + expected));
    }
  }
}

TEST(Sinr, PhaseInvariantAndIncreasingInChannelScale) {
  const auto in = fixtures::Make(2, 2, 4, 3, 0.0, 1.0, 11);
  Rng rng(1);
  std::vector<CVector> w = {ComplexNormal(3, rng), ComplexNormal(3, rng)};
  auto rotated = w;
  rotated[1] *= std::polar(1.0, 0.7);
  const double a = EvaluateSinr(in.channels, in.topology, WithBeams(w), 0);
  EXPECT_NEAR(EvaluateSinr(in.channels, in.topology, WithBeams(rotated), 0), a, 1e-12);
  std::vector<std::vector<CVector>> scaled(2);
  for (int b = 0; b < 2; ++b) {
    for (int u = 0; u < 4; ++u) scaled[b].push_back(2.0 * in.channels.h(b, u));
  }
  const ChannelSet big(scaled);
  EXPECT_GT(EvaluateSinr(big, in.topology, WithBeams(w), 0), a);
}

TEST(Sinr, MissingBeamformersThrow) {
  const auto in = fixtures::Make(1, 1, 1, 2, 0.0, 0.0, 1);
  BeamformingSolution s;
  s.W = {CMatrix::Identity(2, 2)};
  EXPECT_THROW(EvaluateSinr(in.channels, in.topology, s, 0), StateError);
}

TEST(OrthogonalTarget, Examples) {
  EXPECT_DOUBLE_EQ(OrthogonalEquivalentTarget(1.0, 2), 3.0);
  EXPECT_DOUBLE_EQ(OrthogonalEquivalentTarget(0.37, 1), 0.37);
  EXPECT_DOUBLE_EQ(OrthogonalEquivalentTarget(3.0, 3), 63.0);
}

TEST(SumPower, TracesAndBeams) {
  BeamformingSolution s;
  s.W = {1.5 * CMatrix::Identity(1, 1), 2.5 * CMatrix::Identity(1, 1)};
  EXPECT_DOUBLE_EQ(SumPower(s), 4.0);
  Rng rng(3);
  const CVector w = ComplexNormal(4, rng);
  BeamformingSolution r;
  r.W = {w * w.adjoint()};
  EXPECT_NEAR(SumPower(r), w.squaredNorm(), 1e-12);
  r.ExtractPrincipal();
  EXPECT_NEAR(SumPower(r), w.squaredNorm(), 1e-12);
  EXPECT_NEAR(std::abs(w.dot((*r.w)[0])), w.squaredNorm(), 1e-9);
}

TEST(SumPower, RandomCovariancesMatchRawTraceSum) {
  Rng rng(8);
  BeamformingSolution s;
  double expected = 0.0;
  for (int g = 0; g < 3; ++g) {
    CMatrix L(3, 3);
    for (int i = 0; i < 3; ++i) L.col(i) = ComplexNormal(3, rng);
    s.W.push_back(L * L.adjoint());
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) expected += std::norm(L(i, j));
    }
  }
  EXPECT_NEAR(SumPower(s), expected, 1e-10);
}

TEST(Units, DecibelConversion) {
  EXPECT_DOUBLE_EQ(DbToLinear(0.0), 1.0);
  EXPECT_NEAR(DbToLinear(10.0), 10.0, 1e-12);
  EXPECT_NEAR(LinearToDb(DbToLinear(-1.3)), -1.3, 1e-12);
}

TEST(CellView, RestrictsToServedUsers) {
  const auto in = fixtures::Make(2, 4, 8, 3, 0.0, 1.0, 2);
  const CellView v = RestrictToCell(in.topology, in.channels, 1);
  EXPECT_EQ(v.topology.B, 1);
  EXPECT_EQ(v.topology.G, 2);
  EXPECT_EQ(v.groups, (std::vector<int>{1, 3}));
  EXPECT_EQ(v.users, (std::vector<int>{1, 3, 5, 7}));
  EXPECT_EQ(v.channels.h(0, 2), in.channels.h(1, 5));
}

}  // namespace
}  // namespace mcbf
