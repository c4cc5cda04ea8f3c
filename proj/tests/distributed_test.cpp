#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mcbf/admm.hpp"
#include "mcbf/distributed_randomization.hpp"
#include "mcbf/errors.hpp"
#include "mcbf/power_min.hpp"
#include "mcbf/primal_decomposition.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mcbf {
namespace {

double CentralPower(const fixtures::Instance& in) {
  Rng rng(0);
  return SumPower(SolveCentralized(in.channels, in.topology, {}, rng).solution);
}

double LocalOptimaSum(const fixtures::Instance& in, const IciPairs& pairs, const Eigen::VectorXd& theta) {
  double f = 0.0;
  for (int b = 0; b < in.topology.B; ++b) {
    const auto c = SolveSubproblem(b, in.channels, in.topology, pairs, theta);
    EXPECT_TRUE(c.feasible);
    f += c.power;
  }
  return f;
}

Eigen::VectorXd Subgradient(const fixtures::Instance& in, const IciPairs& pairs, const Eigen::VectorXd& theta) {
  std::vector<DualSides> sides;
  for (int b = 0; b < in.topology.B; ++b) {
    const auto c = SolveSubproblem(b, in.channels, in.topology, pairs, theta);
    sides.push_back(ExtractDualSides(c.solution, c.layout, in.topology, pairs));
  }
  return AssembleSubgradient(sides, pairs);
}

TEST(IciPairs, CanonicalOrder) {
  const auto in = fixtures::Make(2, 2, 4, 2, 0.0, 1.0, 1);
  const IciPairs pairs(in.topology);
  ASSERT_EQ(pairs.size(), 4);
  EXPECT_EQ(pairs.interferer(0), 0);
  EXPECT_EQ(pairs.user(0), 1);
  EXPECT_EQ(pairs.user(1), 3);
  EXPECT_EQ(pairs.interferer(2), 1);
  EXPECT_EQ(pairs.user(2), 0);
  EXPECT_EQ(pairs.server(2), 0);
  EXPECT_EQ(pairs.index(0, 0), -1);
  EXPECT_EQ(pairs.incoming(0), (std::vector<int>{2, 3}));
  EXPECT_EQ(pairs.between(1, 0), (std::vector<int>{0, 1, 2, 3}));
}

TEST(Subproblem, SingleCellMatchesCentralizedSdp) {
  const auto in = fixtures::Make(1, 2, 4, 3, 0.0, 0.0, 2);
  const IciPairs pairs(in.topology);
  const auto cp = AssembleSubproblem(0, in.channels, in.topology, pairs, Eigen::VectorXd());
  EXPECT_EQ(cp.problem.num_scalar_vars(), 0);
  EXPECT_EQ(cp.problem.num_constraints(), 4);
  const auto c = SolveSubproblem(0, in.channels, in.topology, pairs, Eigen::VectorXd());
  const double central = conic::Solve(AssembleQosSdp(in.channels, in.topology)).primal_objective;
  EXPECT_NEAR(c.power, central, 1e-7 * central);
}

TEST(Subproblem, LooserIncomingIciCostsMore) {
  // Large incoming ICI with generous outgoing caps is the harder problem
  // for the receiving cell; tiny incoming ICI and huge caps is the easiest.
  const auto in = fixtures::Make(2, 2, 4, 4, 0.0, 1.0, 3);
  const IciPairs pairs(in.topology);
  Eigen::VectorXd easy = Eigen::VectorXd::Constant(pairs.size(), 10.0);
  for (int k : pairs.incoming(0)) easy(k) = 1e-3;
  Eigen::VectorXd other = Eigen::VectorXd::Constant(pairs.size(), 0.3);
  const auto a = SolveSubproblem(0, in.channels, in.topology, pairs, easy);
  const auto b = SolveSubproblem(0, in.channels, in.topology, pairs, other);
  ASSERT_TRUE(a.feasible && b.feasible);
  EXPECT_LE(a.power, b.power + 1e-9);
}

TEST(Subproblem, TinyCapsAreRespected) {
  const auto in = fixtures::Make(2, 2, 4, 4, 0.0, 1.0, 4);
  const IciPairs pairs(in.topology);
  const auto tight = SolveSubproblem(0, in.channels, in.topology, pairs, Eigen::VectorXd::Constant(4, 1e-4));
  const auto loose = SolveSubproblem(0, in.channels, in.topology, pairs, Eigen::VectorXd::Constant(4, 3e-4));
  ASSERT_TRUE(tight.feasible);
  for (int k : pairs.outgoing(0)) {
    double ici = 0.0;
    for (const auto& W : tight.solution.matrix_values) ici += (in.channels.H(0, pairs.user(k)) * W).trace().real();
    EXPECT_LE(ici, 1e-4 * (1 + 1e-3));
  }
  ASSERT_TRUE(loose.feasible);
  EXPECT_LE(loose.power, tight.power + 1e-9);
}

TEST(Subgradient, InactiveCapGivesZeroMu) {
  const auto in = fixtures::Make(2, 2, 4, 4, 0.0, 1.0, 5);
  const IciPairs pairs(in.topology);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(pairs.size(), 1e3);
  const auto c = SolveSubproblem(0, in.channels, in.topology, pairs, theta);
  const auto sides = ExtractDualSides(c.solution, c.layout, in.topology, pairs);
  for (int k : pairs.outgoing(0)) EXPECT_NEAR(sides.mu(k), 0.0, 1e-7);
  for (int k : pairs.incoming(0)) EXPECT_GE(sides.lambda(k), 0.0);
}

TEST(Subgradient, EmptyForOneCell) {
  const auto in = fixtures::Make(1, 1, 2, 2, 0.0, 0.0, 5);
  const IciPairs pairs(in.topology);
  EXPECT_EQ(Subgradient(in, pairs, Eigen::VectorXd()).size(), 0);
}

TEST(Subgradient, MissingDualsThrow) {
  const auto in = fixtures::Make(2, 2, 4, 4, 0.0, 1.0, 5);
  const IciPairs pairs(in.topology);
  const auto c = SolveSubproblem(0, in.channels, in.topology, pairs, Eigen::VectorXd::Constant(4, 1.0));
  conic::ConicSolution broken = c.solution;
  broken.duals.resize(0);
  EXPECT_THROW(ExtractDualSides(broken, c.layout, in.topology, pairs), StateError);
}

TEST(Subgradient, MatchesCentralDifferences) {
  // Sign convention: the master minimizes sum_b f_b(theta), so the step
  // direction is -s and s is the gradient of that sum.
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    const auto in = fixtures::Make(2, 2, 4, 4, 1.0, 1.0, 20 + seed);
    const IciPairs pairs(in.topology);
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.05, 0.5);
    Eigen::VectorXd theta(pairs.size());
    for (int k = 0; k < pairs.size(); ++k) theta(k) = unif(rng);
    const Eigen::VectorXd s = Subgradient(in, pairs, theta);
    for (int k = 0; k < pairs.size(); ++k) {
      const double h = 1e-3 * theta(k);
      Eigen::VectorXd up = theta, down = theta;
      up(k) += h;
      down(k) -= h;
      const double fd = (LocalOptimaSum(in, pairs, up) - LocalOptimaSum(in, pairs, down)) / (2 * h);
      EXPECT_NEAR(s(k), fd, 2e-3 + 1e-2 * std::abs(fd)) << "pair " << k;
    }
  }
}

TEST(MasterUpdate, PlainProjectedStep) {
  StepSchedule plain;
  plain.trust_factor = 0.0;
  const Eigen::VectorXd one = Eigen::VectorXd::Constant(1, 1.0);
  EXPECT_NEAR(MasterUpdate(one, Eigen::VectorXd::Constant(1, 2.0), 0, plain)(0), 0.4, 1e-15);
  EXPECT_EQ(MasterUpdate(Eigen::VectorXd::Constant(1, 0.1), Eigen::VectorXd::Constant(1, 10.0), 0, plain)(0),
            kMinTheta);
  EXPECT_EQ(MasterUpdate(one, Eigen::VectorXd::Zero(1), 5, plain)(0), 1.0);
}

TEST(MasterUpdate, DiminishingAndTrustRegion) {
  StepSchedule dim;
  dim.kind = StepSchedule::Kind::kDiminishing;
  dim.trust_factor = 0.0;
  EXPECT_NEAR(dim.At(3), 0.15, 1e-15);
  StepSchedule trust;  // default factor 2
  const Eigen::VectorXd one = Eigen::VectorXd::Constant(1, 1.0);
  EXPECT_EQ(MasterUpdate(one, Eigen::VectorXd::Constant(1, 10.0), 0, trust)(0), 0.5);
  EXPECT_EQ(MasterUpdate(one, Eigen::VectorXd::Constant(1, -10.0), 0, trust)(0), 2.0);
  EXPECT_NEAR(MasterUpdate(one, Eigen::VectorXd::Constant(1, 1.0), 0, trust)(0), 0.7, 1e-15);
}

TEST(PrimalDecomposition, SingleCellConvergesImmediately) {
  const auto in = fixtures::Make(1, 2, 4, 4, 1.0, 0.0, 6);
  PrimalDecompositionOptions o;
  const auto r = RunPrimalDecomposition(in.channels, in.topology, o);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(SumPower(r.solution), CentralPower(in), 1e-6 * CentralPower(in));
}

TEST(PrimalDecomposition, ReachesCentralizedPower) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto in = fixtures::Make(2, 2, 4, 6, 1.0, 1.0, TrialSeed(77, seed));
    const auto r = RunPrimalDecomposition(in.channels, in.topology, {});
    ASSERT_TRUE(r.feasible);
    const double central = CentralPower(in);
    EXPECT_LE(std::abs(SumPower(r.solution) - central), 0.02 * central);
    EXPECT_EQ(r.replica_mismatches, 0);
    // Best-so-far power never increases.
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& row : r.trace) {
      if (std::isnan(row.best_power)) continue;
      EXPECT_LE(row.best_power, prev);
      prev = row.best_power;
    }
    for (int u = 0; u < in.topology.U; ++u) {
      EXPECT_GE(EvaluateSinr(in.channels, in.topology, r.solution, u), in.topology.gamma[u] * (1 - 1e-5));
    }
  }
}

TEST(PrimalDecomposition, ExchangesSixteenScalarsPerIteration) {
  const auto in = fixtures::Make(2, 4, 8, 8, 1.0, 1.0, 3);
  PrimalDecompositionOptions o;
  o.max_iters = 3;
  const auto r = RunPrimalDecomposition(in.channels, in.topology, o);
  for (const auto& row : r.trace) EXPECT_EQ(row.scalars, 16);
}

TEST(PrimalDecomposition, InfeasibleStartThrows) {
  // One antenna, two groups in a cell and a high target: nothing works.
  const auto in = fixtures::Make(2, 4, 4, 1, 20.0, 1.0, 3);
  EXPECT_THROW(RunPrimalDecomposition(in.channels, in.topology, {}), InitializationError);
}

TEST(Admm, LocalProblemStructure) {
  const auto in = fixtures::Make(2, 2, 4, 4, 0.0, 1.0, 8);
  const IciPairs pairs(in.topology);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(pairs.size(), 1.0);
  const auto cp = AssembleAdmmLocal(0, in.channels, in.topology, pairs, theta, Eigen::VectorXd::Zero(4), 2.0);
  EXPECT_EQ(cp.problem.num_scalar_vars(), 4);
  EXPECT_EQ(cp.problem.num_constraints(), 4);
  EXPECT_THROW(AssembleAdmmLocal(0, in.channels, in.topology, pairs, theta, Eigen::VectorXd::Zero(4), 0.0),
               ConfigError);
  const auto one = fixtures::Make(1, 1, 2, 2, 0.0, 0.0, 8);
  const IciPairs none(one.topology);
  EXPECT_EQ(AssembleAdmmLocal(0, one.channels, one.topology, none, Eigen::VectorXd(), Eigen::VectorXd(), 2.0)
                .problem.num_scalar_vars(),
            0);
}

TEST(Admm, LargePenaltyPinsCopies) {
  const auto in = fixtures::Make(2, 2, 4, 4, 0.0, 1.0, 8);
  const IciPairs pairs(in.topology);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(pairs.size(), 0.5);
  const auto cp = AssembleAdmmLocal(0, in.channels, in.topology, pairs, theta, Eigen::VectorXd::Zero(4), 1e6);
  const auto sol = conic::Solve(cp.problem);
  ASSERT_TRUE(sol.optimal());
  for (std::size_t i = 0; i < cp.layout.theta_vars.size(); ++i) {
    EXPECT_NEAR(sol.scalar_values(cp.layout.theta_vars[i]), 0.5, 1e-3);
  }
}

TEST(Admm, GlobalAndDualUpdates) {
  EXPECT_EQ(AdmmGlobalUpdate(2.0, 4.0), 3.0);
  EXPECT_EQ(AdmmGlobalUpdate(0.7, 0.7), 0.7);
  EXPECT_EQ(AdmmDualUpdate(0.0, 1.3, 1.3, 2.0), 0.0);
  EXPECT_EQ(AdmmDualUpdate(1.0, 1.5, 1.0, 2.0), 2.0);
}

TEST(Admm, MeanMinimizesAugmentedGlobalObjective) {
  // Over theta, nu_a (a - theta) + nu_b (b - theta) + rho/2 ((a - theta)^2 +
  // (b - theta)^2) with nu_a + nu_b = 0 is minimized at the mean; checked by
  // golden-section search.
  const double a = 0.3, b = 1.1, nu = 0.8, rho = 2.0;
  auto f = [&](double t) { return nu * (a - t) - nu * (b - t) + 0.5 * rho * ((a - t) * (a - t) + (b - t) * (b - t)); };
  double lo = -5, hi = 5;
  const double r = 0.5 * (std::sqrt(5.0) - 1);
  for (int i = 0; i < 200; ++i) {
    const double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    if (f(x1) < f(x2)) hi = x2; else lo = x1;
  }
  EXPECT_NEAR(0.5 * (lo + hi), AdmmGlobalUpdate(a, b), 1e-8);
}

TEST(Admm, PairSumStaysZero) {
  IciState s = IciState::Uniform(50, 1.0);
  Rng rng(4);
  std::uniform_real_distribution<double> unif(0.0, 3.0);
  for (int it = 0; it < 20; ++it) {
    for (int k = 0; k < 50; ++k) {
      s.theta_local[kInterfererSide](k) = unif(rng);
      s.theta_local[kServerSide](k) = unif(rng);
    }
    AdmmConsensusStep(s, 2.0);
    for (int k = 0; k < 50; ++k) {
      EXPECT_EQ(s.nu[kInterfererSide](k) + s.nu[kServerSide](k), 0.0);
      EXPECT_EQ(s.theta(k), 0.5 * (s.theta_local[0](k) + s.theta_local[1](k)));
    }
  }
}

TEST(Admm, ReachesCentralizedPower) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto in = fixtures::Make(2, 2, 4, 6, 1.0, 1.0, TrialSeed(77, seed));
    const auto r = RunAdmm(in.channels, in.topology, {});
    ASSERT_TRUE(r.feasible);
    const double central = CentralPower(in);
    EXPECT_LE(std::abs(SumPower(r.solution) - central), 0.02 * central);
    EXPECT_EQ(r.diagnostics.max_pair_sum, 0.0);
    EXPECT_EQ(r.diagnostics.max_mean_error, 0.0);
    for (const auto& row : r.trace) EXPECT_EQ(row.scalars, PerIterationSignalingLoad(2, 4));
  }
}

TEST(Admm, RestoredBeamformersAreFeasible) {
  const auto in = fixtures::Make(2, 2, 4, 6, 1.0, 1.0, 31);
  const IciPairs pairs(in.topology);
  AdmmOptions o;
  o.max_iters = 3;
  const auto r = RunAdmm(in.channels, in.topology, o);
  ASSERT_TRUE(r.feasible);
  for (int u = 0; u < in.topology.U; ++u) {
    EXPECT_GE(EvaluateSinr(in.channels, in.topology, r.solution, u), in.topology.gamma[u] * (1 - 1e-5));
  }
  const auto c = AdmmFeasibilityRestore(0, in.channels, in.topology, pairs, r.theta);
  EXPECT_TRUE(c.feasible);
}

TEST(Admm, SingleCellRestoreIsPlainSolve) {
  const auto in = fixtures::Make(1, 2, 4, 4, 1.0, 0.0, 6);
  const IciPairs pairs(in.topology);
  const auto c = AdmmFeasibilityRestore(0, in.channels, in.topology, pairs, Eigen::VectorXd());
  EXPECT_NEAR(c.power, conic::Solve(AssembleQosSdp(in.channels, in.topology)).primal_objective, 1e-7);
}

TEST(DistributedRandomization, RankOneCovariancesReproduceTheSdrPower) {
  // Caps loose enough to be inactive, otherwise the tiny perturbation of a
  // drawn direction can break a cap that the relaxation meets with equality.
  const auto in = fixtures::Make(2, 2, 4, 6, 1.0, 1.0, 12);
  const IciPairs pairs(in.topology);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(pairs.size(), 5.0);
  std::vector<std::vector<CMatrix>> W(2);
  double sdr = 0.0;
  for (int b = 0; b < 2; ++b) {
    const auto c = SolveSubproblem(b, in.channels, in.topology, pairs, theta);
    ASSERT_TRUE(c.feasible);
    W[b] = c.solution.matrix_values;
    sdr += c.power;
  }
  Backhaul bus(2);
  const auto sel = SelectDistributedCandidate(W, theta, in.channels, in.topology, pairs, 5, 9, bus, Execution::kSerial);
  ASSERT_GE(sel.selected, 0);
  EXPECT_NEAR(sel.total, sdr, 1e-3 * sdr);
  EXPECT_EQ(bus.log().Total({MessageTag::kGrPower}), 5 * 2);
}

TEST(DistributedRandomization, SelectedPowerAboveRelaxation) {
  const auto in = fixtures::Make(2, 2, 12, 3, 0.0, 3.0, 13);
  const IciPairs pairs(in.topology);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(pairs.size(), 0.5);
  std::vector<std::vector<CMatrix>> W(2);
  double sdr = 0.0;
  for (int b = 0; b < 2; ++b) {
    const auto c = SolveSubproblem(b, in.channels, in.topology, pairs, theta);
    ASSERT_TRUE(c.feasible);
    W[b] = c.solution.matrix_values;
    sdr += c.power;
  }
  Backhaul bus(2);
  const auto sel = SelectDistributedCandidate(W, theta, in.channels, in.topology, pairs, 40, 9, bus, Execution::kSerial);
  if (sel.selected >= 0) EXPECT_GE(sel.total, sdr - 1e-7);
  EXPECT_EQ(bus.log().Total({MessageTag::kGrPower}), 40 * 2);
}

TEST(Determinism, SerialAndParallelTracesAreIdentical) {
#if defined(_OPENMP)
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
#endif
  const auto in = fixtures::Make(3, 3, 6, 4, 0.0, 1.0, 40);
  PrimalDecompositionOptions pd;
  pd.max_iters = 8;
  pd.execution = Execution::kSerial;
  const auto a = RunPrimalDecomposition(in.channels, in.topology, pd);
  pd.execution = Execution::kParallel;
  const auto b = RunPrimalDecomposition(in.channels, in.topology, pd);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].sum_power, b.trace[i].sum_power);
    EXPECT_EQ(a.trace[i].residual, b.trace[i].residual);
  }
  EXPECT_EQ(a.theta, b.theta);
  AdmmOptions ad;
  ad.max_iters = 8;
  ad.execution = Execution::kSerial;
  const auto c = RunAdmm(in.channels, in.topology, ad);
  ad.execution = Execution::kParallel;
  const auto d = RunAdmm(in.channels, in.topology, ad);
  ASSERT_EQ(c.trace.size(), d.trace.size());
  for (std::size_t i = 0; i < c.trace.size(); ++i) EXPECT_EQ(c.trace[i].sum_power, d.trace[i].sum_power);
  EXPECT_EQ(c.state.nu[0], d.state.nu[0]);
  ASSERT_EQ(a.log.records().size(), b.log.records().size());
  for (std::size_t i = 0; i < a.log.records().size(); ++i) {
    EXPECT_EQ(a.log.records()[i].count, b.log.records()[i].count);
    EXPECT_EQ(a.log.records()[i].sender, b.log.records()[i].sender);
  }
#if defined(_OPENMP)
  omp_set_num_threads(saved);
#endif
}

}  // namespace
}  // namespace mcbf
