#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mcbf/conic/eigen_tools.hpp"
#include "mcbf/conic/embedding.hpp"
#include "mcbf/conic/solver.hpp"
#include "mcbf/conic/text_dump.hpp"
#include "mcbf/errors.hpp"
#include "oracles.hpp"

namespace mcbf::conic {
namespace {

CMatrix Outer(const Eigen::VectorXcd& h) { return h * h.adjoint(); }

Eigen::VectorXcd RandomVector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = {nd(rng), nd(rng)};
  return v;
}

ConicProblem SingleUserQos(const Eigen::VectorXcd& h, double gamma, double sigma2) {
  ConicProblem p;
  const int w = p.AddMatrixVariable(static_cast<int>(h.size()));
  p.SetTraceObjective(w);
  LinearConstraint c;
  c.matrix_terms.push_back({w, Outer(h)});
  c.relation = Relation::kGreaterEqual;
  c.rhs = gamma * sigma2;
  p.AddConstraint(c);
  return p;
}

TEST(ConicSolver, LinearProgramWithActiveBound) {
  ConicProblem p;
  const int x = p.AddScalarVariable();
  p.SetScalarObjective(x, 1.0);
  p.AddConstraint({{}, {{x, 1.0}}, Relation::kGreaterEqual, 2.0, "lb"});
  const auto s = Solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.scalar_values(0), 2.0, 1e-7);
  EXPECT_NEAR(s.duals(0), 1.0, 1e-7);
  EXPECT_NEAR(s.primal_objective, 2.0, 1e-7);
}

TEST(ConicSolver, LessEqualDualIsNonpositive) {
  // min -x  s.t. x <= 3  ->  x = 3, d(opt)/d(rhs) = -1.
  ConicProblem p;
  const int x = p.AddScalarVariable();
  p.SetScalarObjective(x, -1.0);
  p.AddConstraint({{}, {{x, 1.0}}, Relation::kLessEqual, 3.0, "ub"});
  const auto s = Solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.scalar_values(0), 3.0, 1e-7);
  EXPECT_NEAR(s.duals(0), -1.0, 1e-7);
}

TEST(ConicSolver, EqualityAndQuadraticObjective) {
  // min x^2 - 4x + y  s.t. x + y = 5  ->  x = 2.5? gradient 2x - 4 = 1 -> x = 2.5.
  ConicProblem p;
  const int x = p.AddScalarVariable();
  const int y = p.AddScalarVariable();
  p.SetScalarObjective(x, -4.0, 2.0);
  p.SetScalarObjective(y, 1.0);
  p.AddConstraint({{}, {{x, 1.0}, {y, 1.0}}, Relation::kEqual, 5.0, "sum"});
  const auto s = Solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.scalar_values(0), 2.5, 1e-6);
  EXPECT_NEAR(s.scalar_values(1), 2.5, 1e-6);
  EXPECT_NEAR(s.primal_objective, 2.5 * 2.5 - 10.0 + 2.5, 1e-6);
  EXPECT_NEAR(s.duals(0), 1.0, 1e-6);
}

TEST(ConicSolver, QuadraticMinimizerInsideOrthant) {
  ConicProblem p;
  const int x = p.AddScalarVariable();
  p.SetScalarObjective(x, -4.0, 2.0);
  const auto s = Solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal);
  EXPECT_NEAR(s.scalar_values(0), 2.0, 1e-6);
  EXPECT_NEAR(s.primal_objective, -4.0, 1e-6);
}

TEST(ConicSolver, SingleUserQosMatchesClosedForm) {
  std::mt19937_64 rng(7);
  for (int a : {2, 4}) {
    const Eigen::VectorXcd h = RandomVector(a, rng);
    const double gamma = 2.0, sigma2 = 0.5;
    const auto s = Solve(SingleUserQos(h, gamma, sigma2));
    ASSERT_EQ(s.status, SolveStatus::kOptimal);
    const double expected = gamma * sigma2 / h.squaredNorm();
    EXPECT_NEAR(s.primal_objective / expected, 1.0, 1e-7);
    EXPECT_EQ(NumericalRank(s.matrix_values[0]), 1);
  }
}

TEST(ConicSolver, SingleUserQosMatchesGridSearch) {
  std::mt19937_64 rng(11);
  const Eigen::VectorXcd h = RandomVector(2, rng);
  // Best unit direction by exhaustive search over the sphere in C^2
  // (modulo global phase): w = (cos a, sin a e^{i phi}).
  double best_gain = 0.0;
  const int steps = 400;
  for (int i = 0; i <= steps; ++i) {
    const double alpha = 0.5 * M_PI * i / steps;
    for (int j = 0; j < steps; ++j) {
      const double phi = 2.0 * M_PI * j / steps;
      Eigen::VectorXcd w(2);
      w << std::cos(alpha), std::sin(alpha) * std::polar(1.0, phi);
      best_gain = std::max(best_gain, std::norm(h.dot(w)));
    }
  }
  const auto s = Solve(SingleUserQos(h, 1.0, 1.0));
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.primal_objective, 1.0 / best_gain, 1e-3 * s.primal_objective);
  EXPECT_LE(s.primal_objective, 1.0 / best_gain + 1e-9);
}

TEST(ConicSolver, InfeasibleProblemCarriesVerifiedCertificate) {
  ConicProblem p;
  const int x = p.AddScalarVariable();
  p.AddConstraint({{}, {{x, 1.0}}, Relation::kGreaterEqual, 1.0, "a"});
  p.AddConstraint({{}, {{x, -1.0}}, Relation::kGreaterEqual, 0.0, "b"});
  const auto s = Solve(p);
  ASSERT_EQ(s.status, SolveStatus::kInfeasible);
  ASSERT_TRUE(s.certificate.has_value());
  const auto check = VerifyFarkasCertificate(p, s.certificate->y);
  EXPECT_TRUE(check.valid);
  EXPECT_GE(check.b_dot_y, 1e-8);
}

TEST(ConicSolver, InfeasibleSdp) {
  // Tr(W) <= 1 and Tr(hh^H W) >= 10 ||h||^2 cannot both hold.
  std::mt19937_64 rng(3);
  const Eigen::VectorXcd h = RandomVector(3, rng);
  ConicProblem p;
  const int w = p.AddMatrixVariable(3);
  p.AddConstraint({{{w, CMatrix::Identity(3, 3)}}, {}, Relation::kLessEqual, 1.0, "power"});
  p.AddConstraint({{{w, Outer(h)}}, {}, Relation::kGreaterEqual, 10.0 * h.squaredNorm(), "sinr"});
  const auto s = Solve(p);
  ASSERT_EQ(s.status, SolveStatus::kInfeasible);
  EXPECT_TRUE(VerifyFarkasCertificate(p, s.certificate->y).valid);
}

TEST(ConicSolver, ZeroRowWithNonzeroRightHandSideIsInfeasible) {
  ConicProblem p;
  p.AddScalarVariable();
  p.AddConstraint({{}, {}, Relation::kEqual, 1.0, "empty"});
  const auto s = Solve(p);
  ASSERT_EQ(s.status, SolveStatus::kInfeasible);
  EXPECT_TRUE(VerifyFarkasCertificate(p, s.certificate->y).valid);
}

TEST(ConicSolver, UnboundedProblem) {
  ConicProblem p;
  const int x = p.AddScalarVariable();
  p.SetScalarObjective(x, -1.0);
  p.AddConstraint({{}, {{x, 1.0}}, Relation::kGreaterEqual, 1.0, "lb"});
  const auto s = Solve(p);
  ASSERT_EQ(s.status, SolveStatus::kUnbounded);
  ASSERT_TRUE(s.ray.has_value());
  EXPECT_GT(s.ray->scalar_direction(0), 0.0);
}

TEST(ConicSolver, MalformedProblemThrows) {
  ConicProblem p;
  const int w = p.AddMatrixVariable(2);
  p.AddConstraint({{{w, CMatrix::Identity(3, 3)}}, {}, Relation::kEqual, 1.0, "bad"});
  EXPECT_THROW(Solve(p), ProblemError);
  ConicProblem empty;
  EXPECT_THROW(Solve(empty), ProblemError);
  ConicProblem nonherm;
  const int v = nonherm.AddMatrixVariable(2);
  CMatrix c = CMatrix::Zero(2, 2);
  c(0, 1) = 1.0;
  nonherm.AddConstraint({{{v, c}}, {}, Relation::kEqual, 1.0, "asym"});
  EXPECT_THROW(Solve(nonherm), ProblemError);
}

TEST(ConicSolver, ObjectiveScalingKeepsArgminAndScalesDuals) {
  std::mt19937_64 rng(5);
  const Eigen::VectorXcd h1 = RandomVector(3, rng), h2 = RandomVector(3, rng);
  auto build = [&](double scale) {
    ConicProblem p;
    const int a = p.AddMatrixVariable(3);
    const int b = p.AddMatrixVariable(3);
    p.SetTraceObjective(a, scale);
    p.SetTraceObjective(b, scale);
    p.AddConstraint({{{a, Outer(h1)}, {b, -0.5 * Outer(h1)}}, {}, Relation::kGreaterEqual, 1.0, "u1"});
    p.AddConstraint({{{b, Outer(h2)}, {a, -0.5 * Outer(h2)}}, {}, Relation::kGreaterEqual, 1.0, "u2"});
    return p;
  };
  
  const auto s1 = Solve(build(1.0));
  const auto s3 = Solve(build(3.0));
  ASSERT_TRUE(s1.optimal()) << ToString(s1.status) << ' ' << s1.iterations;
  ASSERT_TRUE(s3.optimal()) << ToString(s3.status);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LE((s1.matrix_values[i] - s3.matrix_values[i]).norm(), 1e-5);
    EXPECT_NEAR(s3.duals(i), 3.0 * s1.duals(i), 1e-5);
  }
}

TEST(ConicSolver, KktAndComplementarySlacknessAtOptimum) {
  std::mt19937_64 rng(21);
  const Eigen::VectorXcd h = RandomVector(4, rng), g = RandomVector(4, rng);
  ConicProblem p;
  const int w = p.AddMatrixVariable(4);
  const int t = p.AddScalarVariable();
  p.SetTraceObjective(w);
  p.SetScalarObjective(t, 0.5);
  p.AddConstraint({{{w, Outer(h)}}, {{t, 1.0}}, Relation::kGreaterEqual, 2.0, "a"});
  p.AddConstraint({{{w, Outer(g)}}, {}, Relation::kLessEqual, 0.1, "cap"});
  p.AddConstraint({{{w, CMatrix::Identity(4, 4)}}, {}, Relation::kLessEqual, 100.0, "slack"});
  const auto s = Solve(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_LE(s.residuals.primal, 1e-7);
  EXPECT_LE(s.residuals.dual, 1e-7);
  EXPECT_LE(s.residuals.gap, 1e-7);
  EXPECT_LE(s.dual_objective, s.primal_objective + 1e-7);
  for (int k = 0; k < p.num_constraints(); ++k) {
    const double slack = p.EvaluateConstraint(k, s.matrix_values, s.scalar_values) - p.constraint(k).rhs;
    EXPECT_LE(std::abs(s.duals(k) * slack), 1e-6) << k;
  }
  EXPECT_NEAR(s.duals(2), 0.0, 1e-6);
}

TEST(ConicSolver, RealDataGivesRealSolution) {
  ConicProblem p;
  const int w = p.AddMatrixVariable(2);
  p.SetTraceObjective(w);
  CMatrix a(2, 2);
  a << 2.0, 1.0, 1.0, 1.0;
  p.AddConstraint({{{w, a}}, {}, Relation::kGreaterEqual, 1.0, "c"});
  const auto s = Solve(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_LE(s.matrix_values[0].imag().cwiseAbs().maxCoeff(), 1e-8);
  // Optimum is 1 / lambda_max(a).
  const double lmax = (3.0 + std::sqrt(5.0)) / 2.0;
  EXPECT_NEAR(s.primal_objective, 1.0 / lmax, 1e-7);
}

TEST(Embedding, TraceIdentity) {
  std::mt19937_64 rng(1);
  const Eigen::VectorXcd x = RandomVector(3, rng), y = RandomVector(3, rng);
  const CMatrix h = Outer(x) + CMatrix::Identity(3, 3) * std::complex<double>(0.0, 0.0);
  CMatrix w = Outer(y);
  w(0, 1) += std::complex<double>(0.3, 0.7);
  w(1, 0) = std::conj(w(0, 1));
  const double complex_trace = (h * w).trace().real();
  const double real_trace = 0.5 * (EmbedHermitianMatrix(h) * EmbedHermitianMatrix(w)).trace();
  EXPECT_NEAR(complex_trace, real_trace, 1e-12);
  EXPECT_LE((UnembedSymmetricMatrix(EmbedHermitianMatrix(w)) - w).norm(), 1e-14);
}

TEST(Embedding, EmbeddedProblemKeepsValues) {
  std::mt19937_64 rng(2);
  const Eigen::VectorXcd h = RandomVector(2, rng);
  const auto p = SingleUserQos(h, 1.5, 1.0);
  const auto real = EmbedHermitian(p);
  ASSERT_EQ(real.matrix_dims.size(), 1u);
  EXPECT_EQ(real.matrix_dims[0], 4);
  const Eigen::VectorXcd w = RandomVector(2, rng);
  const Eigen::MatrixXd ew = EmbedHermitianMatrix(Outer(w));
  EXPECT_NEAR(p.EvaluateConstraint(0, {Outer(w)}, Eigen::VectorXd()),
              real.constraints[0].matrix_terms[0].coeff.cwiseProduct(ew).sum(), 1e-12);
}

TEST(Feasibility, EmptyConstraintSetIsFeasible) {
  ConicProblem p;
  p.AddMatrixVariable(2);
  EXPECT_EQ(CheckFeasibility(p).verdict, Feasibility::kFeasible);
}

TEST(Feasibility, IgnoresObjectiveAndDetectsInfeasibility) {
  std::mt19937_64 rng(4);
  const Eigen::VectorXcd h = RandomVector(2, rng);
  const double cap = 3.0;
  auto build = [&](double t) {
    ConicProblem p;
    const int w = p.AddMatrixVariable(2);
    p.SetTraceObjective(w, -1.0);  // would be unbounded without the power row
    p.AddConstraint({{{w, Outer(h)}}, {}, Relation::kGreaterEqual, t, "sinr"});
    p.AddConstraint({{{w, CMatrix::Identity(2, 2)}}, {}, Relation::kLessEqual, cap, "power"});
    return p;
  };
  const double bound = cap * h.squaredNorm();
  EXPECT_EQ(CheckFeasibility(build(0.0)).verdict, Feasibility::kFeasible);
  EXPECT_EQ(CheckFeasibility(build(0.9 * bound)).verdict, Feasibility::kFeasible);
  EXPECT_EQ(CheckFeasibility(build(1.1 * bound)).verdict, Feasibility::kInfeasible);
}

TEST(EigenTools, PrincipalEigenpairOfOuterProduct) {
  std::mt19937_64 rng(8);
  const Eigen::VectorXcd w = RandomVector(3, rng);
  const auto ep = PrincipalEigenpair(Outer(w));
  EXPECT_NEAR(ep.value, w.squaredNorm(), 1e-12);
  EXPECT_NEAR(std::abs(ep.vector.dot(w.normalized())), 1.0, 1e-12);
}

TEST(EigenTools, PrincipalEigenpairOfDiagonal) {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 5.0;
  d(1, 1) = 1.0;
  const auto ep = PrincipalEigenpair(d);
  EXPECT_DOUBLE_EQ(ep.value, 5.0);
  EXPECT_NEAR(std::abs(ep.vector(0)), 1.0, 1e-15);
}

TEST(EigenTools, PrincipalEigenpairMatchesJacobiOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    CMatrix w = CMatrix::Zero(4, 4);
    for (int k = 0; k < 3; ++k) w += Outer(RandomVector(4, rng));
    const auto ep = PrincipalEigenpair(w);
    const auto ev = oracle::HermitianEigenvalues(w);
    EXPECT_NEAR(ep.value, ev.back(), 1e-10 * ev.back());
    EXPECT_LE((w * ep.vector - ep.value * ep.vector).norm(), 1e-9 * w.norm());
    EXPECT_NEAR(ep.vector.norm(), 1.0, 1e-12);
  }
}

TEST(EigenTools, RejectsNonHermitian) {
  CMatrix w = CMatrix::Identity(2, 2);
  w(0, 1) = 1e-6;
  EXPECT_THROW(PrincipalEigenpair(w), ProblemError);
}

TEST(EigenTools, NumericalRank) {
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 5.0;
  EXPECT_EQ(NumericalRank(d), 1);
  EXPECT_EQ(NumericalRank(CMatrix::Identity(2, 2)), 2);
  std::mt19937_64 rng(10);
  const Eigen::VectorXcd w = RandomVector(3, rng).normalized();
  Eigen::VectorXcd v = RandomVector(3, rng);
  v -= w * w.dot(v);
  v.normalize();
  EXPECT_EQ(NumericalRank(Outer(w) + 1e-9 * Outer(v)), 1);
  EXPECT_EQ(NumericalRank(Outer(w) + 1e-3 * Outer(v)), 2);
}

TEST(EigenTools, PsdSquareRoot) {
  std::mt19937_64 rng(12);
  CMatrix w = Outer(RandomVector(3, rng)) + Outer(RandomVector(3, rng));
  const CMatrix l = PsdSquareRoot(w);
  EXPECT_LE((l * l.adjoint() - w).norm(), 1e-12 * w.norm());
}

TEST(TextDump, RoundTrip) {
  std::mt19937_64 rng(13);
  const Eigen::VectorXcd h = RandomVector(3, rng);
  ConicProblem p;
  const int w = p.AddMatrixVariable(3);
  const int x = p.AddScalarVariable();
  p.SetTraceObjective(w);
  p.SetScalarObjective(x, 0.25, 2.0);
  p.AddObjectiveConstant(1.5);
  p.AddConstraint({{{w, Outer(h)}}, {{x, -1.0}}, Relation::kGreaterEqual, 1.0, "sinr_0"});
  p.AddConstraint({{}, {{x, 1.0}}, Relation::kLessEqual, 4.0, ""});
  std::stringstream ss;
  WriteProblemText(p, ss);
  const ConicProblem q = ReadProblemText(ss);
  ASSERT_EQ(q.num_constraints(), 2);
  EXPECT_EQ(q.constraint(0).label, "sinr_0");
  EXPECT_EQ(q.constraint(1).relation, Relation::kLessEqual);
  EXPECT_EQ((q.constraint(0).matrix_terms[0].coeff - p.constraint(0).matrix_terms[0].coeff).norm(), 0.0);
  EXPECT_EQ(q.scalar_quadratic(0), 2.0);
  EXPECT_EQ(q.objective_constant(), 1.5);
  EXPECT_NEAR(Solve(q).primal_objective, Solve(p).primal_objective, 1e-12);
}

TEST(TextDump, RejectsGarbage) {
  std::stringstream ss("mcbf-conic 1\nbogus 1 2\n");
  EXPECT_THROW(ReadProblemText(ss), ProblemError);
}

}  // namespace
}  // namespace mcbf::conic
