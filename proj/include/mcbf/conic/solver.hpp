#pragma once

#include <Eigen/Dense>

#include "mcbf/conic/problem.hpp"

namespace mcbf::conic {

struct SolverOptions {
  double feasibility_tolerance = 1e-8;
  double gap_tolerance = 1e-8;
  /// Iterates that stall above the targets but within this bound are still
  /// reported as Optimal.
  double acceptance_tolerance = 1e-7;
  double infeasibility_tolerance = 1e-8;
  int max_iterations = 200;
  /// Per-iteration progress lines on stderr.
  bool verbose = false;
};

/// Dense primal-dual interior-point solve on the homogeneous self-dual
/// embedding with Nesterov-Todd scaling and Mehrotra correction. Hermitian
/// variables are solved through their real symmetric embedding.
ConicSolution Solve(const ConicProblem& problem, const SolverOptions& options = {});

enum class Feasibility { kFeasible, kInfeasible };

struct FeasibilityResult {
  Feasibility verdict = Feasibility::kInfeasible;
  ConicSolution solution;  ///< the feasible point or the certificate carrier
};

/// Decides feasibility of the constraint set, ignoring any objective.
/// Throws IndeterminateError when the solver cannot reach a verdict.
FeasibilityResult CheckFeasibility(const ConicProblem& problem, const SolverOptions& options = {});

struct CertificateCheck {
  double b_dot_y = 0.0;
  double cone_violation = 0.0;
  bool valid = false;
};

/// Evaluates a Farkas certificate directly against the problem data: sign
/// restrictions on y, sum_k y_k A_k in the negative cone (within
/// `tolerance` * max(1, b'y)), and b'y >= 1e-8 for unit-norm y.
CertificateCheck VerifyFarkasCertificate(const ConicProblem& problem, const Eigen::VectorXd& y,
                                         double tolerance = 1e-7);

/// KKT residuals of a primal-dual pair measured on the original problem.
KktResiduals ComputeKktResiduals(const ConicProblem& problem, const ConicSolution& solution);

}  // namespace mcbf::conic
