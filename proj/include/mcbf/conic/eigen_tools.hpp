#pragma once

#include <Eigen/Dense>

#include "mcbf/conic/problem.hpp"

namespace mcbf::conic {

struct Eigenpair {
  double value = 0.0;
  Eigen::VectorXcd vector;  ///< unit norm
};

/// Largest eigenvalue of a Hermitian matrix and a unit eigenvector.
/// Throws ProblemError when W is not Hermitian within 1e-10 (relative).
Eigenpair PrincipalEigenpair(const CMatrix& w);

/// Count of eigenvalues above rel_tol * lambda_max. Zero matrix -> 0.
int NumericalRank(const CMatrix& w, double rel_tol = 1e-6);

/// L with L L^H = W from the eigendecomposition; negative eigenvalues
/// from round-off are clipped to zero.
CMatrix PsdSquareRoot(const CMatrix& w);

}  // namespace mcbf::conic
