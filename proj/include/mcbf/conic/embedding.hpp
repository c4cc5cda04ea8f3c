#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mcbf/conic/problem.hpp"

namespace mcbf::conic {

// Real symmetric image of a Hermitian conic problem. A Hermitian n x n
// matrix H = R + iI maps to the 2n x 2n block [[R, -I], [I, R]]. Because
// Tr(emb(H) emb(W)) = 2 Tr(HW), every embedded coefficient is halved so
// objective and constraint values are preserved exactly.

struct RealMatrixTerm {
  int var = 0;
  Eigen::MatrixXd coeff;
};

struct RealConstraint {
  std::vector<RealMatrixTerm> matrix_terms;
  std::vector<ScalarTerm> scalar_terms;
  Relation relation = Relation::kGreaterEqual;
  double rhs = 0.0;
};

struct RealConicProblem {
  std::vector<int> matrix_dims;  ///< 2n for an n x n Hermitian variable
  int num_scalars = 0;
  std::vector<Eigen::MatrixXd> matrix_objective;
  Eigen::VectorXd scalar_linear;
  Eigen::VectorXd scalar_quadratic;
  double objective_constant = 0.0;
  std::vector<RealConstraint> constraints;
};

Eigen::MatrixXd EmbedHermitianMatrix(const CMatrix& h);

/// Inverse of EmbedHermitianMatrix; averages the redundant blocks so it is
/// also the projection onto embedded Hermitian matrices.
CMatrix UnembedSymmetricMatrix(const Eigen::MatrixXd& s);

RealConicProblem EmbedHermitian(const ConicProblem& problem);

}  // namespace mcbf::conic
