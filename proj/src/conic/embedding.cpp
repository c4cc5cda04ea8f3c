#include "mcbf/conic/embedding.hpp"

namespace mcbf::conic {

Eigen::MatrixXd EmbedHermitianMatrix(const CMatrix& h) {
  const Eigen::Index n = h.rows();
  Eigen::MatrixXd s(2 * n, 2 * n);
  const Eigen::MatrixXd re = h.real();
  const Eigen::MatrixXd im = h.imag();
  s.topLeftCorner(n, n) = re;
  s.topRightCorner(n, n) = -im;
  s.bottomLeftCorner(n, n) = im;
  s.bottomRightCorner(n, n) = re;
  // Symmetrize to remove round-off asymmetry in the input.
  return 0.5 * (s + s.transpose());
}

CMatrix UnembedSymmetricMatrix(const Eigen::MatrixXd& s) {
  const Eigen::Index n = s.rows() / 2;
  const Eigen::MatrixXd re = 0.5 * (s.topLeftCorner(n, n) + s.bottomRightCorner(n, n));
  const Eigen::MatrixXd im = 0.5 * (s.bottomLeftCorner(n, n) - s.topRightCorner(n, n));
  CMatrix h(n, n);
  h.real() = re;
  h.imag() = im;
  return 0.5 * (h + h.adjoint());
}

RealConicProblem EmbedHermitian(const ConicProblem& problem) {
  RealConicProblem out;
  const int nm = problem.num_matrix_vars();
  out.matrix_dims.reserve(static_cast<std::size_t>(nm));
  for (int i = 0; i < nm; ++i) {
    out.matrix_dims.push_back(2 * problem.matrix_dim(i));
    out.matrix_objective.push_back(0.5 * EmbedHermitianMatrix(problem.matrix_objective(i)));
  }
  out.num_scalars = problem.num_scalar_vars();
  out.scalar_linear.resize(out.num_scalars);
  out.scalar_quadratic.resize(out.num_scalars);
  for (int j = 0; j < out.num_scalars; ++j) {
    out.scalar_linear(j) = problem.scalar_linear(j);
    out.scalar_quadratic(j) = problem.scalar_quadratic(j);
  }
  out.objective_constant = problem.objective_constant();
  out.constraints.reserve(static_cast<std::size_t>(problem.num_constraints()));
  for (const auto& con : problem.constraints()) {
    RealConstraint rc;
    rc.relation = con.relation;
    rc.rhs = con.rhs;
    rc.scalar_terms = con.scalar_terms;
    for (const auto& t : con.matrix_terms) {
      // Merge repeated terms on the same variable.
      bool merged = false;
      for (auto& existing : rc.matrix_terms) {
        if (existing.var == t.var) {
          existing.coeff += 0.5 * EmbedHermitianMatrix(t.coeff);
          merged = true;
          break;
        }
      }
      if (!merged) rc.matrix_terms.push_back({t.var, 0.5 * EmbedHermitianMatrix(t.coeff)});
    }
    out.constraints.push_back(std::move(rc));
  }
  return out;
}

}  // namespace mcbf::conic
