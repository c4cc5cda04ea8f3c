#include "mcbf/conic/eigen_tools.hpp"

#include <algorithm>

#include "mcbf/errors.hpp"

namespace mcbf::conic {

namespace {

void RequireHermitian(const CMatrix& w) {
  if (w.rows() != w.cols() || w.rows() == 0) throw ProblemError("expected a nonempty square matrix");
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((w - w.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ProblemError("matrix is not Hermitian");
  }
}

Eigen::SelfAdjointEigenSolver<CMatrix> Decompose(const CMatrix& w) {
  RequireHermitian(w);
  return Eigen::SelfAdjointEigenSolver<CMatrix>(0.5 * (w + w.adjoint()));
}

}  // namespace

Eigenpair PrincipalEigenpair(const CMatrix& w) {
  const auto es = Decompose(w);
  const Eigen::Index top = w.rows() - 1;  // eigenvalues ascend
  Eigenpair p;
  p.value = es.eigenvalues()(top);
  p.vector = es.eigenvectors().col(top).normalized();
  return p;
}

int NumericalRank(const CMatrix& w, double rel_tol) {
  const auto es = Decompose(w);
  const double top = es.eigenvalues().maxCoeff();
  if (top <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > rel_tol * top) ++rank;
  }
  return rank;
}

CMatrix PsdSquareRoot(const CMatrix& w) {
  const auto es = Decompose(w);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace mcbf::conic
