#include "mcbf/conic/problem.hpp"

#include <cmath>
#include <sstream>

#include "mcbf/errors.hpp"

namespace mcbf::conic {

namespace {

constexpr double kHermitianTolerance = 1e-10;

bool IsHermitian(const CMatrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= kHermitianTolerance * scale;
}

}  // namespace

const char* ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kInfeasible: return "Infeasible";
    case SolveStatus::kUnbounded: return "Unbounded";
    case SolveStatus::kMaxIter: return "MaxIter";
  }
  return "Unknown";
}

int ConicProblem::AddMatrixVariable(int dim) {
  if (dim < 1) throw ProblemError("matrix variable dimension must be positive");
  matrix_dims_.push_back(dim);
  matrix_objective_.emplace_back();
  return num_matrix_vars() - 1;
}

int ConicProblem::AddScalarVariable() {
  scalar_linear_.push_back(0.0);
  scalar_quadratic_.push_back(0.0);
  return num_scalar_vars() - 1;
}

void ConicProblem::SetMatrixObjective(int var, CMatrix coeff) {
  matrix_objective_.at(static_cast<std::size_t>(var)) = std::move(coeff);
}

void ConicProblem::SetTraceObjective(int var, double weight) {
  const int n = matrix_dim(var);
  SetMatrixObjective(var, CMatrix::Identity(n, n) * weight);
}

void ConicProblem::SetScalarObjective(int var, double linear, double quadratic) {
  scalar_linear_.at(static_cast<std::size_t>(var)) = linear;
  scalar_quadratic_.at(static_cast<std::size_t>(var)) = quadratic;
}

int ConicProblem::AddConstraint(LinearConstraint constraint) {
  constraints_.push_back(std::move(constraint));
  return num_constraints() - 1;
}

CMatrix ConicProblem::matrix_objective(int var) const {
  const auto& c = matrix_objective_.at(static_cast<std::size_t>(var));
  if (c) return *c;
  const int n = matrix_dim(var);
  return CMatrix::Zero(n, n);
}

bool ConicProblem::has_matrix_objective(int var) const {
  return matrix_objective_.at(static_cast<std::size_t>(var)).has_value();
}

bool ConicProblem::has_objective() const {
  for (const auto& c : matrix_objective_) {
    if (c && c->cwiseAbs().maxCoeff() > 0.0) return true;
  }
  for (std::size_t j = 0; j < scalar_linear_.size(); ++j) {
    if (scalar_linear_[j] != 0.0 || scalar_quadratic_[j] != 0.0) return true;
  }
  return false;
}

ConicProblem ConicProblem::WithoutObjective() const {
  ConicProblem copy = *this;
  for (auto& c : copy.matrix_objective_) c.reset();
  for (auto& c : copy.scalar_linear_) c = 0.0;
  for (auto& q : copy.scalar_quadratic_) q = 0.0;
  copy.objective_constant_ = 0.0;
  return copy;
}

void ConicProblem::Validate() const {
  if (matrix_dims_.empty() && scalar_linear_.empty()) {
    throw ProblemError("problem has no variables");
  }
  for (int i = 0; i < num_matrix_vars(); ++i) {
    const auto& c = matrix_objective_[static_cast<std::size_t>(i)];
    if (!c) continue;
    if (c->rows() != matrix_dims_[static_cast<std::size_t>(i)] || c->cols() != c->rows()) {
      std::ostringstream os;
      os << "objective of matrix variable " << i << " has wrong dimension";
      throw ProblemError(os.str());
    }
    if (!IsHermitian(*c)) {
      std::ostringstream os;
      os << "objective of matrix variable " << i << " is not Hermitian";
      throw ProblemError(os.str());
    }
  }
  for (double q : scalar_quadratic_) {
    if (!(q >= 0.0)) throw ProblemError("quadratic objective coefficients must be nonnegative");
  }
  for (int k = 0; k < num_constraints(); ++k) {
    const auto& con = constraints_[static_cast<std::size_t>(k)];
    if (!std::isfinite(con.rhs)) throw ProblemError("constraint right-hand side is not finite");
    for (const auto& t : con.matrix_terms) {
      if (t.var < 0 || t.var >= num_matrix_vars()) {
        std::ostringstream os;
        os << "constraint " << k << " references unknown matrix variable " << t.var;
        throw ProblemError(os.str());
      }
      const int n = matrix_dims_[static_cast<std::size_t>(t.var)];
      if (t.coeff.rows() != n || t.coeff.cols() != n) {
        std::ostringstream os;
        os << "constraint " << k << " has a " << t.coeff.rows() << "x" << t.coeff.cols()
           << " coefficient for a " << n << "x" << n << " variable";
        throw ProblemError(os.str());
      }
      if (!IsHermitian(t.coeff)) {
        std::ostringstream os;
        os << "constraint " << k << " has a non-Hermitian coefficient";
        throw ProblemError(os.str());
      }
    }
    for (const auto& t : con.scalar_terms) {
      if (t.var < 0 || t.var >= num_scalar_vars()) {
        std::ostringstream os;
        os << "constraint " << k << " references unknown scalar variable " << t.var;
        throw ProblemError(os.str());
      }
    }
  }
}

double ConicProblem::EvaluateConstraint(int k, const std::vector<CMatrix>& X,
                                        const Eigen::VectorXd& x) const {
  const auto& con = constraint(k);
  double v = 0.0;
  for (const auto& t : con.matrix_terms) {
    v += (t.coeff.cwiseProduct(X[static_cast<std::size_t>(t.var)].transpose())).sum().real();
  }
  for (const auto& t : con.scalar_terms) v += t.coeff * x(t.var);
  return v;
}

double ConicProblem::EvaluateObjective(const std::vector<CMatrix>& X,
                                       const Eigen::VectorXd& x) const {
  double v = objective_constant_;
  for (int i = 0; i < num_matrix_vars(); ++i) {
    const auto& c = matrix_objective_[static_cast<std::size_t>(i)];
    if (c) v += (c->cwiseProduct(X[static_cast<std::size_t>(i)].transpose())).sum().real();
  }
  for (int j = 0; j < num_scalar_vars(); ++j) {
    v += scalar_linear_[static_cast<std::size_t>(j)] * x(j) +
         0.5 * scalar_quadratic_[static_cast<std::size_t>(j)] * x(j) * x(j);
  }
  return v;
}

}  // namespace mcbf::conic
