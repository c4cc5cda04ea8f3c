#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace mcbf::conic {

using CMatrix = Eigen::MatrixXcd;

enum class Relation { kLessEqual, kGreaterEqual, kEqual };

/// Tr(coeff * X_var) for a Hermitian matrix variable.
struct MatrixTerm {
  int var = 0;
  CMatrix coeff;
};

struct ScalarTerm {
  int var = 0;
  double coeff = 0.0;
};

struct LinearConstraint {
  std::vector<MatrixTerm> matrix_terms;
  std::vector<ScalarTerm> scalar_terms;
  Relation relation = Relation::kGreaterEqual;
  double rhs = 0.0;
  std::string label;
};

/// A conic program over Hermitian PSD matrix variables and nonnegative
/// scalars:
///
///   min   sum_i Tr(C_i X_i) + sum_j (c_j x_j + q_j/2 x_j^2) + const
///   s.t.  sum_i Tr(A_ki X_i) + sum_j a_kj x_j  {<=,>=,=}  b_k
///         X_i >= 0 (PSD),  x_j >= 0.
///
/// The quadratic coefficients q_j must be nonnegative.
class ConicProblem {
 public:
  int AddMatrixVariable(int dim);
  int AddScalarVariable();

  void SetMatrixObjective(int var, CMatrix coeff);
  /// Tr(X_var) objective, the common case for transmit power.
  void SetTraceObjective(int var, double weight = 1.0);
  void SetScalarObjective(int var, double linear, double quadratic = 0.0);
  void AddObjectiveConstant(double c) { objective_constant_ += c; }

  int AddConstraint(LinearConstraint constraint);

  int num_matrix_vars() const { return static_cast<int>(matrix_dims_.size()); }
  int num_scalar_vars() const { return static_cast<int>(scalar_linear_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  int matrix_dim(int var) const { return matrix_dims_.at(static_cast<std::size_t>(var)); }
  const std::vector<int>& matrix_dims() const { return matrix_dims_; }

  /// Zero matrix when no objective was set for the variable.
  CMatrix matrix_objective(int var) const;
  bool has_matrix_objective(int var) const;
  double scalar_linear(int var) const { return scalar_linear_.at(static_cast<std::size_t>(var)); }
  double scalar_quadratic(int var) const { return scalar_quadratic_.at(static_cast<std::size_t>(var)); }
  double objective_constant() const { return objective_constant_; }
  bool has_objective() const;
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }
  const LinearConstraint& constraint(int k) const { return constraints_.at(static_cast<std::size_t>(k)); }

  /// Copy with the objective (and constant) removed.
  ConicProblem WithoutObjective() const;

  /// Throws ProblemError on inconsistent dimensions, bad indices,
  /// non-Hermitian data or negative quadratic coefficients.
  void Validate() const;

  /// Evaluates the left-hand side of constraint k at a point.
  double EvaluateConstraint(int k, const std::vector<CMatrix>& X, const Eigen::VectorXd& x) const;
  double EvaluateObjective(const std::vector<CMatrix>& X, const Eigen::VectorXd& x) const;

 private:
  std::vector<int> matrix_dims_;
  std::vector<std::optional<CMatrix>> matrix_objective_;
  std::vector<double> scalar_linear_;
  std::vector<double> scalar_quadratic_;
  double objective_constant_ = 0.0;
  std::vector<LinearConstraint> constraints_;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kMaxIter };

const char* ToString(SolveStatus status);

struct KktResiduals {
  double primal = 0.0;           ///< relative primal infeasibility
  double dual = 0.0;             ///< relative dual infeasibility
  double gap = 0.0;              ///< relative duality gap
  double complementarity = 0.0;  ///< <X,Z> + x'z at the returned point
};

/// Dual improving ray proving primal infeasibility: y with
/// sum_k y_k A_k in the negative of the cone and b'y > 0.
struct FarkasCertificate {
  Eigen::VectorXd y;            ///< unit 2-norm, one entry per constraint
  double b_dot_y = 0.0;         ///< > 0 for a valid certificate
  double cone_violation = 0.0;  ///< largest positive eigenvalue / entry of A'y
};

/// Primal improving ray proving unboundedness.
struct UnboundedRay {
  std::vector<CMatrix> matrix_direction;
  Eigen::VectorXd scalar_direction;
  double objective_slope = 0.0;  ///< < 0
};

struct ConicSolution {
  SolveStatus status = SolveStatus::kMaxIter;
  std::vector<CMatrix> matrix_values;
  Eigen::VectorXd scalar_values;
  /// One multiplier per constraint, read as d(optimal value)/d(rhs):
  /// >= constraints carry nonnegative duals, <= constraints nonpositive.
  Eigen::VectorXd duals;
  std::vector<CMatrix> dual_slack_matrices;
  Eigen::VectorXd dual_slack_scalars;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  KktResiduals residuals;
  int iterations = 0;
  std::optional<FarkasCertificate> certificate;
  std::optional<UnboundedRay> ray;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

}  // namespace mcbf::conic
