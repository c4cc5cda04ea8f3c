#pragma once

#include <iosfwd>

#include "mcbf/conic/problem.hpp"

namespace mcbf::conic {

// Plain-text dump for cross-checking with external solvers:
//
//   mcbf-conic 1
//   matrix_vars <n> <dim_0> ... <dim_{n-1}>
//   scalar_vars <m>
//   objective_constant <c>
//   objective_matrix <var> <row> <col> <re> <im>      (upper triangle)
//   objective_scalar <var> <linear> <quadratic>
//   constraint <k> <ge|le|eq> <rhs> <label>
//   coef_matrix <k> <var> <row> <col> <re> <im>       (upper triangle)
//   coef_scalar <k> <var> <value>
//
// All numbers use 17 significant digits so ReadProblemText(WriteProblemText(p))
// reproduces p exactly.
void WriteProblemText(const ConicProblem& problem, std::ostream& out);
ConicProblem ReadProblemText(std::istream& in);

}  // namespace mcbf::conic
