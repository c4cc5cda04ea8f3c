#include "mcbf/conic/text_dump.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mcbf/errors.hpp"

namespace mcbf::conic {

namespace {

const char* RelationName(Relation r) {
  switch (r) {
    case Relation::kGreaterEqual: return "ge";
    case Relation::kLessEqual: return "le";
    case Relation::kEqual: return "eq";
  }
  return "?";
}

Relation ParseRelation(const std::string& s) {
  if (s == "ge") return Relation::kGreaterEqual;
  if (s == "le") return Relation::kLessEqual;
  if (s == "eq") return Relation::kEqual;
  throw ProblemError("unknown relation '" + s + "'");
}

void WriteUpper(std::ostream& out, const std::string& prefix, const CMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = r; c < m.cols(); ++c) {
      const auto v = m(r, c);
      if (v == std::complex<double>(0.0, 0.0)) continue;
      out << prefix << ' ' << r << ' ' << c << ' ' << v.real() << ' ' << v.imag() << '\n';
    }
  }
}

void SetHermitian(CMatrix& m, int r, int c, double re, double im) {
  if (r < 0 || c < 0 || r >= m.rows() || c >= m.cols()) throw ProblemError("matrix entry out of range");
  m(r, c) = {re, im};
  m(c, r) = {re, -im};
  if (r == c) m(r, r) = {re, 0.0};
}

}  // namespace

void WriteProblemText(const ConicProblem& p, std::ostream& out) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << "mcbf-conic 1\n";
  out << "matrix_vars " << p.num_matrix_vars();
  for (int d : p.matrix_dims()) out << ' ' << d;
  out << "\nscalar_vars " << p.num_scalar_vars() << '\n';
  out << "objective_constant " << p.objective_constant() << '\n';
  for (int i = 0; i < p.num_matrix_vars(); ++i) {
    if (p.has_matrix_objective(i)) {
      WriteUpper(out, "objective_matrix " + std::to_string(i), p.matrix_objective(i));
    }
  }
  for (int j = 0; j < p.num_scalar_vars(); ++j) {
    out << "objective_scalar " << j << ' ' << p.scalar_linear(j) << ' ' << p.scalar_quadratic(j) << '\n';
  }
  for (int k = 0; k < p.num_constraints(); ++k) {
    const auto& con = p.constraint(k);
    out << "constraint " << k << ' ' << RelationName(con.relation) << ' ' << con.rhs << ' '
        << (con.label.empty() ? "-" : con.label) << '\n';
    for (const auto& t : con.matrix_terms) {
      WriteUpper(out, "coef_matrix " + std::to_string(k) + ' ' + std::to_string(t.var), t.coeff);
    }
    for (const auto& t : con.scalar_terms) {
      out << "coef_scalar " << k << ' ' << t.var << ' ' << t.coeff << '\n';
    }
  }
  out.flags(flags);
  out.precision(precision);
}

ConicProblem ReadProblemText(std::istream& in) {
  ConicProblem p;
  std::vector<LinearConstraint> cons;
  std::vector<CMatrix> objective;
  std::vector<bool> has_objective;
  std::string line;
  int line_no = 0;
  bool header = false;
  auto fail = [&](const std::string& msg) {
    throw ProblemError("line " + std::to_string(line_no) + ": " + msg);
  };
  auto matrix_term = [&](LinearConstraint& con, int var) -> CMatrix& {
    for (auto& t : con.matrix_terms) {
      if (t.var == var) return t.coeff;
    }
    if (var < 0 || var >= p.num_matrix_vars()) fail("unknown matrix variable");
    const int n = p.matrix_dim(var);
    con.matrix_terms.push_back({var, CMatrix::Zero(n, n)});
    return con.matrix_terms.back().coeff;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (!header) {
      int version = 0;
      ls >> version;
      if (key != "mcbf-conic" || version != 1) fail("missing 'mcbf-conic 1' header");
      header = true;
      continue;
    }
    if (key == "matrix_vars") {
      int n = 0;
      ls >> n;
      for (int i = 0; i < n; ++i) {
        int d = 0;
        ls >> d;
        p.AddMatrixVariable(d);
        objective.push_back(CMatrix::Zero(d, d));
        has_objective.push_back(false);
      }
    } else if (key == "scalar_vars") {
      int m = 0;
      ls >> m;
      for (int j = 0; j < m; ++j) p.AddScalarVariable();
    } else if (key == "objective_constant") {
      double c = 0.0;
      ls >> c;
      p.AddObjectiveConstant(c);
    } else if (key == "objective_matrix") {
      int var = 0, r = 0, c = 0;
      double re = 0.0, im = 0.0;
      ls >> var >> r >> c >> re >> im;
      if (var < 0 || var >= p.num_matrix_vars()) fail("unknown matrix variable");
      SetHermitian(objective[static_cast<std::size_t>(var)], r, c, re, im);
      has_objective[static_cast<std::size_t>(var)] = true;
    } else if (key == "objective_scalar") {
      int var = 0;
      double lin = 0.0, quad = 0.0;
      ls >> var >> lin >> quad;
      if (var < 0 || var >= p.num_scalar_vars()) fail("unknown scalar variable");
      p.SetScalarObjective(var, lin, quad);
    } else if (key == "constraint") {
      int k = 0;
      std::string rel, label;
      double rhs = 0.0;
      ls >> k >> rel >> rhs >> label;
      if (k != static_cast<int>(cons.size())) fail("constraints must be numbered consecutively");
      LinearConstraint con;
      con.relation = ParseRelation(rel);
      con.rhs = rhs;
      con.label = label == "-" ? "" : label;
      cons.push_back(std::move(con));
    } else if (key == "coef_matrix") {
      int k = 0, var = 0, r = 0, c = 0;
      double re = 0.0, im = 0.0;
      ls >> k >> var >> r >> c >> re >> im;
      if (k < 0 || k >= static_cast<int>(cons.size())) fail("unknown constraint");
      SetHermitian(matrix_term(cons[static_cast<std::size_t>(k)], var), r, c, re, im);
    } else if (key == "coef_scalar") {
      int k = 0, var = 0;
      double v = 0.0;
      ls >> k >> var >> v;
      if (k < 0 || k >= static_cast<int>(cons.size())) fail("unknown constraint");
      cons[static_cast<std::size_t>(k)].scalar_terms.push_back({var, v});
    } else {
      fail("unknown record '" + key + "'");
    }
    if (ls.fail()) fail("malformed record");
  }
  if (!header) throw ProblemError("empty problem dump");
  for (std::size_t i = 0; i < objective.size(); ++i) {
    if (has_objective[i]) p.SetMatrixObjective(static_cast<int>(i), objective[i]);
  }
  for (auto& con : cons) p.AddConstraint(std::move(con));
  return p;
}

}  // namespace mcbf::conic
