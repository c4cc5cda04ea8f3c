#include "mcbf/conic/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mcbf/conic/embedding.hpp"
#include "mcbf/errors.hpp"

namespace mcbf::conic {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Blocks = std::vector<MatrixXd>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kStallIterations = 20;
constexpr double kFarkasFallback = 1e-6;

double Dot(const MatrixXd& a, const MatrixXd& b) { return a.cwiseProduct(b).sum(); }

double Dot(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += Dot(a[i], b[i]);
  return s;
}

double SquaredNorm(const Blocks& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return s;
}

MatrixXd Sym(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

struct RowEntry {
  int block = 0;
  MatrixXd coeff;
};

// min <C,X> + c'x + x'Qx/2  s.t.  A(X, x) = b,  X psd,  x >= 0.
// Inequalities of the user problem carry one slack column each; every row
// is normalized to unit Frobenius norm.
struct StandardForm {
  std::vector<int> dims;
  int n_orig_scalars = 0;
  int n_lin = 0;
  int m = 0;
  std::vector<std::vector<RowEntry>> rows;
  std::vector<std::vector<std::pair<int, int>>> block_rows;  // (row, entry)
  MatrixXd a_lin;
  VectorXd b;
  Blocks c_blocks;
  VectorXd c_lin;
  VectorXd q_lin;
  VectorXd row_scale;
  std::vector<int> orig_row;
  int trivially_infeasible_row = -1;
  double b_norm = 0.0;
  double c_norm = 0.0;
};

StandardForm BuildStandardForm(const RealConicProblem& rp) {
  StandardForm sf;
  sf.dims = rp.matrix_dims;
  sf.n_orig_scalars = rp.num_scalars;
  int n_ineq = 0;
  for (const auto& c : rp.constraints) n_ineq += (c.relation != Relation::kEqual);
  sf.n_lin = rp.num_scalars + n_ineq;

  std::vector<VectorXd> lin_rows;
  std::vector<double> rhs;
  std::vector<double> scales;
  int slack = rp.num_scalars;
  for (std::size_t k = 0; k < rp.constraints.size(); ++k) {
    const auto& con = rp.constraints[k];
    std::vector<RowEntry> entries;
    double norm2 = 0.0;
    for (const auto& t : con.matrix_terms) {
      const double n2 = t.coeff.squaredNorm();
      if (n2 == 0.0) continue;
      entries.push_back({t.var, t.coeff});
      norm2 += n2;
    }
    VectorXd lin = VectorXd::Zero(sf.n_lin);
    for (const auto& t : con.scalar_terms) lin(t.var) += t.coeff;
    if (con.relation == Relation::kGreaterEqual) lin(slack++) = -1.0;
    if (con.relation == Relation::kLessEqual) lin(slack++) = 1.0;
    norm2 += lin.squaredNorm();
    if (norm2 == 0.0) {
      // 0 = rhs: vacuous or trivially infeasible.
      if (con.rhs != 0.0 && sf.trivially_infeasible_row < 0) {
        sf.trivially_infeasible_row = static_cast<int>(k);
      }
      continue;
    }
    const double s = std::sqrt(norm2);
    for (auto& e : entries) e.coeff /= s;
    sf.rows.push_back(std::move(entries));
    lin_rows.push_back(lin / s);
    rhs.push_back(con.rhs / s);
    scales.push_back(s);
    sf.orig_row.push_back(static_cast<int>(k));
  }
  sf.m = static_cast<int>(sf.rows.size());
  sf.a_lin = MatrixXd::Zero(sf.m, sf.n_lin);
  sf.b.resize(sf.m);
  sf.row_scale.resize(sf.m);
  for (int k = 0; k < sf.m; ++k) {
    sf.a_lin.row(k) = lin_rows[static_cast<std::size_t>(k)].transpose();
    sf.b(k) = rhs[static_cast<std::size_t>(k)];
    sf.row_scale(k) = scales[static_cast<std::size_t>(k)];
  }
  sf.block_rows.assign(sf.dims.size(), {});
  for (int k = 0; k < sf.m; ++k) {
    const auto& entries = sf.rows[static_cast<std::size_t>(k)];
    for (int e = 0; e < static_cast<int>(entries.size()); ++e) {
      sf.block_rows[static_cast<std::size_t>(entries[static_cast<std::size_t>(e)].block)]
          .push_back({k, e});
    }
  }
  sf.c_blocks = rp.matrix_objective;
  sf.c_lin = VectorXd::Zero(sf.n_lin);
  sf.q_lin = VectorXd::Zero(sf.n_lin);
  sf.c_lin.head(rp.num_scalars) = rp.scalar_linear;
  sf.q_lin.head(rp.num_scalars) = rp.scalar_quadratic;
  sf.b_norm = sf.b.norm();
  sf.c_norm = std::sqrt(SquaredNorm(sf.c_blocks) + sf.c_lin.squaredNorm());
  return sf;
}

VectorXd ApplyA(const StandardForm& sf, const Blocks& X, const VectorXd& x) {
  VectorXd out = sf.a_lin * x;
  for (int k = 0; k < sf.m; ++k) {
    for (const auto& e : sf.rows[static_cast<std::size_t>(k)]) {
      out(k) += Dot(e.coeff, X[static_cast<std::size_t>(e.block)]);
    }
  }
  return out;
}

void ApplyAT(const StandardForm& sf, const VectorXd& y, Blocks* blocks, VectorXd* lin) {
  blocks->resize(sf.dims.size());
  for (std::size_t i = 0; i < sf.dims.size(); ++i) {
    (*blocks)[i] = MatrixXd::Zero(sf.dims[i], sf.dims[i]);
  }
  for (int k = 0; k < sf.m; ++k) {
    if (y(k) == 0.0) continue;
    for (const auto& e : sf.rows[static_cast<std::size_t>(k)]) {
      (*blocks)[static_cast<std::size_t>(e.block)] += y(k) * e.coeff;
    }
  }
  *lin = sf.a_lin.transpose() * y;
}

// L with L L' = S. Cholesky when possible, otherwise an eigenvalue square
// root; the Nesterov-Todd formulas accept any square factor.
MatrixXd Factor(const MatrixXd& s) {
  Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() == Eigen::Success) {
    MatrixXd l = llt.matrixL();
    if (l.allFinite() && l.diagonal().minCoeff() > 0.0) return l;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  const double top = std::max(es.eigenvalues().maxCoeff(), 1e-300);
  VectorXd ev = es.eigenvalues().cwiseMax(top * 1e-30);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

struct BlockScaling {
  MatrixXd r;     // W = R R',  R' Z R = diag(lambda) = R^-1 X R^-T
  MatrixXd rinv;
  VectorXd lambda;
};

BlockScaling NesterovToddScaling(const MatrixXd& X, const MatrixXd& Z) {
  const MatrixXd lx = Factor(X);
  const MatrixXd lz = Factor(Z);
  Eigen::JacobiSVD<MatrixXd> svd(lz.transpose() * lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  BlockScaling s;
  s.lambda = svd.singularValues().cwiseMax(1e-300);
  const VectorXd inv_sqrt = s.lambda.cwiseSqrt().cwiseInverse();
  s.r = lx * svd.matrixV() * inv_sqrt.asDiagonal();
  s.rinv = inv_sqrt.asDiagonal() * svd.matrixU().transpose() * lz.transpose();
  return s;
}

// Largest alpha <= inf with diag(lambda) + alpha * D psd.
double MaxStepScaled(const VectorXd& lambda, const MatrixXd& d) {
  const VectorXd is = lambda.cwiseSqrt().cwiseInverse();
  const MatrixXd m = Sym(is.asDiagonal() * d * is.asDiagonal());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  return lo < 0.0 ? -1.0 / lo : kInf;
}

double MaxStepLinear(const VectorXd& v, const VectorXd& dv) {
  double a = kInf;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (dv(j) < 0.0) a = std::min(a, -v(j) / dv(j));
  }
  return a;
}

double MaxStepScalar(double v, double dv) { return dv < 0.0 ? -v / dv : kInf; }

struct Iterate {
  Blocks X, Z;
  VectorXd x, z, y;
  double tau = 1.0;
  double kappa = 1.0;
};

struct Direction {
  Blocks dX, dZ;
  VectorXd dx, dz, dy;
  double dtau = 0.0;
  double dkappa = 0.0;
};

struct NewtonRhs {
  VectorXd r1;   // primal equation
  Blocks r2b;    // dual equation, matrix part
  VectorXd r2l;  // dual equation, scalar part
  double r3 = 0.0;
  Blocks rc;     // complementarity, dX + W dZ W = rc
  VectorXd rcl;  // complementarity, dx + (x/z) dz = rcl
  double rtau = 0.0;
};

enum class Outcome { kOptimal, kInfeasible, kUnbounded, kStalled };

struct HsdResult {
  Outcome outcome = Outcome::kStalled;
  Iterate point;
  int iterations = 0;
  double pres = kInf;
  double dres = kInf;
  double gap = kInf;
};

class HsdSolver {
 public:
  HsdSolver(const StandardForm& sf, const SolverOptions& opt) : sf_(sf), opt_(opt) {}

  HsdResult Run() {
    const std::size_t nb = sf_.dims.size();
    Iterate it;
    double nu = sf_.n_lin;
    for (std::size_t i = 0; i < nb; ++i) {
      it.X.push_back(MatrixXd::Identity(sf_.dims[i], sf_.dims[i]));
      it.Z.push_back(MatrixXd::Identity(sf_.dims[i], sf_.dims[i]));
      nu += sf_.dims[i];
    }
    it.x = VectorXd::Ones(sf_.n_lin);
    it.z = VectorXd::Ones(sf_.n_lin);
    it.y = VectorXd::Zero(sf_.m);

    HsdResult res;
    HsdResult best;
    double best_score = kInf;
    HsdResult farkas;
    double best_farkas = kInf;
    double progress_score = kInf;
    double progress_farkas = kInf;
    int progress_iter = 0;
    for (int iter = 0;; ++iter) {
      res.iterations = iter;
      // Residuals of the homogeneous system.
      const VectorXd ax = ApplyA(sf_, it.X, it.x);
      const VectorXd rp = ax - it.tau * sf_.b;
      Blocks aty_b;
      VectorXd aty_l;
      ApplyAT(sf_, it.y, &aty_b, &aty_l);
      Blocks rd_b(nb);
      for (std::size_t i = 0; i < nb; ++i) rd_b[i] = aty_b[i] + it.Z[i] - it.tau * sf_.c_blocks[i];
      const VectorXd qx = sf_.q_lin.cwiseProduct(it.x);
      const VectorXd rd_l = aty_l + it.z - it.tau * sf_.c_lin - qx;
      const double cx = Dot(sf_.c_blocks, it.X) + sf_.c_lin.dot(it.x);
      const double xqx = it.x.dot(qx);
      const double by = sf_.b.dot(it.y);
      const double rg = it.kappa - by + cx + xqx / it.tau;
      const double mu = (Dot(it.X, it.Z) + it.x.dot(it.z) + it.tau * it.kappa) / (nu + 1.0);

      // Worst row violation in the units of the original constraint.
      res.pres = 0.0;
      for (int k = 0; k < sf_.m; ++k) {
        const double s = sf_.row_scale(k);
        res.pres = std::max(res.pres, std::abs(rp(k)) * s / (1.0 + std::abs(sf_.b(k)) * s));
      }
      res.pres /= it.tau;
      res.dres = std::sqrt(SquaredNorm(rd_b) + rd_l.squaredNorm()) / it.tau / (1.0 + sf_.c_norm);
      const double pobj = (cx + 0.5 * xqx / it.tau) / it.tau;
      const double dobj = (by - 0.5 * xqx / it.tau) / it.tau;
      res.gap = std::abs(pobj - dobj) / std::max(1.0, 0.5 * (std::abs(pobj) + std::abs(dobj)));
      res.point = it;
      if (opt_.verbose) {
        std::fprintf(stderr, "%3d  pres %.2e  dres %.2e  gap %.2e  pobj %+.6e  tau %.2e  kappa %.2e  mu %.2e\n",
                     iter, res.pres, res.dres, res.gap, pobj, it.tau, it.kappa, mu);
      }

      if (res.pres <= opt_.feasibility_tolerance && res.dres <= opt_.feasibility_tolerance &&
          res.gap <= opt_.gap_tolerance) {
        res.outcome = Outcome::kOptimal;
        return res;
      }
      const double score = std::max({res.pres, res.dres, res.gap});
      if (score < best_score) {
        best_score = score;
        best = res;
      }
      if (by > 0.0) {
        // Farkas test: A'y must lie in the negative cone, relative to b'y.
        double viol = aty_l.size() > 0 ? std::max(0.0, aty_l.maxCoeff()) : 0.0;
        for (const auto& m : aty_b) {
          Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
          viol = std::max(viol, es.eigenvalues().maxCoeff());
        }
        if (viol <= opt_.infeasibility_tolerance * by) {
          res.outcome = Outcome::kInfeasible;
          return res;
        }
        if (viol / by < best_farkas) {
          best_farkas = viol / by;
          farkas = res;
        }
      }
      if (cx < 0.0) {
        const double dinf = std::sqrt(ax.squaredNorm() + qx.squaredNorm()) / (-cx);
        if (dinf <= opt_.infeasibility_tolerance) {
          res.outcome = Outcome::kUnbounded;
          return res;
        }
      }
      if (iter >= opt_.max_iterations || !std::isfinite(mu)) break;
      // Give up after a long run without halving either measure.
      if (best_score < 0.5 * progress_score || best_farkas < 0.5 * progress_farkas) {
        progress_score = best_score;
        progress_farkas = best_farkas;
        progress_iter = iter;
      } else if (iter - progress_iter > kStallIterations) {
        break;
      }

      if (!PrepareIteration(it)) break;

      // Predictor.
      NewtonRhs rhs;
      rhs.r1 = -rp;
      rhs.r2b.resize(nb);
      rhs.rc.resize(nb);
      for (std::size_t i = 0; i < nb; ++i) {
        rhs.r2b[i] = -rd_b[i];
        rhs.rc[i] = -it.X[i];
      }
      rhs.r2l = -rd_l;
      rhs.r3 = -rg;
      rhs.rcl = -it.x;
      rhs.rtau = -it.tau * it.kappa;
      const Direction aff = SolveRefined(it, rhs);
      const double alpha_aff = std::min(1.0, MaxStep(it, aff));
      const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

      // Corrector.
      const double f = 1.0 - sigma;
      rhs.r1 = -f * rp;
      for (std::size_t i = 0; i < nb; ++i) {
        rhs.r2b[i] = -f * rd_b[i];
        const auto& s = scaling_[i];
        const MatrixXd dxs = s.rinv * aff.dX[i] * s.rinv.transpose();
        const MatrixXd dzs = s.r.transpose() * aff.dZ[i] * s.r;
        MatrixXd t = -Sym(dxs * dzs);
        t.diagonal() += VectorXd::Constant(sf_.dims[i], sigma * mu) - s.lambda.cwiseAbs2();
        MatrixXd sol(t.rows(), t.cols());
        for (Eigen::Index a = 0; a < t.rows(); ++a) {
          for (Eigen::Index b = 0; b < t.cols(); ++b) {
            sol(a, b) = 2.0 * t(a, b) / (s.lambda(a) + s.lambda(b));
          }
        }
        rhs.rc[i] = s.r * sol * s.r.transpose();
      }
      rhs.r2l = -f * rd_l;
      rhs.r3 = -f * rg;
      rhs.rcl = (VectorXd::Constant(sf_.n_lin, sigma * mu) - it.x.cwiseProduct(it.z) -
                 aff.dx.cwiseProduct(aff.dz))
                    .cwiseQuotient(it.z);
      rhs.rtau = sigma * mu - it.tau * it.kappa - aff.dtau * aff.dkappa;
      const Direction dir = SolveRefined(it, rhs);
      const double alpha = std::min(1.0, 0.99 * MaxStep(it, dir));
      if (!(alpha > 1e-12)) break;

      for (std::size_t i = 0; i < nb; ++i) {
        it.X[i] = Sym(it.X[i] + alpha * dir.dX[i]);
        it.Z[i] = Sym(it.Z[i] + alpha * dir.dZ[i]);
      }
      it.x += alpha * dir.dx;
      it.z += alpha * dir.dz;
      it.y += alpha * dir.dy;
      it.tau += alpha * dir.dtau;
      it.kappa += alpha * dir.dkappa;

      // Rescale the homogeneous point to avoid drifting magnitudes.
      const double scale = std::max({it.tau, it.kappa, 1e-300});
      if (scale > 1e6 || scale < 1e-6) {
        const double inv = 1.0 / scale;
        for (std::size_t i = 0; i < nb; ++i) {
          it.X[i] *= inv;
          it.Z[i] *= inv;
        }
        it.x *= inv;
        it.z *= inv;
        it.y *= inv;
        it.tau *= inv;
        it.kappa *= inv;
      }
    }
    // Out of iterations or numerically stuck. A nearly converged Farkas ray
    // beats a poor primal-dual point; otherwise fall back to the most
    // accurate iterate seen, which the caller may still accept.
    if (best_score > opt_.acceptance_tolerance && best_farkas <= kFarkasFallback) {
      farkas.outcome = Outcome::kInfeasible;
      farkas.iterations = res.iterations;
      return farkas;
    }
    best.outcome = Outcome::kStalled;
    best.iterations = res.iterations;
    return best;
  }

 private:
  // Scalings, Schur complement factorization and the tau-direction
  // components that do not depend on the right-hand side.
  bool PrepareIteration(const Iterate& it) {
    const std::size_t nb = sf_.dims.size();
    scaling_.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) scaling_[i] = NesterovToddScaling(it.X[i], it.Z[i]);
    d_lin_ = (it.z.cwiseQuotient(it.x) + sf_.q_lin).cwiseInverse();

    MatrixXd m = sf_.a_lin * d_lin_.asDiagonal() * sf_.a_lin.transpose();
    for (std::size_t i = 0; i < nb; ++i) {
      const auto& rows = sf_.block_rows[i];
      std::vector<MatrixXd> scaled;
      scaled.reserve(rows.size());
      for (const auto& [k, e] : rows) {
        const auto& coeff = sf_.rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(e)].coeff;
        scaled.push_back(scaling_[i].r.transpose() * coeff * scaling_[i].r);
      }
      for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = a; b < rows.size(); ++b) {
          const double v = Dot(scaled[a], scaled[b]);
          m(rows[a].first, rows[b].first) += v;
          if (rows[a].first != rows[b].first) m(rows[b].first, rows[a].first) += v;
        }
      }
    }
    if (sf_.m > 0) {
      const double reg = 1e-13 * std::max(1.0, m.diagonal().maxCoeff());
      m.diagonal().array() += reg;
      schur_.compute(m);
      if (schur_.info() != Eigen::Success) return false;
    }

    // u2 = M^-1 (A D c + b), v2 = D (A' u2 - c).
    Blocks dc_b;
    VectorXd dc_l;
    ApplyD(sf_.c_blocks, sf_.c_lin, &dc_b, &dc_l);
    u2_ = SolveSchur(ApplyA(sf_, dc_b, dc_l) + sf_.b);
    Blocks t_b;
    VectorXd t_l;
    ApplyAT(sf_, u2_, &t_b, &t_l);
    for (std::size_t i = 0; i < nb; ++i) t_b[i] -= sf_.c_blocks[i];
    t_l -= sf_.c_lin;
    ApplyD(t_b, t_l, &v2_b_, &v2_l_);
    return u2_.allFinite();
  }

  VectorXd SolveSchur(const VectorXd& rhs) const {
    if (sf_.m == 0) return VectorXd::Zero(0);
    return schur_.solve(rhs);
  }

  // D = (W^-2 + Q)^-1: W V W on matrix blocks.
  void ApplyD(const Blocks& vb, const VectorXd& vl, Blocks* ob, VectorXd* ol) const {
    ob->resize(vb.size());
    for (std::size_t i = 0; i < vb.size(); ++i) {
      const auto& s = scaling_[i];
      (*ob)[i] = Sym(s.r * (s.r.transpose() * vb[i] * s.r) * s.r.transpose());
    }
    *ol = d_lin_.cwiseProduct(vl);
  }

  MatrixXd ApplyWinv(std::size_t i, const MatrixXd& v) const {
    const auto& s = scaling_[i];
    return Sym(s.rinv.transpose() * (s.rinv * v * s.rinv.transpose()) * s.rinv);
  }

  // Residual of the linearized system at a candidate direction. The dual
  // and tau-kappa complementarity rows hold by construction.
  NewtonRhs NewtonResidual(const Iterate& it, const NewtonRhs& rhs, const Direction& d) const {
    const std::size_t nb = sf_.dims.size();
    NewtonRhs e;
    e.r1 = rhs.r1 - (ApplyA(sf_, d.dX, d.dx) - d.dtau * sf_.b);
    e.r2b.resize(nb);
    e.rc.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      e.r2b[i] = MatrixXd::Zero(sf_.dims[i], sf_.dims[i]);
      const auto& sc = scaling_[i];
      const MatrixXd wdzw = sc.r * (sc.r.transpose() * d.dZ[i] * sc.r) * sc.r.transpose();
      e.rc[i] = Sym(rhs.rc[i] - d.dX[i] - wdzw);
    }
    e.r2l = VectorXd::Zero(sf_.n_lin);
    e.rcl = rhs.rcl - d.dx - it.x.cwiseQuotient(it.z).cwiseProduct(d.dz);
    const VectorXd g_l = sf_.c_lin + 2.0 * sf_.q_lin.cwiseProduct(it.x) / it.tau;
    const double xqx = it.x.dot(sf_.q_lin.cwiseProduct(it.x));
    e.r3 = rhs.r3 - (d.dkappa - sf_.b.dot(d.dy) + Dot(sf_.c_blocks, d.dX) + g_l.dot(d.dx) -
                     xqx / (it.tau * it.tau) * d.dtau);
    e.rtau = 0.0;
    return e;
  }

  static double Size(const NewtonRhs& r) {
    return std::sqrt(r.r1.squaredNorm() + SquaredNorm(r.r2b) + r.r2l.squaredNorm() + r.r3 * r.r3 +
                     SquaredNorm(r.rc) + r.rcl.squaredNorm() + r.rtau * r.rtau);
  }

  // Newton direction with iterative refinement on the full linearized
  // system. Refining only the Schur complement solve is not enough: the
  // elimination cancels terms of size |b| to produce a primal step of size
  // |r1|, and only a correction solve with the small residual as its
  // right-hand side recovers that accuracy.
  Direction SolveRefined(const Iterate& it, const NewtonRhs& rhs) const {
    Direction d = SolveNewton(it, rhs);
    double err = Size(NewtonResidual(it, rhs, d));
    for (int round = 0; round < 3 && err > 1e-15 * (1.0 + Size(rhs)); ++round) {
      const NewtonRhs e = NewtonResidual(it, rhs, d);
      const Direction c = SolveNewton(it, e);
      Direction trial = d;
      for (std::size_t i = 0; i < trial.dX.size(); ++i) {
        trial.dX[i] += c.dX[i];
        trial.dZ[i] += c.dZ[i];
      }
      trial.dx += c.dx;
      trial.dz += c.dz;
      trial.dy += c.dy;
      trial.dtau += c.dtau;
      trial.dkappa += c.dkappa;
      const double trial_err = Size(NewtonResidual(it, rhs, trial));
      if (!(trial_err < err)) break;
      d = std::move(trial);
      err = trial_err;
    }
    return d;
  }

  Direction SolveNewton(const Iterate& it, const NewtonRhs& rhs) const {
    const std::size_t nb = sf_.dims.size();
    Blocks s_b(nb);
    for (std::size_t i = 0; i < nb; ++i) s_b[i] = ApplyWinv(i, rhs.rc[i]) - rhs.r2b[i];
    const VectorXd s_l = it.z.cwiseQuotient(it.x).cwiseProduct(rhs.rcl) - rhs.r2l;

    Blocks ds_b;
    VectorXd ds_l;
    ApplyD(s_b, s_l, &ds_b, &ds_l);
    const VectorXd u1 = SolveSchur(rhs.r1 - ApplyA(sf_, ds_b, ds_l));
    Blocks t_b;
    VectorXd t_l;
    ApplyAT(sf_, u1, &t_b, &t_l);
    for (std::size_t i = 0; i < nb; ++i) t_b[i] += s_b[i];
    t_l += s_l;
    Blocks v1_b;
    VectorXd v1_l;
    ApplyD(t_b, t_l, &v1_b, &v1_l);

    const VectorXd g_l = sf_.c_lin + 2.0 * sf_.q_lin.cwiseProduct(it.x) / it.tau;
    const double xqx = it.x.dot(sf_.q_lin.cwiseProduct(it.x));
    const double denom = -it.kappa / it.tau - sf_.b.dot(u2_) + Dot(sf_.c_blocks, v2_b_) +
                         g_l.dot(v2_l_) - xqx / (it.tau * it.tau);
    const double numer = rhs.r3 - rhs.rtau / it.tau + sf_.b.dot(u1) - Dot(sf_.c_blocks, v1_b) -
                         g_l.dot(v1_l);

    Direction d;
    d.dtau = numer / denom;
    d.dy = u1 + d.dtau * u2_;
    d.dX.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) d.dX[i] = v1_b[i] + d.dtau * v2_b_[i];
    d.dx = v1_l + d.dtau * v2_l_;
    d.dkappa = (rhs.rtau - it.kappa * d.dtau) / it.tau;

    // Dual slack from the dual equation.
    Blocks aty_b;
    VectorXd aty_l;
    ApplyAT(sf_, d.dy, &aty_b, &aty_l);
    d.dZ.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      d.dZ[i] = Sym(rhs.r2b[i] - aty_b[i] + d.dtau * sf_.c_blocks[i]);
    }
    d.dz = rhs.r2l - aty_l + d.dtau * sf_.c_lin + sf_.q_lin.cwiseProduct(d.dx);
    return d;
  }

  double MaxStep(const Iterate& it, const Direction& d) const {
    double a = kInf;
    for (std::size_t i = 0; i < sf_.dims.size(); ++i) {
      const auto& s = scaling_[i];
      a = std::min(a, MaxStepScaled(s.lambda, s.rinv * d.dX[i] * s.rinv.transpose()));
      a = std::min(a, MaxStepScaled(s.lambda, s.r.transpose() * d.dZ[i] * s.r));
    }
    a = std::min(a, MaxStepLinear(it.x, d.dx));
    a = std::min(a, MaxStepLinear(it.z, d.dz));
    a = std::min(a, MaxStepScalar(it.tau, d.dtau));
    a = std::min(a, MaxStepScalar(it.kappa, d.dkappa));
    return a;
  }

  const StandardForm& sf_;
  const SolverOptions& opt_;
  std::vector<BlockScaling> scaling_;
  VectorXd d_lin_;
  Eigen::LDLT<MatrixXd> schur_;
  VectorXd u2_;
  Blocks v2_b_;
  VectorXd v2_l_;
};

double MinEigenvalue(const CMatrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double MaxEigenvalue(const CMatrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// sum_k y_k A_k restricted to matrix variable i / scalar variable j.
std::vector<CMatrix> AdjointMatrices(const ConicProblem& p, const Eigen::VectorXd& y) {
  std::vector<CMatrix> out;
  for (int i = 0; i < p.num_matrix_vars(); ++i) {
    out.push_back(CMatrix::Zero(p.matrix_dim(i), p.matrix_dim(i)));
  }
  for (int k = 0; k < p.num_constraints(); ++k) {
    for (const auto& t : p.constraint(k).matrix_terms) {
      out[static_cast<std::size_t>(t.var)] += y(k) * t.coeff;
    }
  }
  return out;
}

Eigen::VectorXd AdjointScalars(const ConicProblem& p, const Eigen::VectorXd& y) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p.num_scalar_vars());
  for (int k = 0; k < p.num_constraints(); ++k) {
    for (const auto& t : p.constraint(k).scalar_terms) out(t.var) += y(k) * t.coeff;
  }
  return out;
}

double DualObjective(const ConicProblem& p, const ConicSolution& s) {
  double d = p.objective_constant();
  for (int k = 0; k < p.num_constraints(); ++k) d += p.constraint(k).rhs * s.duals(k);
  for (int j = 0; j < p.num_scalar_vars(); ++j) {
    d -= 0.5 * p.scalar_quadratic(j) * s.scalar_values(j) * s.scalar_values(j);
  }
  return d;
}

}  // namespace

ConicSolution Solve(const ConicProblem& problem, const SolverOptions& options) {
  problem.Validate();
  const RealConicProblem real = EmbedHermitian(problem);
  const StandardForm sf = BuildStandardForm(real);

  ConicSolution sol;
  const int nm = problem.num_matrix_vars();
  const int ns = problem.num_scalar_vars();
  const int nc = problem.num_constraints();

  if (sf.trivially_infeasible_row >= 0) {
    sol.status = SolveStatus::kInfeasible;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(nc);
    y(sf.trivially_infeasible_row) = problem.constraint(sf.trivially_infeasible_row).rhs > 0 ? 1.0 : -1.0;
    const auto check = VerifyFarkasCertificate(problem, y);
    sol.certificate = FarkasCertificate{y, check.b_dot_y, check.cone_violation};
    return sol;
  }

  HsdSolver solver(sf, options);
  HsdResult res = solver.Run();
  sol.iterations = res.iterations;
  const Iterate& it = res.point;

  if (res.outcome == Outcome::kInfeasible) {
    sol.status = SolveStatus::kInfeasible;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(nc);
    for (int k = 0; k < sf.m; ++k) y(sf.orig_row[static_cast<std::size_t>(k)]) = it.y(k) / sf.row_scale(k);
    if (y.norm() > 0.0) y /= y.norm();
    const auto check = VerifyFarkasCertificate(problem, y);
    sol.certificate = FarkasCertificate{y, check.b_dot_y, check.cone_violation};
    return sol;
  }
  if (res.outcome == Outcome::kUnbounded) {
    sol.status = SolveStatus::kUnbounded;
    const double cx = Dot(sf.c_blocks, it.X) + sf.c_lin.dot(it.x);
    UnboundedRay ray;
    for (int i = 0; i < nm; ++i) {
      ray.matrix_direction.push_back(UnembedSymmetricMatrix(it.X[static_cast<std::size_t>(i)] / (-cx)));
    }
    ray.scalar_direction = it.x.head(ns) / (-cx);
    ray.objective_slope = -1.0;
    sol.ray = std::move(ray);
    return sol;
  }

  // Optimal or stalled: recover the point, then classify by residuals.
  for (int i = 0; i < nm; ++i) {
    sol.matrix_values.push_back(UnembedSymmetricMatrix(it.X[static_cast<std::size_t>(i)] / it.tau));
  }
  sol.scalar_values = it.x.head(ns) / it.tau;
  sol.duals = Eigen::VectorXd::Zero(nc);
  for (int k = 0; k < sf.m; ++k) {
    sol.duals(sf.orig_row[static_cast<std::size_t>(k)]) = it.y(k) / it.tau / sf.row_scale(k);
  }
  const auto aty = AdjointMatrices(problem, sol.duals);
  for (int i = 0; i < nm; ++i) {
    sol.dual_slack_matrices.push_back(problem.matrix_objective(i) - aty[static_cast<std::size_t>(i)]);
  }
  const Eigen::VectorXd aty_s = AdjointScalars(problem, sol.duals);
  sol.dual_slack_scalars.resize(ns);
  for (int j = 0; j < ns; ++j) {
    sol.dual_slack_scalars(j) =
        problem.scalar_linear(j) + problem.scalar_quadratic(j) * sol.scalar_values(j) - aty_s(j);
  }
  sol.primal_objective = problem.EvaluateObjective(sol.matrix_values, sol.scalar_values);
  sol.dual_objective = DualObjective(problem, sol);
  sol.residuals = ComputeKktResiduals(problem, sol);

  const bool accepted = res.pres <= options.acceptance_tolerance &&
                        res.dres <= options.acceptance_tolerance &&
                        res.gap <= options.acceptance_tolerance;
  sol.status = (res.outcome == Outcome::kOptimal || accepted) ? SolveStatus::kOptimal
                                                              : SolveStatus::kMaxIter;
  return sol;
}

FeasibilityResult CheckFeasibility(const ConicProblem& problem, const SolverOptions& options) {
  FeasibilityResult out;
  if (problem.num_constraints() == 0) {
    out.verdict = Feasibility::kFeasible;
    out.solution.status = SolveStatus::kOptimal;
    for (int i = 0; i < problem.num_matrix_vars(); ++i) {
      out.solution.matrix_values.push_back(CMatrix::Zero(problem.matrix_dim(i), problem.matrix_dim(i)));
    }
    out.solution.scalar_values = Eigen::VectorXd::Zero(problem.num_scalar_vars());
    return out;
  }
  out.solution = Solve(problem.WithoutObjective(), options);
  switch (out.solution.status) {
    case SolveStatus::kOptimal:
      out.verdict = Feasibility::kFeasible;
      return out;
    case SolveStatus::kInfeasible:
      out.verdict = Feasibility::kInfeasible;
      return out;
    case SolveStatus::kUnbounded:
    case SolveStatus::kMaxIter:
      break;
  }
  throw IndeterminateError("feasibility check did not converge (status " +
                           std::string(ToString(out.solution.status)) + ")");
}

CertificateCheck VerifyFarkasCertificate(const ConicProblem& problem, const Eigen::VectorXd& y,
                                         double tolerance) {
  CertificateCheck check;
  if (y.size() != problem.num_constraints() || y.norm() == 0.0) return check;
  const Eigen::VectorXd u = y / y.norm();
  double violation = 0.0;
  for (int k = 0; k < problem.num_constraints(); ++k) {
    const Relation rel = problem.constraint(k).relation;
    if (rel == Relation::kGreaterEqual) violation = std::max(violation, -u(k));
    if (rel == Relation::kLessEqual) violation = std::max(violation, u(k));
    check.b_dot_y += problem.constraint(k).rhs * u(k);
  }
  for (const auto& m : AdjointMatrices(problem, u)) violation = std::max(violation, MaxEigenvalue(m));
  const Eigen::VectorXd s = AdjointScalars(problem, u);
  if (s.size() > 0) violation = std::max(violation, s.maxCoeff());
  check.cone_violation = violation;
  check.valid = check.b_dot_y >= 1e-8 && violation <= tolerance * std::max(1.0, check.b_dot_y);
  return check;
}

KktResiduals ComputeKktResiduals(const ConicProblem& problem, const ConicSolution& s) {
  KktResiduals r;
  const int nm = problem.num_matrix_vars();
  for (int k = 0; k < problem.num_constraints(); ++k) {
    const auto& con = problem.constraint(k);
    const double v = problem.EvaluateConstraint(k, s.matrix_values, s.scalar_values);
    double viol = 0.0;
    switch (con.relation) {
      case Relation::kGreaterEqual: viol = std::max(0.0, con.rhs - v); break;
      case Relation::kLessEqual: viol = std::max(0.0, v - con.rhs); break;
      case Relation::kEqual: viol = std::abs(v - con.rhs); break;
    }
    r.primal = std::max(r.primal, viol / (1.0 + std::abs(con.rhs)));
    // Sign convention of the multipliers.
    const double y = s.duals(k);
    if (con.relation == Relation::kGreaterEqual) r.dual = std::max(r.dual, -y / (1.0 + std::abs(y)));
    if (con.relation == Relation::kLessEqual) r.dual = std::max(r.dual, y / (1.0 + std::abs(y)));
  }
  for (int i = 0; i < nm; ++i) {
    const auto& x = s.matrix_values[static_cast<std::size_t>(i)];
    r.primal = std::max(r.primal, -MinEigenvalue(x) / (1.0 + x.norm()));
    const CMatrix c = problem.matrix_objective(i);
    const auto& z = s.dual_slack_matrices[static_cast<std::size_t>(i)];
    r.dual = std::max(r.dual, -MinEigenvalue(z) / (1.0 + c.norm()));
    r.complementarity += (x * z).trace().real();
  }
  for (int j = 0; j < problem.num_scalar_vars(); ++j) {
    r.primal = std::max(r.primal, -s.scalar_values(j) / (1.0 + std::abs(s.scalar_values(j))));
    r.dual = std::max(r.dual, -s.dual_slack_scalars(j) / (1.0 + std::abs(problem.scalar_linear(j))));
    r.complementarity += s.scalar_values(j) * s.dual_slack_scalars(j);
  }
  const double p = s.primal_objective;
  const double d = s.dual_objective;
  r.gap = std::abs(p - d) / std::max(1.0, 0.5 * (std::abs(p) + std::abs(d)));
  return r;
}

}  // namespace mcbf::conic
