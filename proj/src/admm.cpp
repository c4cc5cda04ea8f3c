#include "mcbf/admm.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcbf/errors.hpp"

namespace mcbf {

PairSide SideOf(const IciPairs& pairs, int b, int k) {
  return pairs.interferer(k) == b ? kInterfererSide : kServerSide;
}

CellProblem AssembleAdmmLocal(int b, const ChannelSet& channels, const Topology& topology,
                              const IciPairs& pairs, const Eigen::VectorXd& theta_global,
                              const Eigen::VectorXd& nu_b, double rho) {
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  CellProblem cp;
  CellLayout& L = cp.layout;
  conic::ConicProblem& p = cp.problem;
  L.b = b;
  L.groups = topology.groups_of_bs(b);
  L.users = topology.users_of_bs(b);
  const int n = static_cast<int>(L.groups.size());
  for (int i = 0; i < n; ++i) {
    p.AddMatrixVariable(topology.A);
    p.SetTraceObjective(i);
  }
  std::vector<int> var_of_pair(static_cast<std::size_t>(pairs.size()), -1);
  auto add_copy = [&](int k) {
    const int v = p.AddScalarVariable();
    const double theta = theta_global(k);
    const double nu = nu_b(k);
    p.SetScalarObjective(v, nu - rho * theta, rho);
    p.AddObjectiveConstant(-nu * theta + 0.5 * rho * theta * theta);
    L.theta_pairs.push_back(k);
    L.theta_vars.push_back(v);
    var_of_pair[k] = v;
  };
  for (int k : pairs.outgoing(b)) add_copy(k);
  for (int k : pairs.incoming(b)) add_copy(k);

  for (int u : L.users) {
    const int g = topology.group_of_user[u];
    const double gamma = topology.gamma[u];
    conic::LinearConstraint row;
    for (int i = 0; i < n; ++i) {
      const double weight = (L.groups[i] == g) ? 1.0 : -gamma;
      row.matrix_terms.push_back({i, weight * channels.H(b, u)});
    }
    for (int k : pairs.incoming(b)) {
      if (pairs.user(k) == u) row.scalar_terms.push_back({var_of_pair[k], -gamma});
    }
    row.rhs = gamma * topology.sigma2[u];
    row.label = "sinr_u" + std::to_string(u);
    L.sinr_rows.push_back(p.AddConstraint(std::move(row)));
  }
  for (int k : pairs.outgoing(b)) {
    const int u = pairs.user(k);
    conic::LinearConstraint cap;
    for (int i = 0; i < n; ++i) cap.matrix_terms.push_back({i, channels.H(b, u)});
    cap.scalar_terms.push_back({var_of_pair[k], -1.0});
    cap.relation = conic::Relation::kLessEqual;
    cap.rhs = 0.0;
    cap.label = "cap_u" + std::to_string(u);
    L.cap_pairs.push_back(k);
    L.cap_rows.push_back(p.AddConstraint(std::move(cap)));
  }
  return cp;
}

double AdmmGlobalUpdate(double copy_a, double copy_b) { return 0.5 * (copy_a + copy_b); }

double AdmmDualUpdate(double nu, double copy, double theta, double rho) {
  return nu + rho * (copy - theta);
}

void AdmmConsensusStep(IciState& state, double rho) {
  for (Eigen::Index k = 0; k < state.theta.size(); ++k) {
    const double a = state.theta_local[kInterfererSide](k);
    const double c = state.theta_local[kServerSide](k);
    const double theta = AdmmGlobalUpdate(a, c);
    state.theta(k) = theta;
    const double delta = rho * (a - theta);
    state.nu[kInterfererSide](k) += delta;
    state.nu[kServerSide](k) -= delta;
  }
}

CellSolve AdmmFeasibilityRestore(int b, const ChannelSet& channels, const Topology& topology,
                                 const IciPairs& pairs, const Eigen::VectorXd& theta_global,
                                 const conic::SolverOptions& solver) {
  return SolveSubproblem(b, channels, topology, pairs, theta_global, solver);
}

AdmmResult RunAdmm(const ChannelSet& channels, const Topology& topology, const AdmmOptions& options) {
  const IciPairs pairs(topology);
  const int B = topology.B;
  const int P = pairs.size();
  const double theta0 = options.theta0 > 0.0 ? options.theta0 : topology.sigma2[0];
  AdmmResult result;
  IciState state = IciState::Uniform(P, theta0);
  Backhaul bus(B);

  std::vector<CellSolve> local(static_cast<std::size_t>(B));
  std::vector<CellSolve> restored(static_cast<std::size_t>(B));
  std::vector<CellSolve> best_cells;
  double best = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int l = 0; l < options.max_iters; ++l) {
    ForEachIndex(options.execution, B, [&](int b) {
      Eigen::VectorXd nu_b(P);
      for (int k = 0; k < P; ++k) nu_b(k) = state.nu[SideOf(pairs, b, k)](k);
      auto cp = AssembleAdmmLocal(b, channels, topology, pairs, state.theta, nu_b, options.rho);
      CellSolve& out = local[b];
      out.solution = conic::Solve(cp.problem, options.solver);
      out.layout = std::move(cp.layout);
      out.feasible = out.solution.optimal();
      out.power = 0.0;
      for (const auto& W : out.solution.matrix_values) out.power += W.trace().real();
    });
    for (int b = 0; b < B; ++b) {
      if (!local[b].feasible) {
        throw StateError("local ADMM problem of BS " + std::to_string(b) + " ended with status " +
                         conic::ToString(local[b].solution.status));
      }
      const auto& L = local[b].layout;
      for (std::size_t i = 0; i < L.theta_pairs.size(); ++i) {
        const int k = L.theta_pairs[i];
        state.theta_local[SideOf(pairs, b, k)](k) = local[b].solution.scalar_values(L.theta_vars[i]);
      }
    }

    // Every BS sends its copies of the pairs shared with each neighbour.
    std::vector<ScalarMessage> plan;
    for (int b = 0; b < B; ++b) {
      for (int j = 0; j < B; ++j) {
        if (j == b) continue;
        ScalarMessage m{b, j, MessageTag::kLocalCopy, {}};
        for (int k : pairs.between(b, j)) m.values.push_back(state.theta_local[SideOf(pairs, b, k)](k));
        plan.push_back(std::move(m));
      }
    }
    bus.RunRound(plan);

    TraceRow row;
    row.iteration = l;
    row.scalars = bus.log().RoundTotal(bus.last_round(), {MessageTag::kLocalCopy});
    row.sum_power = 0.0;
    for (const auto& c : local) row.sum_power += c.power;

    const Eigen::VectorXd theta_before = state.theta;
    AdmmConsensusStep(state, options.rho);
    row.dual_residual = P > 0 ? (state.theta - theta_before).cwiseAbs().maxCoeff() : 0.0;
    double residual = 0.0;
    for (int k = 0; k < P; ++k) {
      const double a = state.theta_local[kInterfererSide](k);
      const double c = state.theta_local[kServerSide](k);
      residual = std::max({residual, std::abs(a - state.theta(k)), std::abs(c - state.theta(k))});
      result.diagnostics.max_pair_sum = std::max(
          result.diagnostics.max_pair_sum, std::abs(state.nu[kInterfererSide](k) + state.nu[kServerSide](k)));
      result.diagnostics.max_mean_error =
          std::max(result.diagnostics.max_mean_error, std::abs(state.theta(k) - 0.5 * (a + c)));
    }
    row.residual = residual;

    ForEachIndex(options.execution, B, [&](int b) {
      restored[b] = AdmmFeasibilityRestore(b, channels, topology, pairs, state.theta, options.solver);
    });
    bool all_feasible = true;
    double feasible_power = 0.0;
    for (const auto& c : restored) {
      all_feasible = all_feasible && c.feasible;
      feasible_power += c.power;
    }
    row.feasible_power = all_feasible ? feasible_power : nan;
    if (all_feasible && feasible_power < best) {
      best = feasible_power;
      best_cells = restored;
      result.theta = state.theta;
    }
    row.best_power = std::isfinite(best) ? best : nan;
    result.trace.push_back(row);
    // Agreeing copies alone do not mean convergence: the copies can agree
    // on a theta that is still moving.
    if (residual <= options.tolerance && row.dual_residual <= options.tolerance) break;
  }

  result.state = state;
  if (!best_cells.empty()) {
    result.relaxed_power = best;
    result.feasible = FinishDistributed(best_cells, channels, topology, pairs, result.theta, options,
                                        bus, result.solution, result.randomized);
  }
  result.log = bus.log();
  return result;
}

}  // namespace mcbf
