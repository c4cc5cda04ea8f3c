#include "mcbf/primal_decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcbf/conic/eigen_tools.hpp"
#include "mcbf/distributed_randomization.hpp"
#include "mcbf/errors.hpp"

namespace mcbf {

CellProblem AssembleSubproblem(int b, const ChannelSet& channels, const Topology& topology,
                               const IciPairs& pairs, const Eigen::VectorXd& theta) {
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
  for (int u : L.users) {
    const int g = topology.group_of_user[u];
    const double gamma = topology.gamma[u];
    double incoming = 0.0;
    for (int k : pairs.incoming(b)) {
      if (pairs.user(k) == u) incoming += theta(k);
    }
    conic::LinearConstraint row;
    for (int i = 0; i < n; ++i) {
      const double weight = (L.groups[i] == g) ? 1.0 : -gamma;
      row.matrix_terms.push_back({i, weight * channels.H(b, u)});
    }
    row.rhs = gamma * (topology.sigma2[u] + incoming);
    row.label = "sinr_u" + std::to_string(u);
    L.sinr_rows.push_back(p.AddConstraint(std::move(row)));
  }
  for (int k : pairs.outgoing(b)) {
    const int u = pairs.user(k);
    conic::LinearConstraint cap;
    for (int i = 0; i < n; ++i) cap.matrix_terms.push_back({i, channels.H(b, u)});
    cap.relation = conic::Relation::kLessEqual;
    cap.rhs = theta(k);
    cap.label = "cap_u" + std::to_string(u);
    L.cap_pairs.push_back(k);
    L.cap_rows.push_back(p.AddConstraint(std::move(cap)));
  }
  return cp;
}

CellSolve SolveSubproblem(int b, const ChannelSet& channels, const Topology& topology,
                          const IciPairs& pairs, const Eigen::VectorXd& theta,
                          const conic::SolverOptions& solver) {
  auto cp = AssembleSubproblem(b, channels, topology, pairs, theta);
  CellSolve out;
  out.solution = conic::Solve(cp.problem, solver);
  out.layout = std::move(cp.layout);
  out.feasible = out.solution.optimal();
  if (out.feasible) {
    out.power = 0.0;
    for (const auto& W : out.solution.matrix_values) out.power += W.trace().real();
  }
  return out;
}

DualSides ExtractDualSides(const conic::ConicSolution& solution, const CellLayout& layout,
                           const Topology& topology, const IciPairs& pairs) {
  const int rows = static_cast<int>(layout.sinr_rows.size() + layout.cap_rows.size());
  if (!solution.optimal() || solution.duals.size() < rows) {
    throw StateError("subgradient needs an optimal subproblem solution with duals");
  }
  DualSides s;
  s.lambda = Eigen::VectorXd::Zero(pairs.size());
  s.mu = Eigen::VectorXd::Zero(pairs.size());
  for (std::size_t i = 0; i < layout.users.size(); ++i) {
    const int u = layout.users[i];
    const double y = std::max(solution.duals(layout.sinr_rows[i]), 0.0);
    for (int k : pairs.incoming(layout.b)) {
      if (pairs.user(k) == u) s.lambda(k) = topology.gamma[u] * y;
    }
  }
  for (std::size_t i = 0; i < layout.cap_pairs.size(); ++i) {
    s.mu(layout.cap_pairs[i]) = std::max(-solution.duals(layout.cap_rows[i]), 0.0);
  }
  return s;
}

Eigen::VectorXd AssembleSubgradient(const std::vector<DualSides>& sides, const IciPairs& pairs) {
  Eigen::VectorXd s(pairs.size());
  for (int k = 0; k < pairs.size(); ++k) {
    s(k) = sides[pairs.server(k)].lambda(k) - sides[pairs.interferer(k)].mu(k);
  }
  return s;
}

double StepSchedule::At(int r) const {
  if (kind == Kind::kFixed) return step;
  return step / std::sqrt(static_cast<double>(r) + 1.0);
}

Eigen::VectorXd MasterUpdate(const Eigen::VectorXd& theta, const Eigen::VectorXd& s, int r,
                             const StepSchedule& schedule) {
  const double step = schedule.At(r);
  Eigen::VectorXd out(theta.size());
  const double f = schedule.trust_factor;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    double v = theta(k) - step * s(k);
    if (f > 1.0) v = std::clamp(v, theta(k) / f, theta(k) * f);
    out(k) = std::max(v, kMinTheta);
  }
  return out;
}

bool FinishDistributed(const std::vector<CellSolve>& cells, const ChannelSet& channels,
                       const Topology& topology, const IciPairs& pairs,
                       const Eigen::VectorXd& theta, const DistributedOptions& options,
                       Backhaul& bus, BeamformingSolution& out, bool& randomized) {
  out = BeamformingSolution{};
  out.W.resize(static_cast<std::size_t>(topology.G));
  out.rank.resize(static_cast<std::size_t>(topology.G));
  std::vector<std::vector<CMatrix>> by_bs(static_cast<std::size_t>(topology.B));
  std::vector<bool> local_rank_one(static_cast<std::size_t>(topology.B), true);
  for (const auto& cell : cells) {
    const int b = cell.layout.b;
    for (std::size_t i = 0; i < cell.layout.groups.size(); ++i) {
      const int g = cell.layout.groups[i];
      out.W[g] = cell.solution.matrix_values[i];
      out.rank[g] = conic::NumericalRank(out.W[g], options.rank_tolerance);
      if (out.rank[g] != 1) local_rank_one[b] = false;
      by_bs[b].push_back(out.W[g]);
    }
  }
  // One-bit rank notification from every BS to every other BS.
  std::vector<ScalarMessage> plan;
  for (int b = 0; b < topology.B; ++b) {
    for (int j = 0; j < topology.B; ++j) {
      if (j != b) plan.push_back({b, j, MessageTag::kRankBit, {local_rank_one[b] ? 1.0 : 0.0}});
    }
  }
  bus.RunRound(plan);
  randomized = !out.all_rank_one();
  if (!randomized) {
    out.ExtractPrincipal();
    out.objective = SumPower(out);
    return true;
  }
  const auto sel = SelectDistributedCandidate(by_bs, theta, channels, topology, pairs, options.gr_count,
                                              options.gr_seed, bus, options.execution, options.solver);
  if (sel.selected < 0) return false;
  out.w = sel.w;
  out.p = sel.p;
  out.objective = SumPower(out);
  return true;
}

DistributedResult RunPrimalDecomposition(const ChannelSet& channels, const Topology& topology,
                                         const PrimalDecompositionOptions& options) {
  const IciPairs pairs(topology);
  const int B = topology.B;
  const int P = pairs.size();
  const double theta0 = options.theta0 > 0.0 ? options.theta0 : topology.sigma2[0];
  DistributedResult result;
  IciState state = IciState::Uniform(P, theta0);
  Backhaul bus(B);

  Eigen::VectorXd theta_prev = state.theta;
  std::vector<CellSolve> best_cells;
  double best = std::numeric_limits<double>::infinity();
  std::vector<CellSolve> cells(static_cast<std::size_t>(B));

  for (int r = 0; r < options.max_iters; ++r) {
    auto solve_all = [&] {
      ForEachIndex(options.execution, B, [&](int b) {
        cells[b] = SolveSubproblem(b, channels, topology, pairs, state.theta, options.solver);
      });
    };
    solve_all();
    int backtracks = 0;
    bool stalled = false;
    for (;;) {
      std::vector<ScalarMessage> flags;
      for (int b = 0; b < B; ++b) {
        if (!cells[b].feasible) flags.push_back({b, kBroadcast, MessageTag::kControl, {1.0}});
      }
      if (flags.empty()) break;
      if (r == 0) {
        throw InitializationError("subproblem of BS " + std::to_string(flags.front().sender) +
                                  " is infeasible at the initial ICI levels; try a larger theta0");
      }
      bus.RunRound(flags);
      if (backtracks == options.max_backtracks) {
        stalled = true;
        break;
      }
      // Halve the last step; every BS applies the same rule to shared data.
      state.theta = 0.5 * (state.theta + theta_prev);
      ++backtracks;
      solve_all();
    }
    if (stalled) break;

    TraceRow row;
    row.iteration = r;
    row.backtracks = backtracks;
    row.sum_power = 0.0;
    for (const auto& c : cells) row.sum_power += c.power;
    row.feasible_power = row.sum_power;
    if (row.sum_power < best) {
      best = row.sum_power;
      best_cells = cells;
      result.theta = state.theta;
    }
    row.best_power = best;

    std::vector<DualSides> sides(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) sides[b] = ExtractDualSides(cells[b].solution, cells[b].layout, topology, pairs);

    // Serving BS sends lambda to the interferer, interferer sends mu back.
    std::vector<ScalarMessage> plan;
    for (int b = 0; b < B; ++b) {
      for (int j = 0; j < B; ++j) {
        if (j == b) continue;
        ScalarMessage lam{b, j, MessageTag::kDualLambda, {}};
        for (int k : pairs.incoming(b)) {
          if (pairs.interferer(k) == j) lam.values.push_back(sides[b].lambda(k));
        }
        ScalarMessage mu{b, j, MessageTag::kDualMu, {}};
        for (int k : pairs.outgoing(b)) {
          if (pairs.server(k) == j) mu.values.push_back(sides[b].mu(k));
        }
        plan.push_back(std::move(lam));
        plan.push_back(std::move(mu));
      }
    }
    const auto inbox = bus.RunRound(plan);
    row.scalars = bus.log().RoundTotal(bus.last_round(), {MessageTag::kDualLambda, MessageTag::kDualMu});

    // Each BS rebuilds lambda and mu for the pairs it touches from its own
    // side and its inbox, then applies the master step to its replica.
    std::vector<Eigen::VectorXd> replica(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
      Eigen::VectorXd lambda = sides[b].lambda;
      Eigen::VectorXd mu = sides[b].mu;
      for (const auto& m : inbox[b]) {
        std::size_t next = 0;
        if (m.tag == MessageTag::kDualLambda) {
          for (int k : pairs.outgoing(b)) {
            if (pairs.server(k) == m.sender) lambda(k) = m.values[next++];
          }
        } else if (m.tag == MessageTag::kDualMu) {
          for (int k : pairs.incoming(b)) {
            if (pairs.interferer(k) == m.sender) mu(k) = m.values[next++];
          }
        }
      }
      replica[b] = MasterUpdate(state.theta, lambda - mu, r, options.schedule);
    }
    Eigen::VectorXd next_theta(P);
    for (int k = 0; k < P; ++k) {
      const double a = replica[pairs.interferer(k)](k);
      const double c = replica[pairs.server(k)](k);
      if (a != c) ++result.replica_mismatches;
      next_theta(k) = a;
    }
    for (int k = 0; k < P; ++k) {
      state.lambda(k) = sides[pairs.server(k)].lambda(k);
      state.mu(k) = sides[pairs.interferer(k)].mu(k);
    }
    theta_prev = state.theta;
    state.theta = next_theta;
    row.residual = P > 0 ? (state.theta - theta_prev).cwiseAbs().maxCoeff() : 0.0;
    row.dual_residual = row.residual;
    result.trace.push_back(row);
    if (row.residual <= options.tolerance) break;
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
