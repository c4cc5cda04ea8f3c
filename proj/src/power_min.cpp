#include "mcbf/power_min.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcbf/conic/eigen_tools.hpp"
#include "mcbf/errors.hpp"

namespace mcbf {

conic::ConicProblem AssembleQosSdp(const ChannelSet& channels, const Topology& topology) {
  conic::ConicProblem p;
  for (int g = 0; g < topology.G; ++g) {
    p.AddMatrixVariable(topology.A);
    p.SetTraceObjective(g);
  }
  for (int u = 0; u < topology.U; ++u) {
    const int g = topology.group_of_user[u];
    const double gamma = topology.gamma[u];
    conic::LinearConstraint row;
    for (int k = 0; k < topology.G; ++k) {
      const int j = topology.bs_of_group[k];
      const double weight = (k == g) ? 1.0 : -gamma;
      row.matrix_terms.push_back({k, weight * channels.H(j, u)});
    }
    row.relation = conic::Relation::kGreaterEqual;
    row.rhs = gamma * topology.sigma2[u];
    row.label = "sinr_u" + std::to_string(u);
    p.AddConstraint(std::move(row));
  }
  return p;
}

std::vector<CVector> GaussianCandidates(const CMatrix& W, int count, Rng& rng) {
  std::vector<CVector> out;
  if (count <= 0) return out;
  const CMatrix L = conic::PsdSquareRoot(W);
  out.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    CVector v = L * ComplexNormal(static_cast<int>(W.rows()), rng);
    const double n = v.norm();
    if (n > 0.0) v /= n;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::vector<CVector>> DrawCandidateSets(const std::vector<CMatrix>& W, int count,
                                                   Rng& rng) {
  std::vector<CMatrix> roots;
  for (const auto& m : W) roots.push_back(conic::PsdSquareRoot(m));
  std::vector<std::vector<CVector>> sets(static_cast<std::size_t>(std::max(count, 0)));
  for (auto& set : sets) {
    for (const auto& L : roots) {
      CVector v = L * ComplexNormal(static_cast<int>(L.rows()), rng);
      const double n = v.norm();
      if (n > 0.0) v /= n;
      set.push_back(std::move(v));
    }
  }
  return sets;
}

Eigen::MatrixXd DirectionGains(const ChannelSet& channels, const Topology& topology,
                               const std::vector<CVector>& directions) {
  Eigen::MatrixXd gains(topology.U, topology.G);
  for (int u = 0; u < topology.U; ++u) {
    for (int g = 0; g < topology.G; ++g) {
      gains(u, g) = std::norm(channels.h(topology.bs_of_group[g], u).dot(directions[g]));
    }
  }
  return gains;
}

std::optional<std::vector<double>> CandidatePowerLp(const ChannelSet& channels,
                                                    const Topology& topology,
                                                    const std::vector<CVector>& directions,
                                                    const conic::SolverOptions& solver) {
  if (static_cast<int>(directions.size()) != topology.G) {
    throw StateError("one candidate direction per group is required");
  }
  const Eigen::MatrixXd gains = DirectionGains(channels, topology, directions);
  conic::ConicProblem lp;
  for (int g = 0; g < topology.G; ++g) {
    lp.AddScalarVariable();
    lp.SetScalarObjective(g, 1.0);
  }
  for (int u = 0; u < topology.U; ++u) {
    const int g = topology.group_of_user[u];
    conic::LinearConstraint row;
    for (int k = 0; k < topology.G; ++k) {
      const double a = (k == g) ? gains(u, k) : -topology.gamma[u] * gains(u, k);
      if (a != 0.0) row.scalar_terms.push_back({k, a});
    }
    row.rhs = topology.gamma[u] * topology.sigma2[u];
    lp.AddConstraint(std::move(row));
  }
  const auto sol = conic::Solve(lp, solver);
  if (!sol.optimal()) return std::nullopt;
  std::vector<double> p(static_cast<std::size_t>(topology.G));
  for (int g = 0; g < topology.G; ++g) p[g] = std::max(sol.scalar_values(g), 0.0);
  return p;
}

RandomizationOutcome RandomizePowerMin(const ChannelSet& channels, const Topology& topology,
                                       const std::vector<std::vector<CVector>>& sets,
                                       Execution execution, const conic::SolverOptions& solver) {
  const int n = static_cast<int>(sets.size());
  std::vector<std::optional<std::vector<double>>> powers(static_cast<std::size_t>(n));
  ForEachIndex(execution, n, [&](int c) {
    powers[c] = CandidatePowerLp(channels, topology, sets[c], solver);
  });
  RandomizationOutcome out;
  out.totals.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (int c = 0; c < n; ++c) {
    if (!powers[c]) continue;
    ++out.feasible;
    double total = 0.0;
    for (double v : *powers[c]) total += v;
    out.totals[c] = total;
    if (out.selected < 0 || total < out.totals[out.selected]) out.selected = c;
  }
  if (out.selected >= 0) out.powers = *powers[out.selected];
  return out;
}

CentralizedResult SolveCentralized(const ChannelSet& channels, const Topology& topology,
                                   const CentralizedOptions& options, Rng& rng) {
  const auto problem = AssembleQosSdp(channels, topology);
  const auto sol = conic::Solve(problem, options.solver);
  if (sol.status == conic::SolveStatus::kInfeasible) {
    throw InfeasibleTargetError("SINR targets are infeasible for the relaxed problem");
  }
  if (!sol.optimal()) {
    throw IndeterminateError(std::string("relaxed QoS problem ended with status ") +
                             conic::ToString(sol.status));
  }
  CentralizedResult result;
  result.sdr_objective = sol.primal_objective;
  BeamformingSolution& s = result.solution;
  s.W = sol.matrix_values;
  for (const auto& m : s.W) s.rank.push_back(conic::NumericalRank(m, options.rank_tolerance));
  if (s.all_rank_one()) {
    s.ExtractPrincipal();
    s.objective = SumPower(s);
    return result;
  }
  result.randomized = true;
  const auto sets = DrawCandidateSets(s.W, options.gr_count, rng);
  const auto outcome = RandomizePowerMin(channels, topology, sets, options.execution, options.solver);
  result.feasible_candidates = outcome.feasible;
  if (outcome.selected < 0) {
    throw RandomizationError("no randomization draw met the SINR targets", s);
  }
  result.selected_candidate = outcome.selected;
  s.SetBeamformers(sets[outcome.selected], outcome.powers);
  s.objective = SumPower(s);
  return result;
}

double AverageRank(const std::vector<int>& ranks) {
  if (ranks.empty()) return 0.0;
  double total = 0.0;
  for (int r : ranks) total += r;
  return total / static_cast<double>(ranks.size());
}

}  // namespace mcbf
