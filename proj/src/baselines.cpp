#include "mcbf/baselines.hpp"

#include <algorithm>
#include <string>

#include "mcbf/conic/eigen_tools.hpp"
#include "mcbf/conic/solver.hpp"
#include "mcbf/errors.hpp"
#include "mcbf/primal_decomposition.hpp"

namespace mcbf {

namespace {

DistributedOptions FinishOptions(const CentralizedOptions& options, std::uint64_t gr_seed) {
  DistributedOptions d;
  d.gr_count = options.gr_count;
  d.rank_tolerance = options.rank_tolerance;
  d.gr_seed = gr_seed;
  d.execution = options.execution;
  d.solver = options.solver;
  return d;
}

/// Solves one single-cell problem per BS and places the results into the
/// network groups. `prepare` edits the cell view before the solve; with
/// `basis`, local solutions live in the span of basis[b] and are mapped
/// back to A antennas.
template <class Prepare>
BaselineResult PerCell(const ChannelSet& channels, const Topology& topology, const CentralizedOptions& options,
                       std::uint64_t gr_seed, Prepare prepare, const std::vector<Eigen::MatrixXcd>* basis) {
  BaselineResult out;
  out.solution.W.resize(static_cast<std::size_t>(topology.G));
  out.solution.rank.resize(static_cast<std::size_t>(topology.G));
  out.solution.p.resize(static_cast<std::size_t>(topology.G));
  std::vector<CVector> w(static_cast<std::size_t>(topology.G));
  std::vector<CentralizedResult> cells(static_cast<std::size_t>(topology.B));
  std::vector<int> infeasible(static_cast<std::size_t>(topology.B), 0);
  ForEachIndex(options.execution, topology.B, [&](int b) {
    CellView view = RestrictToCell(topology, channels, b);
    if (!prepare(b, view)) {
      infeasible[b] = 1;
      return;
    }
    Rng rng(TrialSeed(gr_seed, static_cast<std::uint64_t>(b)));
    try {
      cells[b] = SolveCentralized(view.channels, view.topology, options, rng);
    } catch (const InfeasibleTargetError&) {
      infeasible[b] = 1;
    } catch (const RandomizationError&) {
      infeasible[b] = 1;
    }
  });
  if (std::count(infeasible.begin(), infeasible.end(), 1) > 0) return out;
  for (int b = 0; b < topology.B; ++b) {
    const auto groups = topology.groups_of_bs(b);
    const auto& s = cells[b].solution;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const int g = groups[i];
      if (basis) {
        const auto& N = (*basis)[b];
        out.solution.W[g] = N * s.W[i] * N.adjoint();
        w[g] = N * (*s.w)[i];
      } else {
        out.solution.W[g] = s.W[i];
        w[g] = (*s.w)[i];
      }
      out.solution.rank[g] = s.rank[i];
      out.solution.p[g] = s.p[i];
    }
    out.relaxed_power += cells[b].sdr_objective;
    out.randomized = out.randomized || cells[b].randomized;
  }
  out.solution.w = std::move(w);
  out.solution.objective = SumPower(out.solution);
  out.feasible = true;
  return out;
}

}  // namespace

BaselineResult SolveFixedTheta(const ChannelSet& channels, const Topology& topology, double theta,
                               const CentralizedOptions& options, std::uint64_t gr_seed) {
  if (!(theta >= 0.0)) throw ConfigError("fixed ICI level must be nonnegative");
  const IciPairs pairs(topology);
  BaselineResult out;
  out.theta = Eigen::VectorXd::Constant(pairs.size(), std::max(theta, kMinTheta));
  std::vector<CellSolve> cells(static_cast<std::size_t>(topology.B));
  ForEachIndex(options.execution, topology.B, [&](int b) {
    cells[b] = SolveSubproblem(b, channels, topology, pairs, out.theta, options.solver);
  });
  for (const auto& c : cells) {
    if (!c.feasible) return out;
    out.relaxed_power += c.power;
  }
  Backhaul bus(topology.B);
  out.feasible = FinishDistributed(cells, channels, topology, pairs, out.theta, FinishOptions(options, gr_seed),
                                   bus, out.solution, out.randomized);
  out.log = bus.log();
  return out;
}

conic::ConicProblem AssembleCommonThetaSdp(const ChannelSet& channels, const Topology& topology) {
  const IciPairs pairs(topology);
  conic::ConicProblem p;
  const int theta = p.AddScalarVariable();
  for (int g = 0; g < topology.G; ++g) {
    p.AddMatrixVariable(topology.A);
    p.SetTraceObjective(g);
  }
  for (int u = 0; u < topology.U; ++u) {
    const int b = topology.bs_of_user(u);
    const int g = topology.group_of_user[u];
    const double gamma = topology.gamma[u];
    conic::LinearConstraint row;
    for (int k : topology.groups_of_bs(b)) {
      const double weight = (k == g) ? 1.0 : -gamma;
      row.matrix_terms.push_back({k, weight * channels.H(b, u)});
    }
    int incoming = 0;
    for (int j = 0; j < topology.B; ++j) {
      if (j != b) ++incoming;
    }
    if (incoming > 0) row.scalar_terms.push_back({theta, -gamma * incoming});
    row.rhs = gamma * topology.sigma2[u];
    row.label = "sinr_u" + std::to_string(u);
    p.AddConstraint(std::move(row));
  }
  for (int k = 0; k < pairs.size(); ++k) {
    const int b = pairs.interferer(k);
    const int u = pairs.user(k);
    conic::LinearConstraint cap;
    for (int g : topology.groups_of_bs(b)) cap.matrix_terms.push_back({g, channels.H(b, u)});
    cap.scalar_terms.push_back({theta, -1.0});
    cap.relation = conic::Relation::kLessEqual;
    cap.rhs = 0.0;
    cap.label = "cap_b" + std::to_string(b) + "_u" + std::to_string(u);
    p.AddConstraint(std::move(cap));
  }
  return p;
}

BaselineResult SolveCommonTheta(const ChannelSet& channels, const Topology& topology,
                                const CentralizedOptions& options, std::uint64_t gr_seed) {
  const auto sol = conic::Solve(AssembleCommonThetaSdp(channels, topology), options.solver);
  if (!sol.optimal()) {
    BaselineResult out;
    out.theta = Eigen::VectorXd::Zero(IciPairs(topology).size());
    return out;
  }
  return SolveFixedTheta(channels, topology, std::max(sol.scalar_values(0), kMinTheta), options, gr_seed);
}

Eigen::MatrixXcd NullSpaceBasis(int b, const ChannelSet& channels, const Topology& topology) {
  const auto others = topology.out_of_cell_users(b);
  if (others.empty()) return Eigen::MatrixXcd::Identity(topology.A, topology.A);
  Eigen::MatrixXcd C(static_cast<Eigen::Index>(others.size()), topology.A);
  for (std::size_t i = 0; i < others.size(); ++i) C.row(static_cast<Eigen::Index>(i)) = channels.h(b, others[i]).adjoint();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(C, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  return svd.matrixV().rightCols(topology.A - rank);
}

BaselineResult SolveNulling(const ChannelSet& channels, const Topology& topology,
                            const CentralizedOptions& options, std::uint64_t gr_seed) {
  std::vector<Eigen::MatrixXcd> basis(static_cast<std::size_t>(topology.B));
  for (int b = 0; b < topology.B; ++b) basis[b] = NullSpaceBasis(b, channels, topology);
  auto prepare = [&](int b, CellView& view) {
    const auto& N = basis[b];
    if (N.cols() == 0) return false;
    std::vector<std::vector<CVector>> h(1);
    for (std::size_t i = 0; i < view.users.size(); ++i) h[0].push_back(N.adjoint() * view.channels.h(0, static_cast<int>(i)));
    view.channels = ChannelSet(std::move(h));
    view.topology.A = static_cast<int>(N.cols());
    return true;
  };
  return PerCell(channels, topology, options, gr_seed, prepare, &basis);
}

BaselineResult SolveOrthogonal(const ChannelSet& channels, const Topology& topology,
                               const CentralizedOptions& options, std::uint64_t gr_seed) {
  auto prepare = [&](int, CellView& view) {
    for (auto& g : view.topology.gamma) g = OrthogonalEquivalentTarget(g, topology.B);
    return true;
  };
  return PerCell(channels, topology, options, gr_seed, prepare, nullptr);
}

}  // namespace mcbf
