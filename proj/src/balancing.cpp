#include "mcbf/balancing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcbf/conic/eigen_tools.hpp"
#include "mcbf/errors.hpp"
#include "mcbf/power_min.hpp"

namespace mcbf {

BisectionResult Bisect(const std::function<bool(double)>& feasible, double lo, double hi, double eps) {
  if (!(eps > 0.0)) throw ConfigError("bisection tolerance must be positive");
  if (!(hi >= lo)) throw ConfigError("bisection bounds are reversed");
  BisectionResult r;
  r.lower = lo;
  r.upper = hi;
  while (r.upper - r.lower > eps) {
    const double t = 0.5 * (r.lower + r.upper);
    const bool ok = feasible(t);
    r.calls.push_back({t, ok});
    if (ok) {
      r.lower = t;
    } else {
      r.upper = t;
    }
  }
  return r;
}

int ExpectedBisectionCalls(double lo, double hi, double eps) {
  if (hi - lo <= eps) return 0;
  return static_cast<int>(std::ceil(std::log2((hi - lo) / eps)));
}

bool IsMonotone(const std::vector<BisectionCall>& calls) {
  for (const auto& a : calls) {
    for (const auto& b : calls) {
      if (a.feasible && !b.feasible && a.t > b.t) return false;
    }
  }
  return true;
}

double ExpandUpperBound(const std::function<bool(double)>& feasible, double hi, int max_doublings) {
  double t = hi;
  for (int i = 0; i <= max_doublings; ++i) {
    if (!feasible(t)) return t;
    t *= 2.0;
  }
  throw ConfigError("upper bisection bound is still feasible after expansion");
}

namespace {

void AddSinrRows(conic::ConicProblem& p, const ChannelSet& channels, const Topology& topology, double t) {
  for (int u = 0; u < topology.U; ++u) {
    const int g = topology.group_of_user[u];
    conic::LinearConstraint row;
    for (int k = 0; k < topology.G; ++k) {
      const int j = topology.bs_of_group[k];
      const double weight = (k == g) ? 1.0 : -t;
      row.matrix_terms.push_back({k, weight * channels.H(j, u)});
    }
    row.rhs = t * topology.sigma2[u];
    row.label = "sinr_u" + std::to_string(u);
    p.AddConstraint(std::move(row));
  }
}

void AddPowerRows(conic::ConicProblem& p, const Topology& topology) {
  for (int b = 0; b < topology.B; ++b) {
    conic::LinearConstraint row;
    for (int g : topology.groups_of_bs(b)) {
      row.matrix_terms.push_back({g, CMatrix::Identity(topology.A, topology.A)});
    }
    row.relation = conic::Relation::kLessEqual;
    row.rhs = topology.p_max[b];
    row.label = "power_b" + std::to_string(b);
    p.AddConstraint(std::move(row));
  }
}

/// Wraps a feasibility question: indeterminate answers count as
/// infeasible, and the last feasible point is kept.
struct FeasibilityOracle {
  std::function<conic::ConicProblem(double)> assemble;
  conic::SolverOptions solver;
  int indeterminate = 0;
  std::vector<CMatrix> last_matrices;
  Eigen::VectorXd last_scalars;

  bool operator()(double t) {
    try {
      auto fr = conic::CheckFeasibility(assemble(t), solver);
      if (fr.verdict != conic::Feasibility::kFeasible) return false;
      last_matrices = std::move(fr.solution.matrix_values);
      last_scalars = std::move(fr.solution.scalar_values);
      return true;
    } catch (const IndeterminateError&) {
      ++indeterminate;
      return false;
    }
  }
};

/// Minimum-power point at level t; falls back to `fallback` when the
/// solve does not certify an optimum.
std::vector<CMatrix> Polish(conic::ConicProblem problem, const conic::SolverOptions& solver,
                            const std::vector<CMatrix>& fallback) {
  for (int i = 0; i < problem.num_matrix_vars(); ++i) problem.SetTraceObjective(i);
  const auto sol = conic::Solve(problem, solver);
  if (sol.optimal()) return sol.matrix_values;
  return fallback;
}

/// Power LP with fixed directions at level t.
struct PowerLpData {
  Eigen::MatrixXd gains;  ///< [user][group]
  std::vector<int> group_of_user;
  std::vector<int> bs_of_group;
  std::vector<double> sigma2;
  std::vector<double> incoming;
  std::vector<double> p_max;  ///< per BS
  Eigen::MatrixXd cap_gains;  ///< [cap][group]
  std::vector<double> cap_rhs;
  double upper = 0.0;  ///< bisection upper bound
};

conic::ConicProblem BuildPowerLp(const PowerLpData& d, double t) {
  const int G = static_cast<int>(d.gains.cols());
  conic::ConicProblem lp;
  for (int g = 0; g < G; ++g) lp.AddScalarVariable();
  for (Eigen::Index u = 0; u < d.gains.rows(); ++u) {
    const int g = d.group_of_user[u];
    conic::LinearConstraint row;
    for (int k = 0; k < G; ++k) {
      const double a = (k == g) ? d.gains(u, k) : -t * d.gains(u, k);
      if (a != 0.0) row.scalar_terms.push_back({k, a});
    }
    row.rhs = t * (d.sigma2[u] + d.incoming[u]);
    lp.AddConstraint(std::move(row));
  }
  for (std::size_t b = 0; b < d.p_max.size(); ++b) {
    conic::LinearConstraint row;
    for (int g = 0; g < G; ++g) {
      if (d.bs_of_group[g] == static_cast<int>(b)) row.scalar_terms.push_back({g, 1.0});
    }
    row.relation = conic::Relation::kLessEqual;
    row.rhs = d.p_max[b];
    lp.AddConstraint(std::move(row));
  }
  for (Eigen::Index c = 0; c < d.cap_gains.rows(); ++c) {
    conic::LinearConstraint row;
    for (int g = 0; g < G; ++g) {
      if (d.cap_gains(c, g) != 0.0) row.scalar_terms.push_back({g, d.cap_gains(c, g)});
    }
    row.relation = conic::Relation::kLessEqual;
    row.rhs = d.cap_rhs[c];
    lp.AddConstraint(std::move(row));
  }
  return lp;
}

GrBalanceResult RandomizedBisection(const std::vector<PowerLpData>& data, double epsilon,
                                    Execution execution, const conic::SolverOptions& solver) {
  const int n = static_cast<int>(data.size());
  GrBalanceResult out;
  out.t_per_candidate.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<std::vector<double>> powers(static_cast<std::size_t>(n));
  std::vector<int> indeterminate(static_cast<std::size_t>(n), 0);
  ForEachIndex(execution, n, [&](int c) {
    const auto& d = data[c];
    FeasibilityOracle oracle{[&](double t) { return BuildPowerLp(d, t); }, solver, 0, {}, {}};
    const auto bis = Bisect(std::ref(oracle), 0.0, d.upper, epsilon);
    out.t_per_candidate[c] = bis.lower;
    indeterminate[c] = oracle.indeterminate;
    const int G = static_cast<int>(d.gains.cols());
    powers[c].assign(static_cast<std::size_t>(G), 0.0);
    if (oracle.last_scalars.size() == G) {
      for (int g = 0; g < G; ++g) powers[c][g] = std::max(oracle.last_scalars(g), 0.0);
    }
  });
  for (int c = 0; c < n; ++c) {
    out.indeterminate += indeterminate[c];
    if (out.selected < 0 || out.t_per_candidate[c] > out.t_per_candidate[out.selected]) out.selected = c;
  }
  if (out.selected >= 0) {
    out.t = out.t_per_candidate[out.selected];
    out.powers = powers[out.selected];
  }
  out.warning = out.t < epsilon;
  return out;
}

PowerLpData CentralizedLpData(const ChannelSet& channels, const Topology& topology,
                              const std::vector<CVector>& directions, double upper) {
  PowerLpData d;
  d.gains = DirectionGains(channels, topology, directions);
  d.group_of_user = topology.group_of_user;
  d.bs_of_group = topology.bs_of_group;
  d.sigma2 = topology.sigma2;
  d.incoming.assign(static_cast<std::size_t>(topology.U), 0.0);
  d.p_max = topology.p_max;
  d.cap_gains.resize(0, topology.G);
  d.upper = upper;
  return d;
}

double CellUpperBound(int b, const ChannelSet& channels, const Topology& topology) {
  double best = 0.0;
  for (int u : topology.users_of_bs(b)) {
    best = std::max(best, topology.p_max[b] * channels.h(b, u).squaredNorm() / topology.sigma2[u]);
  }
  return best;
}

PowerLpData CellLpData(int b, const ChannelSet& channels, const Topology& topology, const IciPairs& pairs,
                       const Eigen::VectorXd* caps, const std::vector<CVector>& directions) {
  const auto groups = topology.groups_of_bs(b);
  const auto users = topology.users_of_bs(b);
  const int n = static_cast<int>(groups.size());
  PowerLpData d;
  d.gains.resize(static_cast<Eigen::Index>(users.size()), n);
  for (std::size_t i = 0; i < users.size(); ++i) {
    const int u = users[i];
    const int g = topology.group_of_user[u];
    d.group_of_user.push_back(static_cast<int>(std::find(groups.begin(), groups.end(), g) - groups.begin()));
    d.sigma2.push_back(topology.sigma2[u]);
    double incoming = 0.0;
    if (caps) {
      for (int k : pairs.incoming(b)) {
        if (pairs.user(k) == u) incoming += (*caps)(k);
      }
    }
    d.incoming.push_back(incoming);
    for (int j = 0; j < n; ++j) d.gains(static_cast<Eigen::Index>(i), j) = std::norm(channels.h(b, u).dot(directions[j]));
  }
  d.bs_of_group.assign(static_cast<std::size_t>(n), 0);
  d.p_max = {topology.p_max[b]};
  if (caps) {
    const auto& out = pairs.outgoing(b);
    d.cap_gains.resize(static_cast<Eigen::Index>(out.size()), n);
    for (std::size_t c = 0; c < out.size(); ++c) {
      const int u = pairs.user(out[c]);
      for (int j = 0; j < n; ++j) d.cap_gains(static_cast<Eigen::Index>(c), j) = std::norm(channels.h(b, u).dot(directions[j]));
      d.cap_rhs.push_back((*caps)(out[c]));
    }
  } else {
    d.cap_gains.resize(0, n);
  }
  d.upper = CellUpperBound(b, channels, topology);
  return d;
}

GrBalanceResult CellGr(int b, const ChannelSet& channels, const Topology& topology, const IciPairs& pairs,
                       const Eigen::VectorXd* caps, const std::vector<std::vector<CVector>>& sets,
                       double epsilon, Execution execution, const conic::SolverOptions& solver) {
  std::vector<PowerLpData> data;
  data.reserve(sets.size());
  for (const auto& s : sets) data.push_back(CellLpData(b, channels, topology, pairs, caps, s));
  return RandomizedBisection(data, epsilon, execution, solver);
}

CellBalanceResult CellBalance(int b, const ChannelSet& channels, const Topology& topology,
                              const IciPairs& pairs, const Eigen::VectorXd* caps,
                              const BalancingOptions& options, Rng& rng) {
  CellBalanceResult r;
  r.b = b;
  FeasibilityOracle oracle{[&](double t) {
                             return AssembleCellFeasibility(b, channels, topology, pairs, caps, t);
                           },
                           options.solver, 0, {}, {}};
  r.bisection = Bisect(std::ref(oracle), 0.0, CellUpperBound(b, channels, topology), options.epsilon);
  r.t = r.bisection.midpoint();
  r.indeterminate = oracle.indeterminate;
  const int n = static_cast<int>(topology.groups_of_bs(b).size());
  std::vector<CMatrix> fallback = oracle.last_matrices;
  if (fallback.empty()) fallback.assign(static_cast<std::size_t>(n), CMatrix::Zero(topology.A, topology.A));
  r.W = Polish(AssembleCellFeasibility(b, channels, topology, pairs, caps, r.bisection.lower), options.solver,
               fallback);
  bool rank_one = true;
  for (const auto& W : r.W) {
    r.rank.push_back(conic::NumericalRank(W, options.rank_tolerance));
    rank_one = rank_one && r.rank.back() == 1;
  }
  if (rank_one) {
    for (const auto& W : r.W) {
      const auto e = conic::PrincipalEigenpair(W);
      r.w.push_back(std::sqrt(std::max(e.value, 0.0)) * e.vector);
    }
    return r;
  }
  r.randomized = true;
  const auto sets = DrawCandidateSets(r.W, options.gr_count, rng);
  const auto gr = CellGr(b, channels, topology, pairs, caps, sets, options.epsilon, Execution::kSerial,
                         options.solver);
  r.indeterminate += gr.indeterminate;
  r.warning = gr.warning;
  if (gr.selected < 0) {
    r.w.assign(static_cast<std::size_t>(n), CVector::Zero(topology.A));
    return r;
  }
  for (int i = 0; i < n; ++i) r.w.push_back(std::sqrt(gr.powers[i]) * sets[gr.selected][i]);
  return r;
}

NetworkBalanceResult CombineCells(std::vector<CellBalanceResult> cells, const ChannelSet& channels,
                                  const Topology& topology) {
  NetworkBalanceResult out;
  out.solution.W.resize(static_cast<std::size_t>(topology.G));
  out.solution.rank.resize(static_cast<std::size_t>(topology.G));
  std::vector<CVector> w(static_cast<std::size_t>(topology.G));
  out.solution.p.resize(static_cast<std::size_t>(topology.G));
  for (const auto& c : cells) {
    const auto groups = topology.groups_of_bs(c.b);
    for (std::size_t i = 0; i < groups.size(); ++i) {
      out.solution.W[groups[i]] = c.W[i];
      out.solution.rank[groups[i]] = c.rank[i];
      w[groups[i]] = c.w[i];
      out.solution.p[groups[i]] = c.w[i].squaredNorm();
    }
  }
  out.solution.w = std::move(w);
  out.cells = std::move(cells);
  out.achieved = AchievedMinSinr(channels, topology, out.solution);
  out.solution.objective = out.achieved;
  return out;
}

}  // namespace

conic::ConicProblem AssembleFeasibility(const ChannelSet& channels, const Topology& topology, double t) {
  if (!(t >= 0.0)) throw ConfigError("balancing level t must be nonnegative");
  conic::ConicProblem p;
  for (int g = 0; g < topology.G; ++g) p.AddMatrixVariable(topology.A);
  AddSinrRows(p, channels, topology, t);
  AddPowerRows(p, topology);
  return p;
}

double BalanceUpperBound(const ChannelSet& channels, const Topology& topology) {
  double best = 0.0;
  for (int u = 0; u < topology.U; ++u) {
    const int b = topology.bs_of_user(u);
    best = std::max(best, topology.p_max[b] * channels.h(b, u).squaredNorm() / topology.sigma2[u]);
  }
  return best;
}

BalanceResult BisectBalance(const ChannelSet& channels, const Topology& topology,
                            const BalancingOptions& options, Rng& rng) {
  BalanceResult r;
  FeasibilityOracle oracle{[&](double t) { return AssembleFeasibility(channels, topology, t); },
                           options.solver, 0, {}, {}};
  r.bisection = Bisect(std::ref(oracle), 0.0, BalanceUpperBound(channels, topology), options.epsilon);
  r.t_star = r.bisection.midpoint();
  r.indeterminate = oracle.indeterminate;
  std::vector<CMatrix> fallback = oracle.last_matrices;
  if (fallback.empty()) fallback.assign(static_cast<std::size_t>(topology.G), CMatrix::Zero(topology.A, topology.A));
  BeamformingSolution& s = r.solution;
  s.W = Polish(AssembleFeasibility(channels, topology, r.bisection.lower), options.solver, fallback);
  for (const auto& W : s.W) s.rank.push_back(conic::NumericalRank(W, options.rank_tolerance));
  if (s.all_rank_one()) {
    s.ExtractPrincipal();
  } else {
    r.randomized = true;
    const auto sets = DrawCandidateSets(s.W, options.gr_count, rng);
    const auto gr = BalanceGaussianRandomization(channels, topology, sets, options.epsilon, options.execution,
                                                 options.solver);
    r.indeterminate += gr.indeterminate;
    r.warning = gr.warning;
    if (gr.selected >= 0) {
      s.SetBeamformers(sets[gr.selected], gr.powers);
    } else {
      s.SetBeamformers(std::vector<CVector>(static_cast<std::size_t>(topology.G), CVector::Zero(topology.A)),
                       std::vector<double>(static_cast<std::size_t>(topology.G), 0.0));
    }
  }
  r.achieved = AchievedMinSinr(channels, topology, s);
  s.objective = r.achieved;
  return r;
}

GrBalanceResult BalanceGaussianRandomization(const ChannelSet& channels, const Topology& topology,
                                             const std::vector<std::vector<CVector>>& sets,
                                             double epsilon, Execution execution,
                                             const conic::SolverOptions& solver) {
  const double upper = BalanceUpperBound(channels, topology);
  std::vector<PowerLpData> data;
  data.reserve(sets.size());
  for (const auto& s : sets) data.push_back(CentralizedLpData(channels, topology, s, upper));
  return RandomizedBisection(data, epsilon, execution, solver);
}

conic::ConicProblem AssembleCellFeasibility(int b, const ChannelSet& channels, const Topology& topology,
                                            const IciPairs& pairs, const Eigen::VectorXd* caps, double t) {
  const auto groups = topology.groups_of_bs(b);
  const int n = static_cast<int>(groups.size());
  conic::ConicProblem p;
  for (int i = 0; i < n; ++i) p.AddMatrixVariable(topology.A);
  for (int u : topology.users_of_bs(b)) {
    const int g = topology.group_of_user[u];
    double incoming = 0.0;
    if (caps) {
      for (int k : pairs.incoming(b)) {
        if (pairs.user(k) == u) incoming += (*caps)(k);
      }
    }
    conic::LinearConstraint row;
    for (int i = 0; i < n; ++i) {
      const double weight = (groups[i] == g) ? 1.0 : -t;
      row.matrix_terms.push_back({i, weight * channels.H(b, u)});
    }
    row.rhs = t * (topology.sigma2[u] + incoming);
    row.label = "sinr_u" + std::to_string(u);
    p.AddConstraint(std::move(row));
  }
  conic::LinearConstraint power;
  for (int i = 0; i < n; ++i) power.matrix_terms.push_back({i, CMatrix::Identity(topology.A, topology.A)});
  power.relation = conic::Relation::kLessEqual;
  power.rhs = topology.p_max[b];
  power.label = "power_b" + std::to_string(b);
  p.AddConstraint(std::move(power));
  if (caps) {
    for (int k : pairs.outgoing(b)) {
      const int u = pairs.user(k);
      conic::LinearConstraint cap;
      for (int i = 0; i < n; ++i) cap.matrix_terms.push_back({i, channels.H(b, u)});
      cap.relation = conic::Relation::kLessEqual;
      cap.rhs = (*caps)(k);
      cap.label = "cap_u" + std::to_string(u);
      p.AddConstraint(std::move(cap));
    }
  }
  return p;
}

CellBalanceResult LocalBalance(int b, const ChannelSet& channels, const Topology& topology,
                               const IciPairs& pairs, const Eigen::VectorXd& caps,
                               const BalancingOptions& options, Rng& rng) {
  return CellBalance(b, channels, topology, pairs, &caps, options, rng);
}

GrBalanceResult LocalBalanceGr(int b, const ChannelSet& channels, const Topology& topology,
                               const IciPairs& pairs, const Eigen::VectorXd& caps,
                               const std::vector<std::vector<CVector>>& sets, double epsilon,
                               Execution execution, const conic::SolverOptions& solver) {
  return CellGr(b, channels, topology, pairs, &caps, sets, epsilon, execution, solver);
}

CellBalanceResult UncoordinatedBalance(int b, const ChannelSet& channels, const Topology& topology,
                                       const BalancingOptions& options, Rng& rng) {
  const IciPairs pairs(topology);
  return CellBalance(b, channels, topology, pairs, nullptr, options, rng);
}

NetworkBalanceResult DistributedBalance(const ChannelSet& channels, const Topology& topology,
                                        double theta_cap, const BalancingOptions& options,
                                        std::uint64_t seed) {
  const IciPairs pairs(topology);
  const Eigen::VectorXd caps = Eigen::VectorXd::Constant(pairs.size(), std::max(theta_cap, kMinTheta));
  std::vector<CellBalanceResult> cells(static_cast<std::size_t>(topology.B));
  ForEachIndex(options.execution, topology.B, [&](int b) {
    Rng rng(TrialSeed(seed, static_cast<std::uint64_t>(b)));
    cells[b] = CellBalance(b, channels, topology, pairs, &caps, options, rng);
  });
  return CombineCells(std::move(cells), channels, topology);
}

NetworkBalanceResult UncoordinatedNetwork(const ChannelSet& channels, const Topology& topology,
                                          const BalancingOptions& options, std::uint64_t seed) {
  const IciPairs pairs(topology);
  std::vector<CellBalanceResult> cells(static_cast<std::size_t>(topology.B));
  ForEachIndex(options.execution, topology.B, [&](int b) {
    Rng rng(TrialSeed(seed, static_cast<std::uint64_t>(b)));
    cells[b] = CellBalance(b, channels, topology, pairs, nullptr, options, rng);
  });
  return CombineCells(std::move(cells), channels, topology);
}

double AchievedMinSinr(const ChannelSet& channels, const Topology& topology,
                       const BeamformingSolution& solution) {
  if (!solution.w || static_cast<int>(solution.w->size()) != topology.G) {
    throw StateError("achieved SINR needs beamformers for every group in the network");
  }
  return MinSinr(channels, topology, solution);
}

}  // namespace mcbf
