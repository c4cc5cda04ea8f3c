#include "mcbf/distributed_randomization.hpp"

#include <cmath>
#include <limits>

#include "mcbf/errors.hpp"
#include "mcbf/power_min.hpp"

namespace mcbf {

std::optional<std::vector<double>> LocalCandidatePowerLp(int b, const ChannelSet& channels,
                                                         const Topology& topology,
                                                         const IciPairs& pairs,
                                                         const Eigen::VectorXd& theta,
                                                         const std::vector<CVector>& directions,
                                                         const conic::SolverOptions& solver) {
  const auto groups = topology.groups_of_bs(b);
  if (directions.size() != groups.size()) throw StateError("one direction per local group is required");
  const int n = static_cast<int>(groups.size());
  conic::ConicProblem lp;
  for (int i = 0; i < n; ++i) {
    lp.AddScalarVariable();
    lp.SetScalarObjective(i, 1.0);
  }
  for (int u : topology.users_of_bs(b)) {
    const int g = topology.group_of_user[u];
    const double gamma = topology.gamma[u];
    double incoming = 0.0;
    for (int k : pairs.incoming(b)) {
      if (pairs.user(k) == u) incoming += theta(k);
    }
    conic::LinearConstraint row;
    for (int i = 0; i < n; ++i) {
      const double gain = std::norm(channels.h(b, u).dot(directions[i]));
      const double a = (groups[i] == g) ? gain : -gamma * gain;
      if (a != 0.0) row.scalar_terms.push_back({i, a});
    }
    row.rhs = gamma * (topology.sigma2[u] + incoming);
    lp.AddConstraint(std::move(row));
  }
  for (int k : pairs.outgoing(b)) {
    const int u = pairs.user(k);
    conic::LinearConstraint cap;
    for (int i = 0; i < n; ++i) {
      const double gain = std::norm(channels.h(b, u).dot(directions[i]));
      if (gain != 0.0) cap.scalar_terms.push_back({i, gain});
    }
    cap.relation = conic::Relation::kLessEqual;
    cap.rhs = theta(k);
    lp.AddConstraint(std::move(cap));
  }
  const auto sol = conic::Solve(lp, solver);
  if (!sol.optimal()) return std::nullopt;
  std::vector<double> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[i] = std::max(sol.scalar_values(i), 0.0);
  return p;
}

LocalCandidates DistributedGaussianRandomization(int b, const std::vector<CMatrix>& W_b,
                                                 const Eigen::VectorXd& theta_star,
                                                 const ChannelSet& channels,
                                                 const Topology& topology, const IciPairs& pairs,
                                                 int count, Rng& rng, Execution execution,
                                                 const conic::SolverOptions& solver) {
  LocalCandidates out;
  out.sets = DrawCandidateSets(W_b, count, rng);
  const int n = static_cast<int>(out.sets.size());
  std::vector<std::optional<std::vector<double>>> lp(static_cast<std::size_t>(n));
  ForEachIndex(execution, n, [&](int c) {
    lp[c] = LocalCandidatePowerLp(b, channels, topology, pairs, theta_star, out.sets[c], solver);
  });
  out.totals.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  out.powers.resize(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    if (!lp[c]) continue;
    double total = 0.0;
    for (double v : *lp[c]) total += v;
    out.totals[c] = total;
    out.powers[c] = *lp[c];
  }
  return out;
}

DistributedSelection SelectDistributedCandidate(const std::vector<std::vector<CMatrix>>& W_by_bs,
                                                const Eigen::VectorXd& theta_star,
                                                const ChannelSet& channels,
                                                const Topology& topology, const IciPairs& pairs,
                                                int count, std::uint64_t seed, Backhaul& bus,
                                                Execution execution,
                                                const conic::SolverOptions& solver) {
  std::vector<LocalCandidates> local(static_cast<std::size_t>(topology.B));
  ForEachIndex(execution, topology.B, [&](int b) {
    Rng rng(TrialSeed(seed, static_cast<std::uint64_t>(b)));
    local[b] = DistributedGaussianRandomization(b, W_by_bs[b], theta_star, channels, topology, pairs,
                                                count, rng, Execution::kSerial, solver);
  });

  std::vector<ScalarMessage> plan;
  if (topology.B > 1) {
    for (int b = 0; b < topology.B; ++b) {
      plan.push_back({b, kBroadcast, MessageTag::kGrPower, local[b].totals});
    }
  }
  const auto inbox = bus.RunRound(plan);

  // Selection as computed by BS 0 from its own totals and what it received;
  // the other BSs run the same rule on the same numbers.
  std::vector<double> network(static_cast<std::size_t>(count), 0.0);
  for (int c = 0; c < count; ++c) network[c] = local[0].totals[c];
  for (const auto& m : inbox[0]) {
    for (int c = 0; c < count; ++c) network[c] += m.values[c];
  }
  DistributedSelection sel;
  for (int c = 0; c < count; ++c) {
    if (!std::isfinite(network[c])) continue;
    if (sel.selected < 0 || network[c] < network[sel.selected]) sel.selected = c;
  }
  if (sel.selected < 0) return sel;
  sel.total = network[sel.selected];
  sel.w.resize(static_cast<std::size_t>(topology.G));
  sel.p.resize(static_cast<std::size_t>(topology.G));
  for (int b = 0; b < topology.B; ++b) {
    const auto groups = topology.groups_of_bs(b);
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const double p = local[b].powers[sel.selected][i];
      sel.p[groups[i]] = p;
      sel.w[groups[i]] = std::sqrt(p) * local[b].sets[sel.selected][i];
    }
  }
  return sel;
}

}  // namespace mcbf
